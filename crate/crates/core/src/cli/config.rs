//! Experiment configuration files (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StitError};
use crate::geometry::{ConvexPolytope, Point, PolytopeRepr, Window};
use crate::measures::{HyperplaneMeasureSpec, MeasureKind};
use crate::mnw::RunOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Verify,
    Clt2d,
    Clt3d,
    Increment,
    IterateTest,
    Compare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Verify => "verify",
            ExperimentKind::Clt2d => "clt2d",
            ExperimentKind::Clt3d => "clt3d",
            ExperimentKind::Increment => "increment",
            ExperimentKind::IterateTest => "iterate-test",
            ExperimentKind::Compare => "compare",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowConfig {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        faces: Vec<Vec<u32>>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory (the `--out` flag overrides it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File name stem for `<stem>.csv`, `<stem>.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    /// SVG stroke width proportional to facet age.
    #[serde(default)]
    pub stroke_by_birth: bool,
}

fn default_replicates() -> usize {
    1
}

fn default_z_max() -> f64 {
    4.0
}

fn default_measure() -> MeasureKind<f64> {
    MeasureKind::Isotropic
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dimension: usize,
    pub window: WindowConfig,
    #[serde(default = "default_measure")]
    pub measure: MeasureKind<f64>,
    pub t: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<f64>,
    /// Erosion for typical-facet minus-sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erosion: Option<f64>,
    /// Radii for the reduced second moment function.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_grid: Vec<f64>,
    /// Facet discretization size for K̂ (default `min(r_grid)/10`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_size: Option<f64>,
    /// Window scale factors `R` (clt2d, clt3d, increment, compare).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
    /// Start of the increment interval `[s0, t]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    /// Duration of the nested run in the iteration test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn cfg_err(field: &str, message: impl Into<String>) -> StitError {
    StitError::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(
            field,
            format!("must be a positive finite number, got {x}"),
        ))
    }
}

impl ExperimentConfig {
    /// Parses and validates; syntax errors carry line and column.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| {
            StitError::Parse(format!(
                "config line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s).map_err(|e| match e {
            StitError::Parse(m) => StitError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(cfg_err(
                "dimension",
                format!("must be 1, 2 or 3, got {}", self.dimension),
            ));
        }
        positive("t", self.t)?;
        if self.replicates == 0 {
            return Err(cfg_err("replicates", "must be at least 1"));
        }
        positive("z_max", self.z_max)?;
        let mut prev = 0.0;
        for (i, &c) in self.checkpoints.iter().enumerate() {
            if !(c > prev) {
                return Err(cfg_err(
                    &format!("checkpoints[{i}]"),
                    "checkpoints must be positive and increasing",
                ));
            }
            prev = c;
        }
        if let Some(e) = self.erosion {
            if !(e >= 0.0) {
                return Err(cfg_err("erosion", format!("must be nonnegative, got {e}")));
            }
        }
        let mut prev = 0.0;
        for (i, &r) in self.r_grid.iter().enumerate() {
            if !(r > prev) {
                return Err(cfg_err(
                    &format!("r_grid[{i}]"),
                    "radii must be positive and increasing",
                ));
            }
            prev = r;
        }
        if let Some(h) = self.element_size {
            positive("element_size", h)?;
        }
        for (i, &r) in self.radii.iter().enumerate() {
            positive(&format!("radii[{i}]"), r)?;
        }
        if let Some(s0) = self.s0 {
            if !(s0 > 0.0 && s0 < self.t) {
                return Err(cfg_err("s0", format!("must lie in (0, t), got {s0}")));
            }
        }
        if let Some(u) = self.u {
            positive("u", u)?;
        }
        match self.experiment {
            ExperimentKind::Clt2d | ExperimentKind::Clt3d | ExperimentKind::Increment
                if self.radii.is_empty() =>
            {
                return Err(cfg_err(
                    "radii",
                    format!("required for {}", self.experiment.name()),
                ));
            }
            ExperimentKind::Clt2d if self.dimension != 2 => {
                return Err(cfg_err("dimension", "clt2d needs dimension 2"));
            }
            ExperimentKind::Clt3d if self.dimension != 3 => {
                return Err(cfg_err("dimension", "clt3d needs dimension 3"));
            }
            ExperimentKind::Increment if self.s0.is_none() => {
                return Err(cfg_err("s0", "required for increment"));
            }
            ExperimentKind::IterateTest if self.u.is_none() => {
                return Err(cfg_err("u", "required for iterate-test"));
            }
            _ => {}
        }
        self.build_window()?;
        self.build_measure()?;
        Ok(())
    }

    pub fn build_window(&self) -> Result<Window<f64>> {
        let d = self.dimension;
        let w = match &self.window {
            WindowConfig::Box { lo, hi } => {
                if lo.len() != d || hi.len() != d {
                    return Err(cfg_err(
                        "window",
                        format!("box corners need {d} coordinates"),
                    ));
                }
                Window::polytope(
                    ConvexPolytope::cuboid(lo, hi).map_err(|e| cfg_err("window", e.to_string()))?,
                )
            }
            WindowConfig::Ball { radius, center } => {
                positive("window.radius", *radius)?;
                let c = match center {
                    Some(c) if c.len() != d => {
                        return Err(cfg_err("window.center", format!("needs {d} coordinates")))
                    }
                    Some(c) => Point::from_slice(c),
                    None => Point::zero(),
                };
                Window::ball(d, c, *radius).map_err(|e| cfg_err("window", e.to_string()))?
            }
            WindowConfig::Polytope { vertices, faces } => {
                if vertices.iter().any(|v| v.len() != d) {
                    return Err(cfg_err(
                        "window.vertices",
                        format!("every vertex needs {d} coordinates"),
                    ));
                }
                let repr = PolytopeRepr {
                    dim: d,
                    vertices: vertices.clone(),
                    faces: faces.clone(),
                };
                Window::polytope(
                    ConvexPolytope::try_from(repr).map_err(|e| cfg_err("window", e.to_string()))?,
                )
            }
        };
        Ok(w)
    }

    pub fn build_measure(&self) -> Result<HyperplaneMeasureSpec<f64>> {
        HyperplaneMeasureSpec {
            dim: self.dimension,
            kind: self.measure.clone(),
        }
        .validated()
        .map_err(|e| cfg_err("measure", e.to_string()))
    }

    pub fn run_options(&self, record: bool) -> RunOptions {
        let mut o = if record {
            RunOptions::default()
        } else {
            RunOptions::summary_only()
        };
        if let Some(m) = self.max_cells {
            o.max_cells = m;
        }
        o
    }
}
