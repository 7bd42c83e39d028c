//! Statistic reports: fixed-column CSV and JSON.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::EstimateWithError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Target from a closed form or its numerical evaluation.
    Analytic,
    /// Target is a published numerical constant.
    LiteratureConstant,
    /// Target is itself a Monte Carlo value.
    Mc,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::LiteratureConstant => "literature-constant",
            Provenance::Mc => "mc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub statistic: String,
    pub estimate: f64,
    pub std_error: f64,
    pub target: Option<f64>,
    pub z: Option<f64>,
    pub replicates: usize,
    pub provenance: Provenance,
}

impl StatRow {
    pub fn new(statistic: impl Into<String>, e: EstimateWithError, provenance: Provenance) -> Self {
        Self {
            statistic: statistic.into(),
            estimate: e.estimate,
            std_error: e.std_error,
            target: e.target,
            z: e.z,
            replicates: e.replicates,
            provenance,
        }
    }
}

/// A named pass/fail check that is not a z-score (KS tests, tolerances).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub experiment: String,
    pub config: serde_json::Value,
    pub rows: Vec<StatRow>,
    pub verdicts: Vec<Verdict>,
    pub z_max: f64,
    /// All rows with a target have `|z| <= z_max`.
    pub all_within_z_max: bool,
    /// Deterministic size metrics (wall clock goes to a separate file).
    pub total_cells: u64,
}

/// Non-deterministic run metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub total_cells: u64,
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

impl StatReport {
    pub fn new(experiment: &str, config: serde_json::Value, z_max: f64) -> Self {
        Self {
            experiment: experiment.into(),
            config,
            rows: Vec::new(),
            verdicts: Vec::new(),
            z_max,
            all_within_z_max: true,
            total_cells: 0,
        }
    }

    pub fn push(&mut self, row: StatRow) {
        if let Some(z) = row.z {
            if !(z.abs() <= self.z_max) {
                self.all_within_z_max = false;
            }
        }
        self.rows.push(row);
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn row(&self, statistic: &str) -> Option<&StatRow> {
        self.rows.iter().find(|r| r.statistic == statistic)
    }

    pub fn verdict_named(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("statistic,estimate,std_error,target,z,replicates,provenance\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.statistic,
                fmt_f64(r.estimate),
                fmt_f64(r.std_error),
                fmt_opt(r.target),
                fmt_opt(r.z),
                r.replicates,
                r.provenance.as_str()
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json())?;
        Ok(())
    }
}

/// `(r, value, std_error)` curve as CSV.
pub fn curve_csv(header: &str, rows: &[(f64, f64, f64)]) -> String {
    let mut s = format!("{header}\n");
    for (r, v, e) in rows {
        let _ = writeln!(s, "{},{},{}", fmt_f64(*r), fmt_f64(*v), fmt_f64(*e));
    }
    s
}
