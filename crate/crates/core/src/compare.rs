//! Poisson hyperplane tessellations in a window and the asymptotic variance
//! comparison between STIT, Poisson hyperplane and Poisson–Voronoi models.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StitError};
use crate::formulas::{self, pht, WindowShape};
use crate::geometry::{FacetPolygon, Hyperplane, Window};
use crate::measures::{uniform_direction, HyperplaneMeasureSpec, MeasureKind};

/// Hyperplanes of a Poisson process with intensity measure `tΛ` hitting `W`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonTessellation {
    pub window: Window<f64>,
    pub t: f64,
    pub hyperplanes: Vec<Hyperplane<f64>>,
    /// Sections `H ∩ domain`; clip with [`Window::facet_measure`] for `H ∩ W`.
    pub facets: Vec<FacetPolygon<f64>>,
    pub total_surface: f64,
}

/// Simulates the Poisson hyperplane process restricted to `[W]`.
pub fn run_pht<R: Rng + ?Sized>(
    spec: &HyperplaneMeasureSpec<f64>,
    t: f64,
    window: &Window<f64>,
    rng: &mut R,
) -> Result<PoissonTessellation> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(StitError::InvalidArgument(format!(
            "t must be positive, got {t}"
        )));
    }
    if spec.dim != window.dim() {
        return Err(StitError::InvalidArgument(
            "measure and window dimensions differ".into(),
        ));
    }
    let domain = window.domain();
    let tol = window.tolerance();
    let ball_iso = match window {
        Window::Ball { center, radius, .. } if matches!(spec.kind, MeasureKind::Isotropic) => {
            Some((*center, *radius))
        }
        _ => None,
    };
    let mass = match ball_iso {
        Some((_, radius)) => 2.0 * radius,
        None => spec.measure_hitting(&domain),
    };
    let n = if mass > 0.0 {
        Poisson::new(t * mass)
            .map_err(|e| StitError::InvalidArgument(e.to_string()))?
            .sample(rng) as u64
    } else {
        0
    };
    let mut out = PoissonTessellation {
        window: window.clone(),
        t,
        hyperplanes: Vec::with_capacity(n as usize),
        facets: Vec::with_capacity(n as usize),
        total_surface: 0.0,
    };
    for _ in 0..n {
        let h = match ball_iso {
            Some((c, radius)) => {
                let u = uniform_direction::<f64, R>(spec.dim, rng);
                let r = c.dot(&u) + radius * (2.0 * rng.random::<f64>() - 1.0);
                Hyperplane::canonical_unchecked(u, r)
            }
            None => spec.sample_hitting(&domain, rng)?,
        };
        out.hyperplanes.push(h);
        if let Some(f) = domain.section(&h, &tol) {
            let m = window.facet_measure(&f);
            if m > 0.0 {
                out.total_surface += m;
                out.facets.push(f);
            }
        }
    }
    // balls with a non-isotropic measure are handled through the domain; keep
    // only hyperplanes that actually hit W
    if ball_iso.is_none() {
        if let Window::Ball { center, radius, .. } = window {
            out.hyperplanes
                .retain(|h| h.signed_distance(center).abs() < *radius);
        }
    }
    Ok(out)
}

/// Monte Carlo value of `Var Σ = t ∫_{[W]} Vol_{d-1}(H ∩ W)² Λ(dH)` for the
/// Poisson hyperplane tessellation (Campbell's formula).
pub fn surface_variance_mc<R: Rng + ?Sized>(
    spec: &HyperplaneMeasureSpec<f64>,
    t: f64,
    window: &Window<f64>,
    samples: usize,
    rng: &mut R,
) -> Result<formulas::McValue> {
    if samples < 2 {
        return Err(StitError::InvalidArgument("need at least 2 samples".into()));
    }
    let domain = window.domain();
    let tol = window.tolerance();
    let mass = spec.measure_hitting(&domain);
    let mut xs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let h = spec.sample_hitting(&domain, rng)?;
        let a = domain
            .section(&h, &tol)
            .map_or(0.0, |f| window.facet_measure(&f));
        xs.push(a * a);
    }
    let scale = t * mass;
    Ok(formulas::McValue {
        value: scale * crate::stats::mean(&xs),
        std_error: scale * (crate::stats::variance(&xs) / samples as f64).sqrt(),
        samples,
    })
}

/// Row of the asymptotic variance comparison for `W_R = R · B₁^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub dim: usize,
    pub t: f64,
    pub radius: f64,
    /// Leading term of `Var(Vol_{d-1}(·, W_R))`; `None` when no constant is known.
    pub variance: Option<f64>,
    pub growth: String,
    pub provenance: String,
}

/// Leading variance terms of PVT, STIT and PHT in growing balls, at equal
/// surface intensity `t`.
pub fn comparison_table(dim: usize, t: f64, radii: &[f64]) -> Result<Vec<ComparisonRow>> {
    if !(2..=3).contains(&dim) {
        return Err(StitError::InvalidArgument(format!(
            "comparison needs d in {{2, 3}}, got {dim}"
        )));
    }
    let mut rows = Vec::new();
    for &radius in radii {
        let row =
            |model: &str, variance: Option<f64>, growth: &str, provenance: &str| ComparisonRow {
                model: model.into(),
                dim,
                t,
                radius,
                variance,
                growth: growth.into(),
                provenance: provenance.into(),
            };
        if dim == 2 {
            rows.push(row(
                "PVT",
                Some(pht::pvt_variance_planar(radius)),
                "R^2",
                "literature-constant",
            ));
            rows.push(row(
                "STIT",
                Some(formulas::variance_asymptotic(
                    2,
                    WindowShape::UnitBall,
                    radius,
                )?),
                "R^2 log R",
                "analytic",
            ));
        } else {
            rows.push(row("PVT", None, "R^3", "literature-constant"));
            rows.push(row(
                "STIT",
                Some(formulas::variance_asymptotic(
                    3,
                    WindowShape::UnitBall,
                    radius,
                )?),
                "R^4",
                "analytic",
            ));
        }
        let growth = if dim == 2 { "R^3" } else { "R^5" };
        rows.push(row(
            "PHT",
            Some(pht::surface_variance(t, pht::j_ball(dim, radius))),
            growth,
            "analytic",
        ));
    }
    Ok(rows)
}
