//! Experiment runners behind the `stitlab` subcommands.
//!
//! Every runner draws replicate `i` from [`seeds::stream`] and aggregates in
//! index order, so reports depend only on the configuration.

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{curve_csv, Provenance, StatReport, StatRow};
use super::seeds::{self, replicate};
use crate::compare::{comparison_table, run_pht, surface_variance_mc};
use crate::error::{Result, StitError};
use crate::estimators::{isegment_sample, k_function_estimate, pcf_from_k};
use crate::formulas::{self, pht};
use crate::geometry::{FacetPolygon, Window};
use crate::measures::{HyperplaneMeasureSpec, MeasureKind};
use crate::mnw::{self, RunOptions, Tessellation};
use crate::stats::{
    aggregate, chi_square_test, ks_critical_001, ks_statistic, normality_diagnostics, poisson_ci,
    ratio_estimate, variance_estimate, EstimateWithError,
};

/// Result of one experiment.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: StatReport,
    /// The realization produced by `simulate`.
    pub tessellation: Option<Tessellation<f64>>,
    /// Extra CSV files `(suffix, contents)`, written as `<stem>_<suffix>.csv`.
    pub curves: Vec<(String, String)>,
}

impl Outcome {
    fn new(report: StatReport) -> Self {
        Self {
            report,
            tessellation: None,
            curves: Vec::new(),
        }
    }
}

/// Runs the experiment named in the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::Simulate => simulate(cfg),
        ExperimentKind::Verify => verify(cfg),
        ExperimentKind::Clt2d => clt2d(cfg),
        ExperimentKind::Clt3d => clt3d(cfg),
        ExperimentKind::Increment => increment(cfg),
        ExperimentKind::IterateTest => iterate_test(cfg),
        ExperimentKind::Compare => compare(cfg),
    }
}

fn new_report(cfg: &ExperimentConfig) -> Result<StatReport> {
    Ok(StatReport::new(
        cfg.experiment.name(),
        serde_json::to_value(cfg)?,
        cfg.z_max,
    ))
}

fn collect<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

/// Master seed for the `k`-th block of replicates (one block per radius).
fn block_seed(seed: u64, k: usize) -> u64 {
    seeds::stream_seed(seed, u64::MAX - k as u64)
}

fn ball_radius(window: &Window<f64>) -> Option<f64> {
    match window {
        Window::Ball { radius, .. } => Some(*radius),
        _ => None,
    }
}

fn isotropic(spec: &HyperplaneMeasureSpec<f64>) -> bool {
    matches!(spec.kind, MeasureKind::Isotropic)
}

/// Exact total-surface variance when a closed form or 1-d integral exists.
fn exact_variance(
    d: usize,
    t: f64,
    window: &Window<f64>,
    spec: &HyperplaneMeasureSpec<f64>,
) -> Result<Option<f64>> {
    if d == 1 {
        // the points form a Poisson process of intensity t·(direction mass)
        return Ok(Some(t * spec.surface_intensity() * window.volume()));
    }
    match ball_radius(window) {
        Some(r) if isotropic(spec) => Ok(Some(formulas::variance_exact_ball(d, t, r)?)),
        _ => Ok(None),
    }
}

/// Default erosion: twice the mean facet diameter (d = 2: the mean I-segment
/// length; d = 3: the diameter of a disk of mean facet area), capped at half
/// the inradius so that `W ⊖ δ` keeps some volume.
pub fn default_erosion(d: usize, t: f64, window: &Window<f64>) -> f64 {
    let delta = match d {
        2 => 2.0 * formulas::mean_vol_ik(2, 1, t),
        3 => 4.0 * (formulas::mean_vol_ik(3, 2, t) / std::f64::consts::PI).sqrt(),
        _ => 0.0,
    };
    delta.min(0.5 * window.inradius())
}

fn erosion(cfg: &ExperimentConfig, window: &Window<f64>) -> f64 {
    let r_max = cfg.r_grid.last().copied().unwrap_or(0.0);
    cfg.erosion
        .unwrap_or_else(|| default_erosion(cfg.dimension, cfg.t, window).max(r_max))
}

fn element_size(cfg: &ExperimentConfig) -> f64 {
    cfg.element_size
        .unwrap_or_else(|| cfg.r_grid.first().copied().unwrap_or(1.0) / 10.0)
}

fn fmt_r(r: f64) -> String {
    format!("{r}")
}

fn run_opts(cfg: &ExperimentConfig, cells: bool, facets: bool) -> RunOptions {
    let mut o = cfg.run_options(false);
    o.record_cells = cells;
    o.record_facets = facets;
    o
}

fn facets_of(y: &Tessellation<f64>) -> Vec<FacetPolygon<f64>> {
    y.i_facets.iter().map(|f| f.facet.clone()).collect()
}

/// K̂ and ĝ rows and curves from per-replicate K̂ values.
fn second_order_rows<F: Fn(f64) -> Result<f64>>(
    report: &mut StatReport,
    outcome_curves: &mut Vec<(String, String)>,
    prefix: &str,
    d: usize,
    r_grid: &[f64],
    per_rep: &[Vec<f64>],
    k_target: F,
) -> Result<()> {
    let mut k_curve = Vec::new();
    for (j, &r) in r_grid.iter().enumerate() {
        let xs: Vec<f64> = per_rep.iter().map(|k| k[j]).collect();
        let e = aggregate(&xs, Some(k_target(r)?));
        k_curve.push((r, e.estimate, e.std_error));
        report.push(StatRow::new(
            format!("{prefix}k_function(r={})", fmt_r(r)),
            e,
            Provenance::Analytic,
        ));
    }
    let kd = formulas::kappa::<f64>(d);
    let mut g_curve = Vec::new();
    for j in 1..r_grid.len() {
        let (r0, r1) = (r_grid[j - 1], r_grid[j]);
        let shell = kd * (r1.powi(d as i32) - r0.powi(d as i32));
        let xs: Vec<f64> = per_rep
            .iter()
            .map(|k| pcf_from_k(d, &[(r0, k[j - 1]), (r1, k[j])])[0].1)
            .collect();
        let target = (k_target(r1)? - k_target(r0)?) / shell;
        let e = aggregate(&xs, Some(target));
        let mid = 0.5 * (r0 + r1);
        g_curve.push((mid, e.estimate, e.std_error));
        report.push(StatRow::new(
            format!("{prefix}pair_correlation(r={})", fmt_r(mid)),
            e,
            Provenance::Analytic,
        ));
    }
    outcome_curves.push((format!("{prefix}k"), curve_csv("r,k,std_error", &k_curve)));
    outcome_curves.push((format!("{prefix}pcf"), curve_csv("r,g,std_error", &g_curve)));
    Ok(())
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let window = cfg.build_window()?;
    let spec = cfg.build_measure()?;
    let mut rng = seeds::stream(cfg.seed, 0);
    let y = mnw::run(
        &spec,
        cfg.t,
        &window,
        &cfg.checkpoints,
        &cfg.run_options(true),
        &mut rng,
    )?;
    let mut report = new_report(cfg)?;
    let exact = |x: f64| EstimateWithError::new(x, 0.0, 1, None);
    report.push(StatRow::new(
        "total_surface",
        exact(y.summary.total_surface),
        Provenance::Mc,
    ));
    report.push(StatRow::new(
        "cell_count",
        exact(y.summary.cell_count as f64),
        Provenance::Mc,
    ));
    report.push(StatRow::new(
        "i_facet_count",
        exact(y.summary.facet_count as f64),
        Provenance::Mc,
    ));
    report.push(StatRow::new(
        "vertex_count",
        exact(y.summary.interior_vertex_count as f64),
        Provenance::Mc,
    ));
    for c in &y.checkpoints {
        report.push(StatRow::new(
            format!("surface(s={})", fmt_r(c.time)),
            exact(c.surface),
            Provenance::Mc,
        ));
    }
    report.total_cells = y.summary.cell_count;
    let mut out = Outcome::new(report);
    out.tessellation = Some(y);
    Ok(out)
}

#[derive(Default)]
struct VerifyRep {
    surface: f64,
    vertices: f64,
    ref_facets: f64,
    cells: u64,
    // fully observed minus-sampled facets
    full_sum: f64,
    full_count: f64,
    full_sizes: Vec<f64>,
    k: Vec<f64>,
}

/// χ² goodness of fit of integer counts to Poisson(`mu`); cells with expected
/// count below 5 are pooled into the neighbouring cell.
fn poisson_fit(counts: &[f64], mu: f64) -> (f64, f64) {
    use statrs::distribution::{Discrete, DiscreteCDF, Poisson};
    let n = counts.len() as f64;
    let law = Poisson::new(mu).expect("positive mean");
    let kmax = counts.iter().cloned().fold(0.0, f64::max) as u64 + 1;
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o, mut e) = (0.0, 0.0);
    for k in 0..=kmax {
        o += counts.iter().filter(|c| **c as u64 == k).count() as f64;
        e += if k == kmax {
            n * law.sf(k - 1)
        } else {
            n * law.pmf(k)
        };
        if e >= 5.0 {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
        *lo += o;
        *le += e;
    }
    if obs.len() < 2 {
        return (0.0, 1.0);
    }
    chi_square_test(&obs, &exp)
}

fn verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.dimension;
    let t = cfg.t;
    let window = cfg.build_window()?;
    let spec = cfg.build_measure()?;
    let vol = window.volume();
    let iso = isotropic(&spec);
    let delta = erosion(cfg, &window);
    let h = element_size(cfg);
    let want_k = d >= 2 && !cfg.r_grid.is_empty();
    let opts = run_opts(cfg, false, d >= 2);
    let reps = collect(replicate(
        cfg.replicates,
        cfg.seed,
        |_, rng| -> Result<VerifyRep> {
            let y = mnw::run(&spec, t, &window, &[], &opts, rng)?;
            let mut r = VerifyRep {
                surface: y.summary.total_surface,
                vertices: y.summary.interior_vertex_count as f64,
                ref_facets: y.summary.reference_facet_count as f64,
                cells: y.summary.cell_count,
                ..Default::default()
            };
            if d >= 2 {
                match isegment_sample(&y, delta) {
                    Ok(s) => {
                        r.full_sizes = s.fully_observed();
                        r.full_sum = r.full_sizes.iter().sum();
                        r.full_count = r.full_sizes.len() as f64;
                    }
                    Err(StitError::EmptySample) => {}
                    Err(e) => return Err(e),
                }
            }
            if want_k {
                let k = k_function_estimate(&facets_of(&y), &window, t, &cfg.r_grid, delta, h)?;
                r.k = k.into_iter().map(|(_, v)| v).collect();
            }
            Ok(r)
        },
    ))?;
    let mut report = new_report(cfg)?;
    let mut out_curves = Vec::new();
    report.total_cells = reps.iter().map(|r| r.cells).sum();
    let n = reps.len();
    let surface: Vec<f64> = reps.iter().map(|r| r.surface).collect();
    let si = t * spec.surface_intensity();
    report.push(StatRow::new(
        "surface_mean",
        aggregate(&surface, Some(si * vol)),
        Provenance::Analytic,
    ));
    if n >= 2 {
        let target = exact_variance(d, t, &window, &spec)?;
        report.push(StatRow::new(
            "surface_variance",
            variance_estimate(&surface, target),
            Provenance::Analytic,
        ));
    }
    let facet_int: Vec<f64> = reps.iter().map(|r| r.ref_facets / vol).collect();
    if d == 1 {
        report.push(StatRow::new(
            "point_intensity",
            aggregate(&facet_int, Some(si)),
            Provenance::Analytic,
        ));
        // the pooled count is Poisson(n t Vol) exactly
        let k: f64 = surface.iter().sum();
        let expected = n as f64 * si * vol;
        let (lo, hi) = poisson_ci(k as u64, 0.01);
        report.verdict(
            "poisson_count_exact_ci",
            lo <= expected && expected <= hi,
            format!("pooled count {k}, expected {expected}, 99% interval [{lo:.3}, {hi:.3}]"),
        );
        if n >= 50 {
            let (stat, p) = poisson_fit(&surface, si * vol);
            report.verdict(
                "poisson_count_chi_square",
                p > 0.01,
                format!("chi-square {stat:.3}, p = {p:.4}"),
            );
        }
        return Ok(Outcome::new(report));
    }
    if iso {
        let vert: Vec<f64> = reps.iter().map(|r| r.vertices / vol).collect();
        report.push(StatRow::new(
            "vertex_intensity",
            aggregate(&vert, Some(formulas::intensity_nki(d, 0, t))),
            Provenance::Analytic,
        ));
        report.push(StatRow::new(
            "facet_intensity",
            aggregate(&facet_int, Some(formulas::intensity_nki(d, d - 1, t))),
            Provenance::Analytic,
        ));
        let refs: Vec<f64> = reps.iter().map(|r| r.ref_facets).collect();
        // total surface per reference-counted facet: both sides are unbiased
        // for their intensities, so the ratio is consistent for the mean size
        let per_vol: Vec<f64> = surface.iter().map(|s| s / vol).collect();
        let refs_per_vol: Vec<f64> = refs.iter().map(|c| c / vol).collect();
        report.push(StatRow::new(
            "mean_facet_size",
            ratio_estimate(
                &per_vol,
                &refs_per_vol,
                Some(formulas::mean_vol_ik(d, d - 1, t)),
            ),
            Provenance::Analytic,
        ));
    }
    let counts: Vec<f64> = reps.iter().map(|r| r.full_count).collect();
    let pooled: Vec<f64> = reps
        .iter()
        .flat_map(|r| r.full_sizes.iter().copied())
        .collect();
    if !pooled.is_empty() && counts.iter().filter(|c| **c > 0.0).count() >= 2 {
        let sums: Vec<f64> = reps.iter().map(|r| r.full_sum).collect();
        let target = if d == 2 && iso {
            Some(formulas::isegment_truncated_mean(2, t, delta)?)
        } else {
            None
        };
        report.push(StatRow::new(
            "truncated_mean_facet_size",
            ratio_estimate(&sums, &counts, target),
            Provenance::Analytic,
        ));
        if d == 2 && iso {
            let mass = formulas::isegment_cdf(2, t, delta)?;
            let dist = ks_statistic(&pooled, |x| {
                formulas::isegment_cdf(2, t, x.min(delta)).map_or(f64::NAN, |f| f / mass)
            });
            let crit = ks_critical_001(pooled.len());
            report.verdict(
                "isegment_length_ks",
                dist <= crit,
                format!(
                    "D = {dist:.6}, critical(0.01) = {crit:.6}, n = {}, delta = {delta}",
                    pooled.len()
                ),
            );
        }
    }
    if want_k && iso {
        let per_rep: Vec<Vec<f64>> = reps.iter().map(|r| r.k.clone()).collect();
        second_order_rows(
            &mut report,
            &mut out_curves,
            "",
            d,
            &cfg.r_grid,
            &per_rep,
            |r| Ok(formulas::k_function(d, t, r)?),
        )?;
    }
    let mut out = Outcome::new(report);
    out.curves = out_curves;
    Ok(out)
}

/// Surface totals of `Y(t, R·W)` (plus checkpoint values) for each radius.
fn radius_runs(
    cfg: &ExperimentConfig,
    window: &Window<f64>,
    spec: &HyperplaneMeasureSpec<f64>,
    checkpoints: &[f64],
) -> Result<Vec<(Vec<(f64, Vec<f64>)>, u64)>> {
    let opts = run_opts(cfg, false, false);
    cfg.radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let w = window.scaled(r);
            let runs = collect(replicate(
                cfg.replicates,
                block_seed(cfg.seed, k),
                |_, rng| {
                    let y = mnw::run(spec, cfg.t, &w, checkpoints, &opts, rng)?;
                    let cps = y.checkpoints.iter().map(|c| c.surface).collect::<Vec<_>>();
                    Ok((y.summary.total_surface, cps, y.summary.cell_count))
                },
            ))?;
            let cells = runs.iter().map(|r| r.2).sum();
            Ok((runs.into_iter().map(|(s, c, _)| (s, c)).collect(), cells))
        })
        .collect()
}

fn normality_rows(
    report: &mut StatReport,
    label: &str,
    xs: &[f64],
) -> crate::stats::NormalityDiagnostics {
    let nd = normality_diagnostics(xs);
    let n = xs.len();
    report.push(StatRow::new(
        format!("skewness({label})"),
        EstimateWithError::new(nd.skewness.unwrap_or(f64::NAN), nd.skewness_se, n, None),
        Provenance::Mc,
    ));
    report.push(StatRow::new(
        format!("excess_kurtosis({label})"),
        EstimateWithError::new(
            nd.excess_kurtosis.unwrap_or(f64::NAN),
            (24.0 / n as f64).sqrt(),
            n,
            None,
        ),
        Provenance::Mc,
    ));
    nd
}

fn clt2d(cfg: &ExperimentConfig) -> Result<Outcome> {
    let window = cfg.build_window()?;
    let spec = cfg.build_measure()?;
    let mut report = new_report(cfg)?;
    let asym = std::f64::consts::PI * window.volume();
    let blocks = radius_runs(cfg, &window, &spec, &[])?;
    let mut last = None;
    for (&r, (runs, cells)) in cfg.radii.iter().zip(&blocks) {
        report.total_cells += cells;
        let xs: Vec<f64> = runs.iter().map(|(s, _)| *s).collect();
        let norm = r * r * r.ln();
        let target = if isotropic(&spec) {
            exact_variance(2, cfg.t, &window.scaled(r), &spec)?.map(|v| v / norm)
        } else {
            None
        };
        let v = variance_estimate(&xs, None);
        let e = EstimateWithError::new(v.estimate / norm, v.std_error / norm, v.replicates, target);
        report.push(StatRow::new(
            format!("variance_over_r2_log_r(R={})", fmt_r(r)),
            e,
            Provenance::Analytic,
        ));
        let label = format!("R={}", fmt_r(r));
        let nd = normality_rows(&mut report, &label, &xs);
        report.verdict(
            format!("ks_normal({label})"),
            nd.ks_passes(),
            format!(
                "D = {:.6}, Lilliefors critical(0.01) = {:.6}",
                nd.ks_statistic, nd.ks_critical_lilliefors
            ),
        );
        last = Some((r, e.estimate, nd));
    }
    if let Some((r, slope, nd)) = last {
        let rel = (slope - asym) / asym;
        report.verdict(
            format!("slope_within_15_percent(R={})", fmt_r(r)),
            rel.abs() <= 0.15,
            format!("Var/(R^2 log R) = {slope:.6}, limit pi*Vol(W) = {asym:.6}, relative deviation {rel:.4}"),
        );
        let g = nd.skewness.unwrap_or(f64::NAN);
        report.verdict(
            format!("skewness_within_0.2(R={})", fmt_r(r)),
            g.abs() <= 0.2,
            format!("skewness {g:.4} (standard error {:.4})", nd.skewness_se),
        );
    }
    Ok(Outcome::new(report))
}

/// `Var Ξ(W)` for the unit window: closed form for isotropic balls, otherwise
/// Monte Carlo.
fn xi_target(
    cfg: &ExperimentConfig,
    window: &Window<f64>,
    spec: &HyperplaneMeasureSpec<f64>,
) -> Result<(f64, Provenance)> {
    if let (Some(r), true) = (ball_radius(window), isotropic(spec)) {
        let e2 = formulas::energy2_from_chord(3, formulas::chord_power_ball::<f64>(3));
        return Ok((
            formulas::xi_variance_isotropic(3, e2) * r.powi(4),
            Provenance::Analytic,
        ));
    }
    let mut rng = seeds::stream(block_seed(cfg.seed, usize::MAX >> 1), 0);
    let v = formulas::xi_variance_mc(spec, window, 400_000, &mut rng)?;
    Ok((v.value, Provenance::Mc))
}

fn clt3d(cfg: &ExperimentConfig) -> Result<Outcome> {
    let window = cfg.build_window()?;
    let spec = cfg.build_measure()?;
    let mut report = new_report(cfg)?;
    let (xi_var, xi_prov) = xi_target(cfg, &window, &spec)?;
    let blocks = radius_runs(cfg, &window, &spec, &[])?;
    let mut last = None;
    for (k, (&r, (runs, cells))) in cfg.radii.iter().zip(&blocks).enumerate() {
        report.total_cells += cells;
        let xs: Vec<f64> = runs.iter().map(|(s, _)| *s / (r * r)).collect();
        let label = format!("R={}", fmt_r(r));
        // Var Σ(Y(t, R·W)) / R⁴ = Var Σ(Y(tR, W)): closed form for isotropic
        // balls, Monte Carlo integral otherwise
        let (target, prov) = if isotropic(&spec) && ball_radius(&window).is_some() {
            let v = exact_variance(3, cfg.t, &window.scaled(r), &spec)?.unwrap();
            (v / r.powi(4), Provenance::Analytic)
        } else {
            let mut rng = seeds::stream(block_seed(cfg.seed, usize::MAX >> 1), 1 + k as u64);
            let v = formulas::surface_variance_mc(&spec, &window, cfg.t * r, 400_000, &mut rng)?;
            (v.value, Provenance::Mc)
        };
        report.push(StatRow::new(
            format!("xi_proxy_variance({label})"),
            variance_estimate(&xs, Some(target)),
            prov,
        ));
        let nd = normality_rows(&mut report, &label, &xs);
        last = Some((label, nd));
    }
    report.verdict(
        "xi_variance_limit",
        true,
        format!("Var Xi(W) = {xi_var:.6} ({})", xi_prov.as_str()),
    );
    if let Some((label, nd)) = last {
        let g = nd.skewness.unwrap_or(f64::NAN);
        report.verdict(
            format!("right_skewed({label})"),
            nd.significantly_right_skewed(),
            format!(
                "skewness {g:.4}, z = {:.3}, one-sided critical 2.326",
                g / nd.skewness_se
            ),
        );
    }
    Ok(Outcome::new(report))
}

/// `V_W ∫_{s0}^{t} s^{1-d} ds` for the isotropic measure.
fn increment_target(d: usize, volume: f64, s0: f64, t: f64) -> f64 {
    formulas::increment_variance_target(d, volume, s0)
        - formulas::increment_variance_target(d, volume, t)
}

fn increment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.dimension;
    let window = cfg.build_window()?;
    let spec = cfg.build_measure()?;
    let s0 = cfg.s0.expect("validated");
    let t = cfg.t;
    let mut report = new_report(cfg)?;
    let iso = isotropic(&spec);
    let blocks = radius_runs(cfg, &window, &spec, &[s0])?;
    for (&r, (runs, cells)) in cfg.radii.iter().zip(&blocks) {
        report.total_cells += cells;
        let wr = window.scaled(r);
        let norm = r.powf(d as f64 / 2.0);
        let drift = (t - s0) * spec.surface_intensity() * wr.volume();
        let xs: Vec<f64> = runs
            .iter()
            .map(|(s, c)| (s - c[0] - drift) / norm)
            .collect();
        let label = format!("R={}", fmt_r(r));
        report.push(StatRow::new(
            format!("increment_mean({label})"),
            aggregate(&xs, Some(0.0)),
            Provenance::Analytic,
        ));
        let limit = iso.then(|| increment_target(d, window.volume(), s0, t));
        report.push(StatRow::new(
            format!("increment_variance({label})"),
            variance_estimate(&xs, limit),
            Provenance::Analytic,
        ));
        if iso && ball_radius(&window).is_some() {
            // the centered surface process is a martingale: increments are
            // orthogonal to the past
            let v1 = exact_variance(d, t, &wr, &spec)?.unwrap();
            let v0 = exact_variance(d, s0, &wr, &spec)?.unwrap();
            report.push(StatRow::new(
                format!("increment_variance_finite_window({label})"),
                variance_estimate(&xs, Some((v1 - v0) / (norm * norm))),
                Provenance::Analytic,
            ));
        }
        let nd = normality_rows(&mut report, &label, &xs);
        report.verdict(
            format!("increment_ks_normal({label})"),
            nd.ks_passes(),
            format!(
                "D = {:.6}, Lilliefors critical(0.01) = {:.6}",
                nd.ks_statistic, nd.ks_critical_lilliefors
            ),
        );
    }
    Ok(Outcome::new(report))
}

fn difference(a: &EstimateWithError, b: &EstimateWithError) -> EstimateWithError {
    EstimateWithError::new(
        a.estimate - b.estimate,
        (a.std_error.powi(2) + b.std_error.powi(2)).sqrt(),
        a.replicates.min(b.replicates),
        Some(0.0),
    )
}

fn iterate_test(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.dimension;
    let window = cfg.build_window()?;
    let spec = cfg.build_measure()?;
    let s = cfg.t;
    let u = cfg.u.expect("validated");
    let total = s + u;
    let half = window.scaled(0.5);
    let frame = run_opts(cfg, true, false);
    let plain = run_opts(cfg, false, false);
    let reps = collect(replicate(
        cfg.replicates,
        cfg.seed,
        |_, rng| -> Result<(f64, f64, f64, u64)> {
            let y1 = mnw::run(&spec, s, &window, &[], &frame, rng)?;
            let a = mnw::iterate(&y1, &spec, u, &[], &plain, rng)?;
            let b = mnw::run(&spec, total, &window, &[], &plain, rng)?;
            // 2·(Y(T, W/2) ⊞ Y(T)) = 2·Y(2T, W/2) ≐ Y(T, W)
            let h1 = mnw::run(&spec, total, &half, &[], &frame, rng)?;
            let h2 = mnw::iterate(&h1, &spec, total, &[], &frame, rng)?;
            let c = mnw::rescale(&h2, 2.0)?;
            let cells = y1.summary.cell_count
                + a.summary.cell_count
                + b.summary.cell_count
                + h2.summary.cell_count;
            Ok((
                a.summary.total_surface,
                b.summary.total_surface,
                c.summary.total_surface,
                cells,
            ))
        },
    ))?;
    let mut report = new_report(cfg)?;
    report.total_cells = reps.iter().map(|r| r.3).sum();
    let a: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let b: Vec<f64> = reps.iter().map(|r| r.1).collect();
    let c: Vec<f64> = reps.iter().map(|r| r.2).collect();
    let mean_target = total * spec.surface_intensity() * window.volume();
    let var_target = exact_variance(d, total, &window, &spec)?;
    let (ma, mb, mc) = (
        aggregate(&a, Some(mean_target)),
        aggregate(&b, Some(mean_target)),
        aggregate(&c, Some(mean_target)),
    );
    let (va, vb, vc) = (
        variance_estimate(&a, var_target),
        variance_estimate(&b, var_target),
        variance_estimate(&c, var_target),
    );
    report.push(StatRow::new("iterated_mean", ma, Provenance::Analytic));
    report.push(StatRow::new("direct_mean", mb, Provenance::Analytic));
    report.push(StatRow::new("rescaled_mean", mc, Provenance::Analytic));
    report.push(StatRow::new(
        "iterated_minus_direct_mean",
        difference(&ma, &mb),
        Provenance::Mc,
    ));
    report.push(StatRow::new(
        "rescaled_minus_direct_mean",
        difference(&mc, &mb),
        Provenance::Mc,
    ));
    report.push(StatRow::new("iterated_variance", va, Provenance::Analytic));
    report.push(StatRow::new("direct_variance", vb, Provenance::Analytic));
    report.push(StatRow::new("rescaled_variance", vc, Provenance::Analytic));
    report.push(StatRow::new(
        "iterated_minus_direct_variance",
        difference(&va, &vb),
        Provenance::Mc,
    ));
    report.push(StatRow::new(
        "rescaled_minus_direct_variance",
        difference(&vc, &vb),
        Provenance::Mc,
    ));
    if d == 1 {
        let n = a.len() as f64;
        let expected = n * mean_target;
        for (name, xs) in [("iterated", &a), ("direct", &b)] {
            let k: f64 = xs.iter().sum();
            let (lo, hi) = poisson_ci(k as u64, 0.01);
            report.verdict(
                format!("{name}_poisson_exact_ci"),
                lo <= expected && expected <= hi,
                format!("pooled count {k}, expected {expected}, 99% interval [{lo:.3}, {hi:.3}]"),
            );
        }
    }
    Ok(Outcome::new(report))
}

fn compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.dimension;
    let t = cfg.t;
    let window = cfg.build_window()?;
    let spec = cfg.build_measure()?;
    let vol = window.volume();
    let delta = erosion(cfg, &window);
    let h = element_size(cfg);
    let want_k = d >= 2 && !cfg.r_grid.is_empty();
    let reps = collect(replicate(
        cfg.replicates,
        cfg.seed,
        |_, rng| -> Result<(f64, f64, Vec<f64>)> {
            let y = run_pht(&spec, t, &window, rng)?;
            let k = if want_k {
                k_function_estimate(&y.facets, &window, t, &cfg.r_grid, delta, h)?
                    .into_iter()
                    .map(|(_, v)| v)
                    .collect()
            } else {
                Vec::new()
            };
            Ok((y.hyperplanes.len() as f64, y.total_surface, k))
        },
    ))?;
    let mut report = new_report(cfg)?;
    let mut curves = Vec::new();
    let counts: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let surface: Vec<f64> = reps.iter().map(|r| r.1).collect();
    let hit = match &window {
        Window::Ball { radius, .. } => 2.0 * radius * spec.surface_intensity(),
        Window::Polytope { polytope } => spec.measure_hitting(polytope),
    };
    report.push(StatRow::new(
        "pht_hyperplane_count_mean",
        aggregate(&counts, Some(t * hit)),
        Provenance::Analytic,
    ));
    report.push(StatRow::new(
        "pht_surface_mean",
        aggregate(&surface, Some(t * spec.surface_intensity() * vol)),
        Provenance::Analytic,
    ));
    if reps.len() >= 2 {
        let (target, prov) = match ball_radius(&window) {
            Some(r) if isotropic(&spec) && d >= 2 => (
                pht::surface_variance(t, pht::j_ball(d, r)),
                Provenance::Analytic,
            ),
            _ => {
                let mut rng = seeds::stream(block_seed(cfg.seed, usize::MAX >> 1), 0);
                (
                    surface_variance_mc(&spec, t, &window, 200_000, &mut rng)?.value,
                    Provenance::Mc,
                )
            }
        };
        report.push(StatRow::new(
            "pht_surface_variance",
            variance_estimate(&surface, Some(target)),
            prov,
        ));
    }
    if want_k {
        let per_rep: Vec<Vec<f64>> = reps.iter().map(|r| r.2.clone()).collect();
        second_order_rows(
            &mut report,
            &mut curves,
            "pht_",
            d,
            &cfg.r_grid,
            &per_rep,
            |r| Ok(pht::k_function(d, t, r)),
        )?;
    }
    if (2..=3).contains(&d) && !cfg.radii.is_empty() {
        let table = comparison_table(d, t, &cfg.radii)?;
        let mut csv = String::from("model,dim,t,radius,variance,growth,provenance\n");
        for row in &table {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.model,
                row.dim,
                super::report::fmt_f64(row.t),
                super::report::fmt_f64(row.radius),
                row.variance.map(super::report::fmt_f64).unwrap_or_default(),
                row.growth,
                row.provenance
            ));
        }
        curves.push(("table".into(), csv));
    }
    let mut out = Outcome::new(report);
    out.curves = curves;
    Ok(out)
}
