//! Replicate aggregation and goodness-of-fit helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Point estimate with standard error and optional analytic target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub estimate: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub target: Option<f64>,
    pub z: Option<f64>,
}

impl EstimateWithError {
    pub fn new(estimate: f64, std_error: f64, replicates: usize, target: Option<f64>) -> Self {
        let z = target.map(|t| z_score(estimate, t, std_error));
        Self {
            estimate,
            std_error,
            replicates,
            target,
            z,
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self.z = Some(z_score(self.estimate, target, self.std_error));
        self
    }

    /// `|z| <= z_max` (true when there is no target).
    pub fn passes(&self, z_max: f64) -> bool {
        self.z.map_or(true, |z| z.abs() <= z_max)
    }
}

fn z_score(est: f64, target: f64, se: f64) -> f64 {
    if se > 0.0 {
        (est - target) / se
    } else if est == target {
        0.0
    } else {
        f64::INFINITY.copysign(est - target)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// Sample mean with standard error `s/√n`.
pub fn aggregate(xs: &[f64], target: Option<f64>) -> EstimateWithError {
    let n = xs.len();
    let se = if n >= 2 {
        (variance(xs) / n as f64).sqrt()
    } else {
        f64::NAN
    };
    EstimateWithError::new(mean(xs), se, n, target)
}

/// Sample variance with the moment-based standard error
/// `√((m₄ − s⁴ (n−3)/(n−1)) / n)`.
pub fn variance_estimate(xs: &[f64], target: Option<f64>) -> EstimateWithError {
    let n = xs.len();
    let s2 = variance(xs);
    let m = mean(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
    let nf = n as f64;
    let var_s2 = ((m4 - s2 * s2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0);
    EstimateWithError::new(s2, var_s2.sqrt(), n, target)
}

/// Ratio `Σ num / Σ den` with a linearization (delta method) standard error.
pub fn ratio_estimate(num: &[f64], den: &[f64], target: Option<f64>) -> EstimateWithError {
    let n = num.len();
    let r = num.iter().sum::<f64>() / den.iter().sum::<f64>();
    let dbar = mean(den);
    let resid: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - r * b).collect();
    let se =
        (resid.iter().map(|z| z * z).sum::<f64>() / (n as f64 * (n as f64 - 1.0))).sqrt() / dbar;
    EstimateWithError::new(r, se, n, target)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityDiagnostics {
    /// `None` when the sample has zero spread.
    pub skewness: Option<f64>,
    pub skewness_se: f64,
    pub excess_kurtosis: Option<f64>,
    /// KS distance of the standardized sample to N(0, 1).
    pub ks_statistic: f64,
    /// Kolmogorov p-value (conservative because mean and spread are estimated).
    pub ks_p_value: f64,
    /// α = 0.01 critical value for KS with estimated parameters (Lilliefors).
    pub ks_critical_lilliefors: f64,
}

impl NormalityDiagnostics {
    pub fn ks_passes(&self) -> bool {
        self.ks_statistic <= self.ks_critical_lilliefors
    }

    /// One-sided test of positive skewness at level α = 0.01.
    pub fn significantly_right_skewed(&self) -> bool {
        self.skewness
            .is_some_and(|g| g / self.skewness_se > 2.326_347_874)
    }
}

/// Standard error of the sample skewness of a normal sample of size `n`.
pub fn skewness_se(n: usize) -> f64 {
    let n = n as f64;
    (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt()
}

pub fn normality_diagnostics(xs: &[f64]) -> NormalityDiagnostics {
    let n = xs.len();
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n as f64;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
    let spread = m2 > 0.0 && m2.is_finite();
    let sd = variance(xs).sqrt();
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let (d, p) = if spread {
        let z: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
        let d = ks_statistic(&z, |v| std_normal.cdf(v));
        (d, kolmogorov_p(d, n))
    } else {
        (f64::NAN, f64::NAN)
    };
    NormalityDiagnostics {
        skewness: spread.then(|| m3 / m2.powf(1.5)),
        skewness_se: skewness_se(n),
        excess_kurtosis: spread.then(|| m4 / (m2 * m2) - 3.0),
        ks_statistic: d,
        ks_p_value: p,
        ks_critical_lilliefors: 1.031 / (n as f64).sqrt(),
    }
}

/// `sup |F_n − F|` for the sample `xs` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value of KS distance `d` for sample size `n`.
pub fn kolmogorov_p(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Asymptotic KS critical value at α = 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// Exact (Garwood) two-sided confidence interval for a Poisson mean given `k` events.
pub fn poisson_ci(k: u64, alpha: f64) -> (f64, f64) {
    let lo = if k == 0 {
        0.0
    } else {
        ChiSquared::new(2.0 * k as f64)
            .unwrap()
            .inverse_cdf(alpha / 2.0)
            / 2.0
    };
    let hi = ChiSquared::new(2.0 * (k + 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - alpha / 2.0)
        / 2.0;
    (lo, hi)
}

/// Pearson χ² statistic and p-value for observed counts against expected counts.
pub fn chi_square_test(observed: &[f64], expected: &[f64]) -> (f64, f64) {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = (observed.len() - 1) as f64;
    (stat, 1.0 - ChiSquared::new(dof).unwrap().cdf(stat))
}

/// Two-sample z statistic for the difference of two estimates.
pub fn difference_z(a: &EstimateWithError, b: &EstimateWithError) -> f64 {
    (a.estimate - b.estimate) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples() {
        let xs = vec![2.0; 10];
        let e = aggregate(&xs, Some(2.0));
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.z, Some(0.0));
        let nd = normality_diagnostics(&xs);
        assert!(nd.skewness.is_none());
    }

    #[test]
    fn ratio_of_proportional_samples_is_exact() {
        let den = [1.0, 2.0, 3.0, 4.0];
        let num: Vec<f64> = den.iter().map(|d| 2.5 * d).collect();
        let r = ratio_estimate(&num, &den, Some(2.5));
        assert!((r.estimate - 2.5).abs() < 1e-15);
        assert!(r.std_error < 1e-15);
    }

    #[test]
    fn kolmogorov_tail() {
        // λ = 1.6276 is the 1% point
        let n = 10_000;
        let d = 1.6276 / (n as f64).sqrt();
        let p = kolmogorov_p(d, n);
        assert!((p - 0.01).abs() < 1e-3, "{p}");
    }

    #[test]
    fn poisson_interval_known_values() {
        let (lo, hi) = poisson_ci(10, 0.05);
        assert!((lo - 4.795_389).abs() < 1e-5);
        assert!((hi - 18.390_356).abs() < 1e-5);
        assert_eq!(poisson_ci(0, 0.05).0, 0.0);
    }

    #[test]
    fn skewness_se_large_n() {
        assert!((skewness_se(1000) - (6.0f64 / 1000.0).sqrt()).abs() < 2e-3);
    }
}
