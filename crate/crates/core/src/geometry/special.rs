//! Gamma-type special functions.

use super::GeometryError;
use crate::scalar::{from_usize, lit, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < lit(0.5) {
        // reflection
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a: T = lit(LANCZOS[0]);
    let t = x + lit(LANCZOS_G + 0.5);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += lit::<T>(*c) / (x + from_usize(i));
    }
    lit::<T>(0.5) * (T::TAU()).ln() + (x + lit(0.5)) * t.ln() - t + a.ln()
}

/// `Γ(x)`; exact factorials for small positive integers.
pub fn gamma<T: Real>(x: T) -> T {
    if x > T::zero() && x == x.floor() && x <= lit(30.0) {
        let n = x.to_usize().unwrap();
        return (1..n).fold(T::one(), |acc, k| acc * from_usize(k));
    }
    let twice = x + x;
    if x > T::zero() && twice == twice.floor() && x <= lit(30.0) {
        // Γ(n + 1/2) = √π · (1/2)(3/2)…(n - 1/2)
        let n = (x - lit(0.5)).to_usize().unwrap();
        let half: T = lit(0.5);
        return (0..n).fold(T::PI().sqrt(), |acc, k| acc * (from_usize::<T>(k) + half));
    }
    if x < lit(0.5) {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    ln_gamma(x).exp()
}

/// `C(n, k)` as a real number.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(T::one(), |acc, i| {
        acc * from_usize::<T>(n - i) / from_usize(i + 1)
    })
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_lower_gamma<T: Real>(a: T, x: T) -> Result<T, GeometryError> {
    if !(a > T::zero()) {
        return Err(GeometryError::Domain(format!(
            "incomplete gamma needs a > 0, got {a}"
        )));
    }
    if x < T::zero() || x.is_nan() {
        return Err(GeometryError::Domain(format!(
            "incomplete gamma needs x >= 0, got {x}"
        )));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x.is_infinite() {
        return Ok(T::one());
    }
    let eps = T::epsilon();
    let lg = ln_gamma(a);
    if x < a + T::one() {
        let mut ap = a;
        let mut del = T::one() / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += T::one();
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * eps {
                return Ok(sum * (-x + a * x.ln() - lg).exp());
            }
        }
        Err(GeometryError::NonConvergence)
    } else {
        // Lentz continued fraction for Q(a, x)
        let tiny = T::min_positive_value() / eps;
        let mut b = x + T::one() - a;
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..10_000usize {
            let an = -from_usize::<T>(i) * (from_usize::<T>(i) - a);
            b += lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = T::one() / d;
            let del = d * c;
            h *= del;
            if (del - T::one()).abs() < eps {
                let q = (-x + a * x.ln() - lg).exp() * h;
                return Ok(T::one() - q);
            }
        }
        Err(GeometryError::NonConvergence)
    }
}

/// Lower incomplete gamma `γ(a, x) = ∫_0^x s^{a-1} e^{-s} ds`.
pub fn lower_incomplete_gamma<T: Real>(a: T, x: T) -> Result<T, GeometryError> {
    if a > T::zero() && x > T::zero() && x < a + T::one() {
        // the series directly in unregularized form keeps relative accuracy
        // for small x where P(a, x) underflows towards 0
        let mut ap = a;
        let mut del = T::one() / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += T::one();
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * T::epsilon() {
                return Ok(sum * (-x + a * x.ln()).exp());
            }
        }
        return Err(GeometryError::NonConvergence);
    }
    Ok(regularized_lower_gamma(a, x)? * gamma(a))
}

/// `E₁(x) = ∫_1^∞ e^{-xy}/y dy` for `x >= 0` (`+∞` at 0).
pub fn exp_integral_e1<T: Real>(x: T) -> Result<T, GeometryError> {
    if x < T::zero() || x.is_nan() {
        return Err(GeometryError::Domain(format!("E1 needs x >= 0, got {x}")));
    }
    if x == T::zero() {
        return Ok(T::infinity());
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    let eps = T::epsilon();
    if x <= T::one() {
        let mut sum = T::zero();
        let mut term = T::one();
        for k in 1..10_000usize {
            let kk = from_usize::<T>(k);
            term *= -x / kk;
            let add = -term / kk;
            sum += add;
            if add.abs() < sum.abs().max(T::one()) * eps {
                return Ok(-T::euler_gamma() - x.ln() + sum);
            }
        }
        Err(GeometryError::NonConvergence)
    } else {
        let tiny = T::min_positive_value() / eps;
        let mut b = x + T::one();
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..10_000usize {
            let an = -from_usize::<T>(i * i);
            b += lit(2.0);
            d = T::one() / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - T::one()).abs() < eps {
                return Ok(h * (-x).exp());
            }
        }
        Err(GeometryError::NonConvergence)
    }
}
