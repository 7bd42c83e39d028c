use super::GeometryError;
use crate::scalar::{lit, Real};

/// Isotropized set covariance `γ̄(r) = Vol(B_R ∩ (B_R + r e))` of a ball in
/// d = 2 or 3 dimensions. Zero for `r >= 2R`.
pub fn set_covariance_ball<T: Real>(d: usize, radius: T, r: T) -> Result<T, GeometryError> {
    if !(radius > T::zero()) || r < T::zero() || r.is_nan() {
        return Err(GeometryError::Domain(
            "set covariance needs R > 0 and r >= 0".into(),
        ));
    }
    let two_r = radius * lit(2.0);
    if r >= two_r {
        return Ok(T::zero());
    }
    match d {
        2 => {
            let rr = radius * radius;
            let v = lit::<T>(2.0) * rr * (r / two_r).acos()
                - r * lit(0.5) * (lit::<T>(4.0) * rr - r * r).sqrt();
            Ok(v.max(T::zero()))
        }
        3 => {
            let q = r / radius;
            let v = lit::<T>(4.0 / 3.0)
                * T::PI()
                * radius.powi(3)
                * (T::one() - lit::<T>(0.75) * q + q.powi(3) / lit(16.0));
            Ok(v.max(T::zero()))
        }
        _ => Err(GeometryError::UnsupportedDimension(d)),
    }
}
