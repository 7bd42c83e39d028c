//! Closed-form mean values, moments and second-order characteristics of
//! stationary isotropic STIT tessellations with surface intensity `t`, plus
//! the Poisson hyperplane counterparts used for comparison.
//!
//! Dimensions: `d` is the space dimension, `k` a face dimension and `j` the
//! index of an intrinsic volume. Conditions on `(d, k, j)` are checked with
//! `debug_assert!`; moments that do not exist are reported through
//! [`FormulaResult::exists`].

use rand::Rng;
use serde::Serialize;

use crate::geometry::quad::{quad_1d, quad_to_infinity};
use crate::geometry::special::{binomial, exp_integral_e1, gamma, lower_incomplete_gamma};
use crate::geometry::{set_covariance_ball, GeometryError, Hyperplane, Point, Window};
use crate::measures::{uniform_direction, HyperplaneMeasureSpec};
use crate::scalar::{from_usize, lit, Real};

/// Planar Poisson–Voronoi edge-length variance constant (published numerical value).
pub const PVT_TAU_1_2: f64 = 1.044_568_5;

/// A formula value together with its existence flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FormulaResult<T> {
    /// `+∞` when the quantity does not exist.
    pub value: T,
    pub exists: bool,
    pub tag: &'static str,
}

impl<T: Real> FormulaResult<T> {
    fn finite(value: T, tag: &'static str) -> Self {
        Self {
            value,
            exists: true,
            tag,
        }
    }

    fn infinite(tag: &'static str) -> Self {
        Self {
            value: T::infinity(),
            exists: false,
            tag,
        }
    }
}

fn r<T: Real>(n: usize) -> T {
    from_usize(n)
}

fn half<T: Real>(n: usize) -> T {
    from_usize::<T>(n) * lit(0.5)
}

/// Volume of the unit ball in dimension `j`.
pub fn kappa<T: Real>(j: usize) -> T {
    T::PI().powf(half(j)) / gamma(T::one() + half(j))
}

/// `Λ_iso([xy]) / ‖x - y‖ = 2κ_{d-1} / (dκ_d)`.
pub fn segment_constant<T: Real>(d: usize) -> T {
    lit::<T>(2.0) * kappa::<T>(d - 1) / (r::<T>(d) * kappa::<T>(d))
}

/// Surface intensity of a k-dimensional section of the tessellation, per unit `t`.
pub fn lambda_k<T: Real>(d: usize, k: usize) -> T {
    debug_assert!(1 <= k && k <= d);
    gamma::<T>(half(k + 1)) * gamma::<T>(half(d)) / (gamma::<T>(half(k)) * gamma::<T>(half(d + 1)))
}

/// `2√π Γ((d+1)/2) / Γ(d/2)`, the scale constant of the typical I-face moments.
fn c_d<T: Real>(d: usize) -> T {
    lit::<T>(2.0) * T::PI().sqrt() * gamma::<T>(half(d + 1)) / gamma::<T>(half(d))
}

/// Intensity of k-dimensional I-faces, `0 <= k <= d-1`.
pub fn intensity_nki<T: Real>(d: usize, k: usize, t: T) -> T {
    debug_assert!(k < d);
    let kd = kappa::<T>(d);
    r::<T>(d - k)
        * lit::<T>(2.0).powi((d - k - 1) as i32)
        * (kd / r(d))
        * binomial::<T>(d, k)
        * (kappa::<T>(d - 1) / (r::<T>(d) * kd)).powi(d as i32)
        * t.powi(d as i32)
}

/// Specific k-volume of the k-dimensional I-faces (k-volume per unit volume).
pub fn intensity_sv<T: Real>(d: usize, k: usize, t: T) -> T {
    debug_assert!(k < d);
    let kd = kappa::<T>(d);
    lit::<T>(2.0).powi((d - k - 1) as i32)
        * binomial::<T>(d, k)
        * (kd / kappa::<T>(k))
        * (kappa::<T>(d - 1) / (r::<T>(d) * kd)).powi((d - k) as i32)
        * t.powi((d - k) as i32)
}

/// Mean k-volume of the typical k-dimensional I-face.
pub fn mean_vol_ik<T: Real>(d: usize, k: usize, t: T) -> T {
    r::<T>(d) / (r::<T>(d - k) * kappa::<T>(k)) * (c_d::<T>(d) / t).powi(k as i32)
}

/// Mean f-vector `(f_0, …, f_{k-1})` of the typical k-dimensional I-face
/// (`k = d` gives the typical cell).
pub fn f_vector(k: usize) -> Vec<u64> {
    (0..k)
        .map(|j| (1u64 << (k - j)) * binomial_u64(k, j))
        .collect()
}

fn binomial_u64(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Mean j-th intrinsic volume of the typical k-dimensional I-face.
pub fn mean_intrinsic<T: Real>(d: usize, k: usize, j: usize, t: T) -> T {
    debug_assert!(j <= k && k < d);
    r::<T>(d) / (r::<T>(d - j) * kappa::<T>(j))
        * binomial::<T>(k, j)
        * (c_d::<T>(d) / t).powi(j as i32)
}

/// Density of the length of the typical I-segment.
pub fn isegment_density<T: Real>(d: usize, t: T, x: T) -> T {
    if !(x > T::zero()) {
        return T::zero();
    }
    let a = lambda_k::<T>(d, 1) * t;
    let g = lower_incomplete_gamma(r::<T>(d + 1), a * x).unwrap_or_else(|_| T::nan());
    r::<T>(d) * g / (a.powi(d as i32) * x.powi(d as i32 + 1))
}

/// Explicit planar form of [`isegment_density`].
pub fn isegment_density_planar<T: Real>(t: T, x: T) -> T {
    let pi = T::PI();
    let two: T = lit(2.0);
    let y = two * t * x / pi;
    // π²(1 - e^{-y}(1 + y + y²/2)); the tail series avoids cancellation for small y
    let bracket = if y < T::one() {
        let mut term = y * y * y / lit(6.0);
        let mut sum = T::zero();
        let mut k = 3usize;
        while term > sum * T::epsilon() {
            sum += term;
            k += 1;
            term = term * y / r::<T>(k);
        }
        pi * pi * (-y).exp() * sum
    } else {
        pi * pi - (pi * pi + two * pi * t * x + two * t * t * x * x) * (-y).exp()
    };
    bracket / (t * t * x.powi(3))
}

/// CDF of the typical I-segment length,
/// `1 - d γ(d, λ₁ t x) / (λ₁ t x)^d` (integral of the exponential mixture).
pub fn isegment_cdf<T: Real>(d: usize, t: T, x: T) -> Result<T, GeometryError> {
    if !(x > T::zero()) {
        return Ok(T::zero());
    }
    let a = lambda_k::<T>(d, 1) * t * x;
    let g = lower_incomplete_gamma(r::<T>(d), a)?;
    Ok((T::one() - r::<T>(d) * g / a.powi(d as i32)).max(T::zero()))
}

/// n-th moment of the typical I-segment length; finite only for `n < d`.
pub fn isegment_moment<T: Real>(d: usize, n: usize, t: T) -> FormulaResult<T> {
    const TAG: &str = "isegment-moment";
    if n >= d {
        return FormulaResult::infinite(TAG);
    }
    let fact: T = (1..=n).fold(T::one(), |a, i| a * r::<T>(i));
    let base = c_d::<T>(d) * lit(0.5) / t;
    FormulaResult::finite(r::<T>(d) * fact / r::<T>(d - n) * base.powi(n as i32), TAG)
}

/// n-th moment (`n` in 1..=3) of the k-volume of the typical k-dimensional I-face.
pub fn moments_volk<T: Real>(d: usize, k: usize, n: usize, t: T) -> FormulaResult<T> {
    const TAG: &str = "volk-moment";
    debug_assert!(1 <= k && k < d);
    let c = c_d::<T>(d);
    let (d_, k_) = (d as i64, k as i64);
    match n {
        1 => FormulaResult::finite(mean_vol_ik(d, k, t), TAG),
        2 if d_ - 2 * k_ > 0 => {
            let kfact: T = (1..=k).fold(T::one(), |a, i| a * r::<T>(i));
            let v = r::<T>(d) / r::<T>(d - 2 * k) * kfact / lit::<T>(2.0).powi(k as i32)
                * (c / t).powi(2 * k as i32);
            FormulaResult::finite(v, TAG)
        }
        3 if d_ - 3 * k_ > 0 => {
            let kf: T = r(k);
            let g = gamma::<T>(T::one() + kf * lit(0.5))
                * gamma::<T>(kf + lit(1.5))
                * gamma::<T>((kf + T::one()) * lit(0.5)).powi(3)
                / gamma::<T>((kf + T::one()) * lit(1.5));
            let v = r::<T>(d) / r::<T>(d - 3 * k)
                * lit::<T>(2.0).powi(2 * k as i32)
                * T::PI().powf((kf - lit(3.0)) * lit(0.5))
                * g
                * (c / t).powi(3 * k as i32);
            FormulaResult::finite(v, TAG)
        }
        2 | 3 => FormulaResult::infinite(TAG),
        _ => FormulaResult::infinite("unsupported-moment"),
    }
}

/// Second moment of the perimeter of the typical I-facet for d = 3, as
/// published: `(3/4)(1 + π²/4)/t²`.
///
/// Note: this value is below the squared mean perimeter `(12/t)²`, so it
/// cannot be a second moment of that perimeter as stated; it is reproduced
/// verbatim and should not be used as a Monte Carlo target.
pub fn perimeter_second_moment_3d<T: Real>(t: T) -> T {
    let pi = T::PI();
    lit::<T>(0.75) * (T::one() + pi * pi / lit(4.0)) / (t * t)
}

/// Relations between I-faces and J-faces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JFaceRelations<T> {
    /// Intensity of k-dimensional J-faces.
    pub n_kj: T,
    /// Mean number of vertices in the relative interior of the typical k-J-face.
    pub n_jk0: T,
    /// Mean number of j-faces of the typical k-I-face lying in its relative interior.
    pub n_ikj: T,
    /// Mean j-th intrinsic volume of the typical k-J-face.
    pub ev_j_jk: T,
}

pub fn jface_relations<T: Real>(d: usize, k: usize, j: usize, t: T) -> JFaceRelations<T> {
    debug_assert!(j < k && k < d);
    let n_ki = intensity_nki(d, k, t);
    JFaceRelations {
        n_kj: r::<T>(d * (d - k + 1)) / r::<T>(d - k) * n_ki,
        n_jk0: lit::<T>(2.0).powi(k as i32) / (r::<T>(d - k + 1) * binomial::<T>(d, k)),
        n_ikj: r::<T>(d - j) * binomial::<T>(d, j) / (r::<T>(d - k) * binomial::<T>(d, k))
            * lit::<T>(2.0).powi((k - j) as i32),
        ev_j_jk: r::<T>(d - j) / r::<T>(d) * mean_intrinsic(d, k, j, t),
    }
}

/// Variance of the total surface area in a window with isotropized set
/// covariance `cov`, supported on `[0, diameter]`.
pub fn variance_exact_with<T: Real, F: Fn(T) -> T>(
    d: usize,
    t: T,
    cov: F,
    diameter: T,
) -> Result<T, GeometryError> {
    let c = segment_constant::<T>(d);
    let pre = r::<T>(d * (d - 1)) * kappa::<T>(d) * lit(0.5);
    let f = |s: T| {
        if s <= T::zero() {
            // limit of s^{d-3}(1 - e^{-cts}) for d = 2
            return if d == 2 {
                cov(T::zero()) * c * t
            } else {
                T::zero()
            };
        }
        cov(s) * s.powi(d as i32 - 3) * (-(-(c * t * s)).exp_m1())
    };
    Ok(pre * quad_1d(f, T::zero(), diameter, lit(1e-11))?)
}

/// Variance of the total surface area of the tessellation in the ball `B_R`.
pub fn variance_exact_ball<T: Real>(d: usize, t: T, radius: T) -> Result<T, GeometryError> {
    variance_exact_with(
        d,
        t,
        |s| set_covariance_ball(d, radius, s).unwrap_or(T::zero()),
        radius * lit(2.0),
    )
}

/// Closed form of [`variance_exact_ball`] for d = 3.
pub fn variance_ball_3d_closed<T: Real>(t: T, radius: T) -> T {
    let tr = t * radius;
    let pi = T::PI();
    lit::<T>(4.0) * pi * pi / (lit::<T>(3.0) * t.powi(4))
        * (tr * tr * (lit::<T>(12.0) - lit::<T>(8.0) * tr + lit::<T>(3.0) * tr * tr)
            + lit::<T>(24.0) * (T::one() + tr) * (-tr).exp()
            - lit(24.0))
}

/// `(d-1)`-th chord power integral of the unit ball.
pub fn chord_power_ball<T: Real>(d: usize) -> T {
    r::<T>(d) * lit::<T>(2.0).powi(d as i32 - 2) * kappa::<T>(d) * kappa::<T>(2 * d - 2)
        / kappa::<T>(d - 1)
}

/// Published value of the second chord power integral of the unit cube.
///
/// It refers to a line measure normalized differently from the one used by
/// [`chord_power_ball`] and [`energy2_from_chord`]: it equals `2/3` of
/// [`chord_power_cube_3d`] up to about 3e-5 relative.
pub const CUBE_CHORD_POWER_PUBLISHED: f64 = 3.7557;

/// Second chord power integral of the unit cube in d = 3, normalized like
/// [`chord_power_ball`] (so that it equals the 2-energy of the cube).
///
/// Evaluated as `∫ γ_C(z) ‖z‖^{-2} dz` in spherical coordinates: along a ray
/// `r u` in the positive octant the covariance `Π(1 - r u_i)` is a cubic in
/// `r`, integrated exactly up to `1 / max u_i`.
pub fn chord_power_cube_3d<T: Real>() -> Result<T, GeometryError> {
    let ray = |u: [T; 3]| {
        let e1 = u[0] + u[1] + u[2];
        let e2 = u[0] * u[1] + u[1] * u[2] + u[0] * u[2];
        let e3 = u[0] * u[1] * u[2];
        let m = T::one() / u[0].max(u[1]).max(u[2]);
        m - e1 * m * m / lit(2.0) + e2 * m.powi(3) / lit(3.0) - e3 * m.powi(4) / lit(4.0)
    };
    let half_pi = T::FRAC_PI_2();
    // z = cos θ on [0, 1], φ on [0, π/2]; the kinks where the maximal
    // coordinate changes are handled by the adaptive rule
    let inner = |z: T| {
        let s = (T::one() - z * z).max(T::zero()).sqrt();
        quad_1d(
            |phi: T| ray([s * phi.cos(), s * phi.sin(), z]),
            T::zero(),
            half_pi,
            lit(1e-13),
        )
        .unwrap_or_else(|_| T::nan())
    };
    let octant = quad_1d(inner, T::zero(), T::one(), lit(1e-12))?;
    if !octant.is_finite() {
        return Err(GeometryError::NonConvergence);
    }
    Ok(lit::<T>(8.0) * octant)
}

/// 2-energy `∫∫ ‖x-y‖^{-2} dx dy` from the `(d-1)`-th chord power integral (d >= 3).
pub fn energy2_from_chord<T: Real>(d: usize, chord: T) -> T {
    lit::<T>(2.0) * chord / r::<T>((d - 1) * (d - 2))
}

/// Shape of the growing windows `W_R = R·W` in the variance asymptotics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowShape<T> {
    UnitBall,
    UnitCube,
    /// Volume and `(d-1)`-th chord power integral supplied by the caller.
    Custom {
        volume: T,
        chord_power: T,
    },
}

impl<T: Real> WindowShape<T> {
    pub fn volume(&self, d: usize) -> T {
        match self {
            WindowShape::UnitBall => kappa(d),
            WindowShape::UnitCube => T::one(),
            WindowShape::Custom { volume, .. } => *volume,
        }
    }

    pub fn chord_power(&self, d: usize) -> Result<T, GeometryError> {
        match self {
            WindowShape::UnitBall => Ok(chord_power_ball(d)),
            WindowShape::UnitCube if d == 3 => chord_power_cube_3d(),
            WindowShape::UnitCube => Err(GeometryError::UnsupportedDimension(d)),
            WindowShape::Custom { chord_power, .. } => Ok(*chord_power),
        }
    }
}

/// Leading term of the surface-area variance of `Y(1, R·W)` as `R → ∞`.
pub fn variance_asymptotic<T: Real>(
    d: usize,
    shape: WindowShape<T>,
    radius: T,
) -> Result<T, GeometryError> {
    match d {
        2 => Ok(T::PI() * shape.volume(2) * radius * radius * radius.ln()),
        d if d >= 3 => Ok(radius.powi(2 * (d as i32 - 1)) * shape.chord_power(d)? / r::<T>(d - 2)),
        _ => Err(GeometryError::UnsupportedDimension(d)),
    }
}

/// Pair-correlation function of the random surface measure.
pub fn pair_correlation<T: Real>(d: usize, t: T, s: T) -> T {
    let c = segment_constant::<T>(d);
    T::one() + r::<T>(d - 1) / (lit::<T>(2.0) * t * t * s * s) * (-(-(c * t * s)).exp_m1())
}

/// Reduced second moment function in d = 2 or 3.
pub fn k_function<T: Real>(d: usize, t: T, s: T) -> Result<T, GeometryError> {
    let pi = T::PI();
    match d {
        2 => {
            let x = lit::<T>(2.0) * t * s / pi;
            let bracket = if x < lit(1e-3) {
                // γ + ln x + E1(x) = x - x²/4 + x³/18 - …
                x - x * x / lit(4.0) + x.powi(3) / lit(18.0) - x.powi(4) / lit(96.0)
            } else {
                T::euler_gamma() + x.ln() + exp_integral_e1(x)?
            };
            Ok(pi * s * s + pi / (t * t) * bracket)
        }
        3 => {
            let ts = t * s;
            let four_pi_3 = lit::<T>(4.0) * pi / lit(3.0);
            Ok(four_pi_3 * s.powi(3)
                + four_pi_3 / t.powi(3)
                    * (lit::<T>(3.0) * ts - lit(6.0) + lit::<T>(6.0) * (-ts * lit(0.5)).exp()))
        }
        _ => Err(GeometryError::UnsupportedDimension(d)),
    }
}

/// Asymptotic variance factor of the surface increment process, isotropic
/// measure and unit weight, for a window of volume `volume`.
pub fn clt_variance_factor<T: Real>(d: usize, volume: T) -> T {
    let df: T = r(d);
    volume
        * lit::<T>(2.0).powi(d as i32 - 1)
        * T::PI().powf(df - lit(1.5))
        * gamma::<T>(half(d + 1)).powi(d as i32 - 1)
        * gamma::<T>(half(d)).powi(2 - d as i32)
}

/// `V_W ∫_{s0}^{1} s^{1-d} ds`: limit variance of the increment over `[s0, 1]`.
pub fn increment_variance_target<T: Real>(d: usize, volume: T, s0: T) -> T {
    let integral = if d == 2 {
        -s0.ln()
    } else {
        let p = r::<T>(2) - r::<T>(d);
        (T::one() - s0.powf(p)) / p
    };
    clt_variance_factor(d, volume) * integral
}

/// Isotropic limit variance of `Ξ(W)`: `(d-1)/2 · E₂(W)`.
pub fn xi_variance_isotropic<T: Real>(d: usize, energy2: T) -> T {
    r::<T>(d - 1) * lit(0.5) * energy2
}

/// Monte Carlo estimate with standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McValue {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo evaluation of `Var Ξ(W) = ∫_{[W]} ∫∫_{(H∩W)²} Λ([xy])^{-1} dx dy Λ(dH)`
/// for d = 3.
///
/// Each sample draws `H` from the normalized hitting law, `x` uniformly on
/// `H ∩ W` and a uniform in-plane direction θ; integrating the inner variable
/// in polar coordinates around `x` leaves `ρ(x, θ) / Λ([0, u_θ])`, which has
/// finite variance.
pub fn xi_variance_mc<R: Rng + ?Sized>(
    spec: &HyperplaneMeasureSpec<f64>,
    window: &Window<f64>,
    samples: usize,
    rng: &mut R,
) -> Result<McValue, GeometryError> {
    surface_variance_mc(spec, window, f64::INFINITY, samples, rng)
}

/// Monte Carlo evaluation of
/// `Var Σ(Y(t, W)) = ∫_{[W]} ∫∫_{(H∩W)²} (1 - e^{-tΛ([xy])}) / Λ([xy]) dx dy Λ(dH)`
/// for d = 3 (`t = ∞` gives `Var Ξ(W)`). Same scheme as [`xi_variance_mc`];
/// the radial integral is
/// `∫_0^ρ (1 - e^{-tar}) / a dr = (ρ - (1 - e^{-taρ}) / (ta)) / a`.
pub fn surface_variance_mc<R: Rng + ?Sized>(
    spec: &HyperplaneMeasureSpec<f64>,
    window: &Window<f64>,
    t: f64,
    samples: usize,
    rng: &mut R,
) -> Result<McValue, GeometryError> {
    if !(t > 0.0) {
        return Err(GeometryError::InvalidInput(format!(
            "t must be positive, got {t}"
        )));
    }
    if spec.dim != 3 || window.dim() != 3 {
        return Err(GeometryError::UnsupportedDimension(spec.dim));
    }
    let (total, sampler): (f64, Box<dyn Fn(&mut R) -> Result<Section, GeometryError>>) =
        match window {
            Window::Ball { center, radius, .. } => {
                if !matches!(spec.kind, crate::measures::MeasureKind::Isotropic) {
                    return Err(GeometryError::InvalidInput(
                        "ball windows support the isotropic measure only".into(),
                    ));
                }
                let (c, rad) = (*center, *radius);
                (
                    2.0 * rad,
                    Box::new(move |rng: &mut R| {
                        let u: Point<f64> = uniform_direction(3, rng);
                        let h = (2.0 * rng.random::<f64>() - 1.0) * rad;
                        Ok(Section::Disk {
                            center: c + u * h,
                            normal: u,
                            radius: (rad * rad - h * h).sqrt(),
                        })
                    }),
                )
            }
            Window::Polytope { polytope } => {
                let p = polytope.clone();
                let s = spec.clone();
                let tol = window.tolerance();
                (
                    spec.measure_hitting(polytope),
                    Box::new(move |rng: &mut R| loop {
                        let h: Hyperplane<f64> = s.sample_hitting(&p, rng)?;
                        if let Some(f) = p.section(&h, &tol) {
                            return Ok(Section::Polygon {
                                vertices: f.vertices,
                                normal: h.normal,
                                area: f.area,
                            });
                        }
                    }),
                )
            }
        };
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..samples {
        let sec = sampler(rng)?;
        let (x, area, normal) = sec.uniform_point(rng);
        let (e1, e2) = crate::geometry::plane_basis(&normal);
        let th = rng.random::<f64>() * std::f64::consts::TAU;
        let dir = e1 * th.cos() + e2 * th.sin();
        let rho = sec.exit_distance(&x, &dir);
        let a = spec.direction_rate(&dir);
        let radial = if t.is_infinite() {
            rho / a
        } else {
            let x = t * a * rho;
            // x - (1 - e^{-x}), series near 0
            let excess = if x < 1e-4 {
                x * x * (0.5 - x / 6.0)
            } else {
                x + (-x).exp_m1()
            };
            excess / (t * a * a)
        };
        let v = total * area * std::f64::consts::TAU * radial;
        sum += v;
        sum2 += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 - n * mean * mean).max(0.0) / (n - 1.0);
    Ok(McValue {
        value: mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

enum Section {
    Disk {
        center: Point<f64>,
        normal: Point<f64>,
        radius: f64,
    },
    Polygon {
        vertices: Vec<Point<f64>>,
        normal: Point<f64>,
        area: f64,
    },
}

impl Section {
    fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (Point<f64>, f64, Point<f64>) {
        match self {
            Section::Disk {
                center,
                normal,
                radius,
            } => {
                let (e1, e2) = crate::geometry::plane_basis(normal);
                let rr = radius * rng.random::<f64>().sqrt();
                let a = rng.random::<f64>() * std::f64::consts::TAU;
                (
                    *center + e1 * (rr * a.cos()) + e2 * (rr * a.sin()),
                    std::f64::consts::PI * radius * radius,
                    *normal,
                )
            }
            Section::Polygon {
                vertices,
                normal,
                area,
            } => {
                let o = vertices[0];
                let tri: Vec<f64> = (1..vertices.len() - 1)
                    .map(|i| 0.5 * (vertices[i] - o).cross(&(vertices[i + 1] - o)).norm())
                    .collect();
                let mut pick = rng.random::<f64>() * tri.iter().sum::<f64>();
                let mut i = 0;
                while i + 1 < tri.len() && pick >= tri[i] {
                    pick -= tri[i];
                    i += 1;
                }
                let (mut a, mut b) = (rng.random::<f64>(), rng.random::<f64>());
                if a + b > 1.0 {
                    a = 1.0 - a;
                    b = 1.0 - b;
                }
                let p = o + (vertices[i + 1] - o) * a + (vertices[i + 2] - o) * b;
                (p, *area, *normal)
            }
        }
    }

    /// Distance from the interior point `x` along `dir` to the boundary.
    fn exit_distance(&self, x: &Point<f64>, dir: &Point<f64>) -> f64 {
        match self {
            Section::Disk { center, radius, .. } => {
                let f = *x - *center;
                let b = f.dot(dir);
                let c = f.norm_squared() - radius * radius;
                -b + (b * b - c).max(0.0).sqrt()
            }
            Section::Polygon {
                vertices, normal, ..
            } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    // inward edge normal within the plane (loop is CCW around `normal`)
                    let inward = normal.cross(&(b - a));
                    let denom = dir.dot(&inward);
                    if denom < 0.0 {
                        let s = (a - *x).dot(&inward) / denom;
                        best = best.min(s.max(0.0));
                    }
                }
                best
            }
        }
    }
}

/// Poisson hyperplane tessellation counterparts.
pub mod pht {
    use super::*;

    /// Reduced second moment function `K_d(r) = κ_{d-1} r^{d-1}/t + κ_d r^d`.
    pub fn k_function<T: Real>(d: usize, t: T, s: T) -> T {
        kappa::<T>(d - 1) / t * s.powi(d as i32 - 1) + kappa::<T>(d) * s.powi(d as i32)
    }

    pub fn pair_correlation<T: Real>(d: usize, t: T, s: T) -> T {
        T::one() + r::<T>(d - 1) * kappa::<T>(d - 1) / (r::<T>(d) * kappa::<T>(d) * t * s)
    }

    /// `J(B_R) = ∫ Vol_{d-1}(B_R ∩ H)² Λ_iso(dH)`.
    pub fn j_ball<T: Real>(d: usize, radius: T) -> T {
        let fact = |n: usize| (1..=n).fold(T::one(), |a, i| a * r::<T>(i));
        (fact(d - 1) * kappa::<T>(d - 1)).powi(2) * (lit::<T>(2.0) * radius).powi(2 * d as i32 - 1)
            / fact(2 * d - 1)
    }

    /// `J(W)` from the d-th chord power integral.
    pub fn j_from_chord<T: Real>(d: usize, chord_d: T) -> T {
        lit::<T>(2.0) * kappa::<T>(d - 1) / (r::<T>(d * d) * kappa::<T>(d)) * chord_d
    }

    /// Variance of the total surface area in `W`: exactly `t · J(W)`.
    pub fn surface_variance<T: Real>(t: T, j: T) -> T {
        t * j
    }

    /// Asymptotic planar Poisson–Voronoi edge-length variance in `B_R` at equal
    /// edge-length intensity (independent of that intensity).
    pub fn pvt_variance_planar<T: Real>(radius: T) -> T {
        T::PI() * lit::<T>(PVT_TAU_1_2) * radius * radius
    }
}

/// `∫_0^δ x p(x) dx / ∫_0^δ p(x) dx`: mean I-segment length conditioned on `L <= δ`.
pub fn isegment_truncated_mean<T: Real>(d: usize, t: T, delta: T) -> Result<T, GeometryError> {
    let mass = isegment_cdf(d, t, delta)?;
    let first = quad_1d(
        |s| s * isegment_density(d, t, s),
        T::zero(),
        delta,
        lit(1e-13),
    )?;
    Ok(first / mass)
}

/// Numerical n-th moment of the I-segment density (for coherence checks).
pub fn isegment_moment_numeric<T: Real>(d: usize, n: usize, t: T) -> Result<T, GeometryError> {
    quad_to_infinity(
        |s| s.powi(n as i32) * isegment_density(d, t, s),
        T::zero(),
        lit(1e-12),
    )
}

/// Row of the formula catalog.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub id: String,
    pub params: String,
    pub value: f64,
    pub provenance: &'static str,
}

/// Every closed form evaluated on a small parameter grid.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    let mut push = |id: &str, params: String, value: f64, provenance: &'static str| {
        out.push(CatalogEntry {
            id: id.to_string(),
            params,
            value,
            provenance,
        })
    };
    for j in 0..=6 {
        push("kappa", format!("j={j}"), kappa::<f64>(j), "analytic");
    }
    for d in 1..=4 {
        for k in 1..=d {
            push(
                "lambda_k",
                format!("d={d};k={k}"),
                lambda_k::<f64>(d, k),
                "analytic",
            );
        }
    }
    for d in 2..=4 {
        for k in 0..d {
            push(
                "intensity_NkI",
                format!("d={d};k={k};t=1"),
                intensity_nki(d, k, 1.0),
                "analytic",
            );
            push(
                "intensity_SV",
                format!("d={d};k={k};t=1"),
                intensity_sv(d, k, 1.0),
                "analytic",
            );
            push(
                "mean_vol_Ik",
                format!("d={d};k={k};t=1"),
                mean_vol_ik(d, k, 1.0),
                "analytic",
            );
            for j in 0..=k {
                push(
                    "mean_intrinsic",
                    format!("d={d};k={k};j={j};t=1"),
                    mean_intrinsic(d, k, j, 1.0),
                    "analytic",
                );
            }
            for j in 0..k {
                let rel = jface_relations(d, k, j, 1.0);
                let p = format!("d={d};k={k};j={j};t=1");
                push("N_kJ", p.clone(), rel.n_kj, "analytic");
                push("N_Jk0", p.clone(), rel.n_jk0, "analytic");
                push("N_Ikj", p.clone(), rel.n_ikj, "analytic");
                push("EVj_Jk", p, rel.ev_j_jk, "analytic");
            }
        }
        for n in 1..=3 {
            push(
                "isegment_moment",
                format!("d={d};n={n};t=1"),
                isegment_moment(d, n, 1.0).value,
                "analytic",
            );
        }
        for k in 1..d {
            for n in 2..=3 {
                push(
                    "volk_moment",
                    format!("d={d};k={k};n={n};t=1"),
                    moments_volk(d, k, n, 1.0).value,
                    "analytic",
                );
            }
        }
    }
    for k in 1..=3 {
        for (j, f) in f_vector(k).into_iter().enumerate() {
            push("f_vector", format!("k={k};j={j}"), f as f64, "analytic");
        }
    }
    push(
        "perimeter_second_moment_3d",
        "t=1".into(),
        perimeter_second_moment_3d(1.0),
        "analytic",
    );
    for x in [0.1, 1.0, 10.0] {
        push(
            "isegment_density",
            format!("d=2;t=1;x={x}"),
            isegment_density(2, 1.0, x),
            "analytic",
        );
        push(
            "isegment_density",
            format!("d=3;t=1;x={x}"),
            isegment_density(3, 1.0, x),
            "analytic",
        );
    }
    for (t, rad) in [(1.0, 1.0), (2.0, 0.5), (0.5, 2.0)] {
        push(
            "variance_ball_3d",
            format!("t={t};R={rad}"),
            variance_ball_3d_closed(t, rad),
            "analytic",
        );
        if let Ok(v) = variance_exact_ball(2, t, rad) {
            push("variance_ball_2d", format!("t={t};R={rad}"), v, "analytic");
        }
    }
    push(
        "chord_power_ball",
        "d=3".into(),
        chord_power_ball::<f64>(3),
        "analytic",
    );
    if let Ok(v) = chord_power_cube_3d::<f64>() {
        push("chord_power_cube", "d=3".into(), v, "analytic");
    }
    push(
        "energy2_ball",
        "d=3".into(),
        energy2_from_chord(3, chord_power_ball::<f64>(3)),
        "analytic",
    );
    for rr in [0.25, 0.5, 1.0, 2.0] {
        push(
            "pair_correlation",
            format!("d=2;t=1;r={rr}"),
            pair_correlation(2, 1.0, rr),
            "analytic",
        );
        push(
            "pair_correlation",
            format!("d=3;t=1;r={rr}"),
            pair_correlation(3, 1.0, rr),
            "analytic",
        );
        if let Ok(k) = k_function(2, 1.0, rr) {
            push("k_function", format!("d=2;t=1;r={rr}"), k, "analytic");
        }
        if let Ok(k) = k_function(3, 1.0, rr) {
            push("k_function", format!("d=3;t=1;r={rr}"), k, "analytic");
        }
        push(
            "pht_k_function",
            format!("d=2;t=1;r={rr}"),
            pht::k_function(2, 1.0, rr),
            "analytic",
        );
        push(
            "pht_pair_correlation",
            format!("d=2;t=1;r={rr}"),
            pht::pair_correlation(2, 1.0, rr),
            "analytic",
        );
    }
    push(
        "clt_variance_factor",
        "d=2;W=B1".into(),
        clt_variance_factor(2, kappa::<f64>(2)),
        "analytic",
    );
    push(
        "clt_variance_factor",
        "d=3;W=B1".into(),
        clt_variance_factor(3, kappa::<f64>(3)),
        "analytic",
    );
    push(
        "xi_variance_isotropic",
        "d=3;W=B1".into(),
        xi_variance_isotropic(3, energy2_from_chord(3, chord_power_ball::<f64>(3))),
        "analytic",
    );
    for d in 2..=3 {
        push(
            "pht_J_ball",
            format!("d={d};R=1"),
            pht::j_ball::<f64>(d, 1.0),
            "analytic",
        );
    }
    push(
        "pvt_tau_1_2",
        String::new(),
        PVT_TAU_1_2,
        "literature-constant",
    );
    for rad in [8.0, 16.0, 32.0, 64.0] {
        if let Ok(v) = variance_asymptotic(2, WindowShape::UnitBall, rad) {
            push(
                "variance_asymptotic",
                format!("d=2;W=B1;R={rad}"),
                v,
                "analytic",
            );
        }
    }
    out
}
