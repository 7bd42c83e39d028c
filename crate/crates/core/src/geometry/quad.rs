//! Adaptive Gauss–Kronrod (7/15) quadrature.

use super::GeometryError;
use crate::scalar::{lit, Real};

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 50;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let c = (a + b) * lit(0.5);
    let h = (b - a) * lit(0.5);
    let fc = f(c);
    let mut k = fc * lit(WGK[7]);
    let mut g = fc * lit(WG[3]);
    for i in 0..7 {
        let dx = h * lit(XGK[i]);
        let s = f(c - dx) + f(c + dx);
        k += s * lit(WGK[i]);
        if i % 2 == 1 {
            g += s * lit(WG[i / 2]);
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece<T> {
    a: T,
    b: T,
    est: T,
    err: T,
    depth: u32,
}

/// `∫_a^b f(x) dx` with absolute error target `tol`.
///
/// Globally adaptive: the piece with the largest error estimate is bisected
/// until the summed error meets `tol` (or the rounding floor). A piece that
/// would need more than 50 bisections yields `NonConvergence`.
pub fn quad_1d<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T, GeometryError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(GeometryError::Domain("quad_1d needs finite limits".into()));
    }
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return quad_1d(f, b, a, tol).map(|v| -v);
    }
    let (est, err) = gk15(&f, a, b);
    let mut pieces = vec![Piece {
        a,
        b,
        est,
        err,
        depth: 0,
    }];
    loop {
        let total: T = pieces.iter().fold(T::zero(), |s, p| s + p.est);
        let total_err: T = pieces.iter().fold(T::zero(), |s, p| s + p.err);
        if !total.is_finite() || !total_err.is_finite() {
            return Err(GeometryError::Domain("integrand is not finite".into()));
        }
        let scale: T = pieces.iter().fold(T::zero(), |s, p| s + p.est.abs());
        if total_err <= tol.max(T::epsilon() * lit(50.0) * scale) {
            return Ok(total);
        }
        let (worst, _) =
            pieces
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |(bi, be), (i, p)| {
                    if p.err > be {
                        (i, p.err)
                    } else {
                        (bi, be)
                    }
                });
        let p = pieces.swap_remove(worst);
        if p.depth >= MAX_DEPTH {
            return Err(GeometryError::NonConvergence);
        }
        let m = (p.a + p.b) * lit(0.5);
        let (le, lr) = gk15(&f, p.a, m);
        let (re, rr) = gk15(&f, m, p.b);
        pieces.push(Piece {
            a: p.a,
            b: m,
            est: le,
            err: lr,
            depth: p.depth + 1,
        });
        pieces.push(Piece {
            a: m,
            b: p.b,
            est: re,
            err: rr,
            depth: p.depth + 1,
        });
    }
}

/// `∫_a^∞ f(x) dx` via `x = a + s/(1-s)`; `f` must decay at least like `x^{-1-ε}`.
pub fn quad_to_infinity<T: Real, F: Fn(T) -> T>(f: F, a: T, tol: T) -> Result<T, GeometryError> {
    let g = |s: T| {
        let one_minus = T::one() - s;
        let x = a + s / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    quad_1d(g, T::zero(), T::one(), tol)
}
