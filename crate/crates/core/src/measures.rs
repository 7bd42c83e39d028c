//! Driving hyperplane measures Λ: evaluation of `Λ([K])` and sampling from the
//! normalized restriction `Λ(· ∩ [K]) / Λ([K])`.

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::formulas::segment_constant;
use crate::geometry::{ConvexPolytope, GeometryError, Hyperplane, Point};
use crate::scalar::{from_usize, lit, to_f64, Real};

const MAX_REJECTIONS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DirectionAtom<T> {
    pub direction: Vec<T>,
    pub weight: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind<T> {
    /// Motion-invariant measure normalized so that `Λ([K])` is the mean width.
    Isotropic,
    /// Finitely many directions `u_i` with probabilities `p_i`.
    DiscreteDirectional { atoms: Vec<DirectionAtom<T>> },
    /// Hyperplanes orthogonal to the coordinate axes, unit offset density per axis.
    AxisCounting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HyperplaneMeasureSpec<T> {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: MeasureKind<T>,
}

/// `tΛ` for a fixed `t > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TimeScaledMeasure<T> {
    pub spec: HyperplaneMeasureSpec<T>,
    pub t: T,
}

impl<T: Real> TimeScaledMeasure<T> {
    pub fn new(spec: HyperplaneMeasureSpec<T>, t: T) -> Result<Self, GeometryError> {
        if !(t > T::zero()) || !t.is_finite() {
            return Err(GeometryError::InvalidInput(format!(
                "t must be positive, got {t}"
            )));
        }
        Ok(Self {
            spec: spec.validated()?,
            t,
        })
    }

    pub fn measure_hitting(&self, k: &ConvexPolytope<T>) -> T {
        self.t * self.spec.measure_hitting(k)
    }
}

impl<T: Real> HyperplaneMeasureSpec<T> {
    pub fn isotropic(dim: usize) -> Self {
        Self {
            dim,
            kind: MeasureKind::Isotropic,
        }
    }

    pub fn axis_counting(dim: usize) -> Self {
        Self {
            dim,
            kind: MeasureKind::AxisCounting,
        }
    }

    pub fn discrete(dim: usize, atoms: Vec<(Point<T>, T)>) -> Result<Self, GeometryError> {
        let atoms = atoms
            .into_iter()
            .map(|(u, w)| DirectionAtom {
                direction: u.coords[..dim.min(3)].to_vec(),
                weight: w,
            })
            .collect();
        Self {
            dim,
            kind: MeasureKind::DiscreteDirectional { atoms },
        }
        .validated()
    }

    /// Checks the invariants and normalizes discrete directions to unit length.
    pub fn validated(mut self) -> Result<Self, GeometryError> {
        if !(1..=3).contains(&self.dim) {
            return Err(GeometryError::UnsupportedDimension(self.dim));
        }
        let dim = self.dim;
        if let MeasureKind::DiscreteDirectional { atoms } = &mut self.kind {
            if atoms.is_empty() {
                return Err(GeometryError::InvalidInput(
                    "discrete measure needs atoms".into(),
                ));
            }
            let mut total = T::zero();
            for a in atoms.iter_mut() {
                if a.direction.len() != dim {
                    return Err(GeometryError::InvalidInput(format!(
                        "direction {:?} does not have {dim} coordinates",
                        a.direction
                    )));
                }
                if !(a.weight > T::zero()) {
                    return Err(GeometryError::InvalidInput(
                        "atom weights must be positive".into(),
                    ));
                }
                let u = Point::from_slice(&a.direction)
                    .normalized()
                    .ok_or_else(|| GeometryError::InvalidInput("zero direction".into()))?;
                a.direction = u.coords[..dim].to_vec();
                total += a.weight;
            }
            if (total - T::one()).abs() > lit(1e-9) {
                return Err(GeometryError::InvalidInput(format!(
                    "atom weights sum to {total}, not 1"
                )));
            }
            let dirs: Vec<Point<T>> = atoms
                .iter()
                .map(|a| Point::from_slice(&a.direction))
                .collect();
            if !spans(&dirs, dim) {
                return Err(GeometryError::InvalidInput(
                    "directions do not span the space".into(),
                ));
            }
        }
        Ok(self)
    }

    /// `Λ([K])`.
    pub fn measure_hitting(&self, k: &ConvexPolytope<T>) -> T {
        match &self.kind {
            MeasureKind::Isotropic => k.mean_width(),
            MeasureKind::DiscreteDirectional { atoms } => atoms
                .iter()
                .map(|a| a.weight * k.support_width(&Point::from_slice(&a.direction)))
                .sum(),
            MeasureKind::AxisCounting => (0..self.dim)
                .map(|i| k.support_width(&Point::axis(i)))
                .sum(),
        }
    }

    /// `∫ Vol_{d-1}(H ∩ K) Λ(dH) / Vol(K)`: the surface intensity of the
    /// tessellation at time 1.
    pub fn surface_intensity(&self) -> T {
        match &self.kind {
            MeasureKind::Isotropic | MeasureKind::DiscreteDirectional { .. } => T::one(),
            MeasureKind::AxisCounting => from_usize(self.dim),
        }
    }

    /// `Λ([xy])` for the segment between `x` and `y`.
    pub fn segment_measure(&self, x: &Point<T>, y: &Point<T>) -> T {
        let v = *y - *x;
        match &self.kind {
            MeasureKind::Isotropic => segment_constant::<T>(self.dim) * v.norm(),
            _ => self.direction_rate(&v),
        }
    }

    /// `Λ([0, v])`, homogeneous of degree one in `v`.
    pub fn direction_rate(&self, v: &Point<T>) -> T {
        match &self.kind {
            MeasureKind::Isotropic => segment_constant::<T>(self.dim) * v.norm(),
            MeasureKind::DiscreteDirectional { atoms } => atoms
                .iter()
                .map(|a| a.weight * v.dot(&Point::from_slice(&a.direction)).abs())
                .sum(),
            MeasureKind::AxisCounting => (0..self.dim).map(|i| v.coords[i].abs()).sum(),
        }
    }

    /// Draws a hyperplane from `Λ(· ∩ [K]) / Λ([K])`.
    pub fn sample_hitting<R: Rng + ?Sized>(
        &self,
        k: &ConvexPolytope<T>,
        rng: &mut R,
    ) -> Result<Hyperplane<T>, GeometryError> {
        let u = match &self.kind {
            MeasureKind::Isotropic => {
                let diam = k.diameter();
                if !(diam > T::zero()) {
                    return Err(GeometryError::InvalidInput(
                        "cannot sample on a point".into(),
                    ));
                }
                let mut tries = 0u64;
                loop {
                    let u = uniform_direction::<T, R>(self.dim, rng);
                    let w = k.support_width(&u);
                    if rng.random::<f64>() * to_f64(diam) < to_f64(w) {
                        break u;
                    }
                    tries += 1;
                    if tries >= MAX_REJECTIONS {
                        return Err(GeometryError::RejectionOverflow);
                    }
                }
            }
            MeasureKind::DiscreteDirectional { atoms } => {
                let dirs: Vec<Point<T>> = atoms
                    .iter()
                    .map(|a| Point::from_slice(&a.direction))
                    .collect();
                let weights: Vec<f64> = atoms
                    .iter()
                    .zip(&dirs)
                    .map(|(a, u)| to_f64(a.weight * k.support_width(u)))
                    .collect();
                dirs[pick(&weights, rng)?]
            }
            MeasureKind::AxisCounting => {
                let weights: Vec<f64> = (0..self.dim)
                    .map(|i| to_f64(k.support_width(&Point::axis(i))))
                    .collect();
                Point::axis(pick(&weights, rng)?)
            }
        };
        let (lo, hi) = k.support_interval(&u);
        let r = lo + (hi - lo) * lit(rng.random::<f64>());
        Ok(Hyperplane::canonical_unchecked(u, r))
    }
}

fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize, GeometryError> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(GeometryError::InvalidInput(
            "measure does not hit the body".into(),
        ));
    }
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return Ok(i);
        }
        x -= w;
    }
    Ok(weights.iter().rposition(|w| *w > 0.0).unwrap())
}

/// Uniform unit vector in `ℝ^dim` (embedded in 3 coordinates).
pub fn uniform_direction<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Point<T> {
    match dim {
        1 => Point::axis(0),
        2 => {
            let a = rng.random::<f64>() * std::f64::consts::TAU;
            Point::new(lit(a.cos()), lit(a.sin()), T::zero())
        }
        _ => {
            let v: [f64; 3] = UnitSphere.sample(rng);
            Point::new(lit(v[0]), lit(v[1]), lit(v[2]))
        }
    }
}

fn spans<T: Real>(dirs: &[Point<T>], dim: usize) -> bool {
    let eps: T = lit(1e-9);
    match dim {
        1 => dirs.iter().any(|u| u.x().abs() > eps),
        2 => dirs.iter().enumerate().any(|(i, a)| {
            dirs[i + 1..]
                .iter()
                .any(|b| (a.x() * b.y() - a.y() * b.x()).abs() > eps)
        }),
        _ => {
            let n = dirs.len();
            (0..n).any(|i| {
                (i + 1..n)
                    .any(|j| (j + 1..n).any(|k| dirs[i].dot(&dirs[j].cross(&dirs[k])).abs() > eps))
            })
        }
    }
}
