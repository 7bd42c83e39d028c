use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A point (or free vector) in up to three dimensions.
///
/// Lower-dimensional experiments leave the trailing coordinates at zero, so
/// dot products and norms need no dimension argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Point<T> {
    pub coords: [T; 3],
}

impl<T: Real> Default for Point<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { coords: [x, y, z] }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Builds a point from a slice of length 1..=3, zero padding the rest.
    pub fn from_slice(xs: &[T]) -> Self {
        let mut coords = [T::zero(); 3];
        for (c, x) in coords.iter_mut().zip(xs) {
            *c = *x;
        }
        Self { coords }
    }

    /// Unit vector along axis `i`.
    pub fn axis(i: usize) -> Self {
        let mut p = Self::zero();
        p.coords[i] = T::one();
        p
    }

    #[inline]
    pub fn x(&self) -> T {
        self.coords[0]
    }

    #[inline]
    pub fn y(&self) -> T {
        self.coords[1]
    }

    #[inline]
    pub fn z(&self) -> T {
        self.coords[2]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.coords[0] * other.coords[0]
            + self.coords[1] * other.coords[1]
            + self.coords[2] * other.coords[2]
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        let [a1, a2, a3] = self.coords;
        let [b1, b2, b3] = o.coords;
        Self::new(a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    /// Returns `self / |self|`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(*self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Lexicographic comparison (x, then y, then z).
    pub fn lex_less(&self, other: &Self) -> bool {
        for i in 0..3 {
            if self.coords[i] < other.coords[i] {
                return true;
            }
            if self.coords[i] > other.coords[i] {
                return false;
            }
        }
        false
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> Point<U> {
        Point {
            coords: self
                .coords
                .map(|c| U::from_f64(crate::scalar::to_f64(c)).unwrap()),
        }
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(
            self.coords[0] + o.coords[0],
            self.coords[1] + o.coords[1],
            self.coords[2] + o.coords[2],
        )
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.coords[0] - o.coords[0],
            self.coords[1] - o.coords[1],
            self.coords[2] - o.coords[2],
        )
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.coords[0] * s, self.coords[1] * s, self.coords[2] * s)
    }
}

impl<T: Real> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.coords[0], -self.coords[1], -self.coords[2])
    }
}

/// Orthonormal basis `(e1, e2)` of the plane orthogonal to the unit vector `n`,
/// oriented so that `(e1, e2, n)` is right handed.
pub fn plane_basis<T: Real>(n: &Point<T>) -> (Point<T>, Point<T>) {
    let ax = n.x().abs();
    let ay = n.y().abs();
    let az = n.z().abs();
    let helper = if ax <= ay && ax <= az {
        Point::axis(0)
    } else if ay <= az {
        Point::axis(1)
    } else {
        Point::axis(2)
    };
    let e1 = helper.cross(n).normalized().expect("non-degenerate normal");
    let e2 = n.cross(&e1);
    (e1, e2)
}
