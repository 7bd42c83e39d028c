use serde::{Deserialize, Serialize};

use super::point::Point;
use super::GeometryError;
use crate::scalar::{lit, Real};

/// Affine hyperplane `{x : <x, normal> = offset}` in canonical form.
///
/// Canonical means `offset >= 0`, and when `offset == 0` the first nonzero
/// coordinate of `normal` is positive. The pair `(offset, normal)` is then a
/// unique label of the hyperplane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Hyperplane<T> {
    pub normal: Point<T>,
    pub offset: T,
}

impl<T: Real> Hyperplane<T> {
    /// Canonicalizes `(normal, offset)`. The normal must be unit length to 1e-12
    /// (relative to the scalar's precision).
    pub fn new(normal: Point<T>, offset: T) -> Result<Self, GeometryError> {
        let tol = lit::<T>(1e-12).max(T::epsilon() * lit(16.0));
        if !normal.is_finite() || !offset.is_finite() {
            return Err(GeometryError::InvalidInput("non-finite hyperplane".into()));
        }
        if (normal.norm() - T::one()).abs() > tol {
            return Err(GeometryError::InvalidInput(format!(
                "hyperplane normal must be unit length, got |u| = {}",
                normal.norm()
            )));
        }
        Ok(Self::canonical_unchecked(normal, offset))
    }

    /// Like [`Hyperplane::new`] but normalizes the direction first.
    pub fn from_direction(direction: Point<T>, offset_along: T) -> Result<Self, GeometryError> {
        let n = direction
            .normalized()
            .ok_or_else(|| GeometryError::InvalidInput("zero hyperplane normal".into()))?;
        Self::new(n, offset_along)
    }

    /// Canonicalizes without checking that `normal` is unit length.
    pub fn canonical_unchecked(normal: Point<T>, offset: T) -> Self {
        let flip = if offset < T::zero() {
            true
        } else if offset == T::zero() {
            normal
                .coords
                .iter()
                .find(|c| **c != T::zero())
                .map(|c| *c < T::zero())
                .unwrap_or(false)
        } else {
            false
        };
        if flip {
            Self {
                normal: -normal,
                offset: -offset,
            }
        } else {
            Self { normal, offset }
        }
    }

    /// `<x, normal> - offset`; positive on the `+` side.
    #[inline]
    pub fn signed_distance(&self, x: &Point<T>) -> T {
        x.dot(&self.normal) - self.offset
    }

    pub fn scaled(&self, m: T) -> Self {
        Self {
            normal: self.normal,
            offset: self.offset * m,
        }
    }
}
