//! Great-circle geodesy on unit spheres in ambient Euclidean space.
//!
//! Every model space in this crate is a Riemannian quotient of a unit round sphere,
//! so all geodesics are great circles of the lift and these closed forms are the only
//! geodesic solver needed.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tol::{ANTIPODAL_TOL, COINCIDENT_TOL, TANGENT_TOL, UNIT_TOL, VELOCITY_UNIT_TOL};
use crate::vecops::{dot, lincomb, norm, normalized, sub};

/// A point of the unit sphere `S^{d-1}` in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts `coords` only if its norm is within `UNIT_TOL` of one.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: coords.len() });
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnit { norm: n });
        }
        Ok(Self(coords))
    }

    /// Normalizes arbitrary nonzero input.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        match normalized(&coords) {
            Some(v) if coords.len() >= 2 => Ok(Self(v)),
            Some(_) => Err(Error::DimensionMismatch { expected: 2, got: coords.len() }),
            None => Err(Error::NonUnit { norm: n }),
        }
    }

    /// Renormalizes without checks; for values already unit up to rounding.
    pub(crate) fn renormalized(coords: Vec<f64>) -> Self {
        let n = norm(&coords);
        Self(coords.into_iter().map(|c| c / n).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A vector tangent to the unit sphere at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentAtPoint {
    pub base: UnitVector,
    pub vec: Vec<f64>,
}

impl TangentAtPoint {
    pub fn new(base: UnitVector, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: vec.len() });
        }
        let inner = dot(base.coords(), &vec);
        if inner.abs() > TANGENT_TOL * norm(&vec).max(1.0) {
            return Err(Error::NonTangent { inner });
        }
        Ok(Self { base, vec })
    }

    /// Projects `vec` onto the tangent space at `base` first.
    pub fn projected(base: UnitVector, vec: &[f64]) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: vec.len() });
        }
        let c = dot(base.coords(), vec);
        let v = lincomb(1.0, vec, -c, base.coords());
        Ok(Self { base, vec: v })
    }

    pub fn zero(base: UnitVector) -> Self {
        let d = base.dim();
        Self { base, vec: vec![0.0; d] }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vec)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { base: self.base.clone(), vec: self.vec.iter().map(|v| v * s).collect() }
    }
}

/// A geodesic arc `t -> cos t * start + sin t * velocity`, `t` in `[0, length]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSegment {
    pub start: UnitVector,
    pub initial_velocity: TangentAtPoint,
    pub length: f64,
}

impl GeodesicSegment {
    pub fn new(velocity: TangentAtPoint, length: f64) -> Result<Self> {
        if !(length >= 0.0) {
            return Err(Error::InvalidInput(format!("negative segment length {length}")));
        }
        let n = velocity.norm();
        if length > 0.0 && (n - 1.0).abs() > VELOCITY_UNIT_TOL {
            return Err(Error::NonUnit { norm: n });
        }
        if length == 0.0 && n != 0.0 && (n - 1.0).abs() > VELOCITY_UNIT_TOL {
            return Err(Error::NonUnit { norm: n });
        }
        Ok(Self { start: velocity.base.clone(), initial_velocity: velocity, length })
    }

    pub fn constant(start: UnitVector) -> Self {
        Self { initial_velocity: TangentAtPoint::zero(start.clone()), start, length: 0.0 }
    }

    /// The point at arclength `t`.
    pub fn point_at(&self, t: f64) -> UnitVector {
        if self.length == 0.0 || self.initial_velocity.norm() == 0.0 {
            return self.start.clone();
        }
        great_circle(&self.start, &self.initial_velocity.vec, t)
    }

    pub fn end(&self) -> UnitVector {
        self.point_at(self.length)
    }
}

fn great_circle(x: &UnitVector, v: &[f64], t: f64) -> UnitVector {
    UnitVector::renormalized(lincomb(t.cos(), x.coords(), t.sin(), v))
}

/// Geodesic distance on the unit sphere, `arccos <x, y>` computed through
/// `2 atan2(|x - y|, |x + y|)` to stay accurate near 0 and pi.
pub fn sphere_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut dm = 0.0;
    let mut dp = 0.0;
    for (a, b) in x.iter().zip(y) {
        dm += (a - b) * (a - b);
        dp += (a + b) * (a + b);
    }
    2.0 * dm.sqrt().atan2(dp.sqrt())
}

/// `exp_x(t v)` on the unit sphere for a unit tangent `v` at `x`.
pub fn sphere_exp(x: &UnitVector, v: &TangentAtPoint, t: f64) -> Result<UnitVector> {
    if v.vec.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: v.vec.len() });
    }
    let inner = dot(x.coords(), &v.vec);
    if inner.abs() > TANGENT_TOL {
        return Err(Error::NonTangent { inner });
    }
    let n = v.norm();
    if (n - 1.0).abs() > VELOCITY_UNIT_TOL {
        return Err(Error::NonUnit { norm: n });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("negative geodesic parameter {t}")));
    }
    Ok(great_circle(x, &v.vec, t))
}

/// The directions realizing `sphere_distance(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogDirections {
    /// `y = x`: no direction.
    Coincident,
    /// The unique unit initial velocity.
    Unique { velocity: TangentAtPoint },
    /// `y = -x`: every unit tangent direction, an equatorial sphere of this dimension.
    Antipodal { family_dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereLog {
    pub distance: f64,
    pub directions: LogDirections,
}

/// All minimizing initial velocities from `x` to `y` on the unit sphere.
pub fn sphere_log_all(x: &UnitVector, y: &UnitVector) -> Result<SphereLog> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    let distance = sphere_distance(x.coords(), y.coords());
    let c = dot(x.coords(), y.coords()).clamp(-1.0, 1.0);
    if c <= -1.0 + ANTIPODAL_TOL {
        return Ok(SphereLog {
            distance: PI,
            directions: LogDirections::Antipodal { family_dim: x.dim() - 2 },
        });
    }
    if distance < COINCIDENT_TOL {
        return Ok(SphereLog { distance: 0.0, directions: LogDirections::Coincident });
    }
    // (y - cos d x) / sin d, re-orthogonalized against x.
    let raw = sub(y.coords(), &x.coords().iter().map(|v| v * c).collect::<Vec<_>>());
    let proj = dot(&raw, x.coords());
    let raw = lincomb(1.0, &raw, -proj, x.coords());
    let unit = normalized(&raw).ok_or(Error::NonUnit { norm: 0.0 })?;
    Ok(SphereLog {
        distance,
        directions: LogDirections::Unique {
            velocity: TangentAtPoint { base: x.clone(), vec: unit },
        },
    })
}

/// First `t > 0` at which `cos t * x + sin t * v` reaches the hyperplane `<., u> = 0`.
///
/// With `a = <x, u> > 0` and `b = <v, u>` the crossing solves `cot t = -b / a`, which
/// always has exactly one root in `(0, pi)`.
pub fn hyperplane_crossing_time(x: &UnitVector, v: &TangentAtPoint, u: &[f64]) -> Result<f64> {
    if u.len() != x.dim() || v.vec.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: u.len() });
    }
    let inner = dot(&v.vec, x.coords());
    if inner.abs() > TANGENT_TOL {
        return Err(Error::NonTangent { inner });
    }
    let n = v.norm();
    if (n - 1.0).abs() > VELOCITY_UNIT_TOL {
        return Err(Error::NonUnit { norm: n });
    }
    let a = dot(x.coords(), u);
    if a <= 0.0 {
        return Err(Error::OutsideHalfSpace { inner: a });
    }
    let b = dot(&v.vec, u);
    Ok(a.atan2(-b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uv(c: &[f64]) -> UnitVector {
        UnitVector::new(c.to_vec()).unwrap()
    }

    fn tv(base: &UnitVector, c: &[f64]) -> TangentAtPoint {
        TangentAtPoint::new(base.clone(), c.to_vec()).unwrap()
    }

    #[test]
    fn exp_quarter_circle_and_antipode() {
        let x = uv(&[1.0, 0.0, 0.0]);
        let v = tv(&x, &[0.0, 1.0, 0.0]);
        let q = sphere_exp(&x, &v, PI / 2.0).unwrap();
        assert_abs_diff_eq!(q.coords(), [0.0, 1.0, 0.0].as_slice(), epsilon = 1e-15);
        let a = sphere_exp(&x, &v, PI).unwrap();
        assert_abs_diff_eq!(a.coords(), [-1.0, 0.0, 0.0].as_slice(), epsilon = 1e-15);
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let x = uv(&[1.0, 0.0, 0.0, 0.0]);
        let v = tv(&x, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(sphere_exp(&x, &v, 0.0).unwrap(), x);
    }

    #[test]
    fn exp_rejects_bad_velocity() {
        let x = uv(&[1.0, 0.0, 0.0]);
        let bad = TangentAtPoint { base: x.clone(), vec: vec![0.5, 0.5, 0.0] };
        assert!(matches!(sphere_exp(&x, &bad, 1.0), Err(Error::NonTangent { .. })));
        let long = TangentAtPoint { base: x.clone(), vec: vec![0.0, 2.0, 0.0] };
        assert!(matches!(sphere_exp(&x, &long, 1.0), Err(Error::NonUnit { .. })));
    }

    #[test]
    fn log_cases() {
        let x = uv(&[1.0, 0.0, 0.0]);
        let l = sphere_log_all(&x, &uv(&[0.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(l.distance, PI / 2.0, epsilon = 1e-15);
        match l.directions {
            LogDirections::Unique { velocity } => {
                assert_abs_diff_eq!(velocity.vec.as_slice(), [0.0, 1.0, 0.0].as_slice(), epsilon = 1e-15)
            }
            other => panic!("{other:?}"),
        }
        let l = sphere_log_all(&x, &x).unwrap();
        assert_eq!(l.distance, 0.0);
        assert_eq!(l.directions, LogDirections::Coincident);
        let l = sphere_log_all(&x, &uv(&[-1.0, 0.0, 0.0])).unwrap();
        assert_eq!(l.distance, PI);
        assert_eq!(l.directions, LogDirections::Antipodal { family_dim: 1 });
    }

    #[test]
    fn crossing_time_examples() {
        let x = uv(&[1.0, 0.0, 0.0, 0.0]);
        let a = 2.0 * PI / 3.0;
        let u1 = [1.0 - a.cos(), -a.sin(), 0.0, 0.0];
        let t = hyperplane_crossing_time(&x, &tv(&x, &[0.0, 1.0, 0.0, 0.0]), &u1).unwrap();
        assert_abs_diff_eq!(t, PI / 3.0, epsilon = 1e-15);
        let t = hyperplane_crossing_time(&x, &tv(&x, &[0.0, 0.0, 1.0, 0.0]), &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(t, PI / 2.0, epsilon = 1e-15);
        let r = hyperplane_crossing_time(&x, &tv(&x, &[0.0, 1.0, 0.0, 0.0]), &[0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(r, Err(Error::OutsideHalfSpace { .. })));
    }
}
