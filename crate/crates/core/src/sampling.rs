//! Seeded random points and exact constructors for pairs on each cut stratum.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{TangentAtPoint, UnitVector};
use crate::isometry::Isometry;
use crate::lens::{circle_point, deck_image, face_point};
use crate::quat::{hermitian, quat_hermitian, quat_right_scale, complex_scale};
use crate::space::{ManifoldPoint, ModelManifold, StratumTag};
use crate::vecops::{lincomb, normalized, reject, sub};

/// Uniform point of `S^{d-1}` from `d` standard normals.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// A point whose lift is uniform on the lift sphere.
pub fn random_point<R: Rng + ?Sized>(m: &ModelManifold, rng: &mut R) -> ManifoldPoint {
    ManifoldPoint { manifold: *m, lift: UnitVector::renormalized(uniform_sphere(rng, m.ambient_dim())) }
}

/// A uniformly distributed unit horizontal vector at the lift of `x`.
pub fn random_unit_horizontal<R: Rng + ?Sized>(m: &ModelManifold, x: &ManifoldPoint, rng: &mut R) -> TangentAtPoint {
    let basis = m.horizontal_basis(&x.lift);
    let coeffs = uniform_sphere(rng, basis.len().max(2));
    let mut v = vec![0.0; m.ambient_dim()];
    for (c, b) in coeffs.iter().zip(&basis) {
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += c * bi;
        }
    }
    let v = normalized(&v).unwrap_or_else(|| basis[0].clone());
    TangentAtPoint { base: x.lift.clone(), vec: v }
}

/// `y` with the component along the fiber of `x` removed: the Hermitian (or quaternionic)
/// orthogonal projection, renormalized. For spheres and lens spaces the complex product
/// is used, which is what the lens `C^(p-1)` condition requires.
pub fn fiber_orthogonal(m: &ModelManifold, x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let v = match m {
        ModelManifold::QuaternionicProjective(_) => {
            let h = quat_hermitian(x, y);
            sub(y, &quat_right_scale(x, h))
        }
        _ => {
            let h = hermitian(x, y);
            sub(y, &complex_scale(x, h))
        }
    };
    normalized(&v)
}

/// A pair on the given stratum with random placement. Off-cut pairs are rejected until
/// the classification margin exceeds `1e-6`.
pub fn stratum_pair<R: Rng + ?Sized>(
    m: &ModelManifold,
    tag: StratumTag,
    rng: &mut R,
) -> Result<(ManifoldPoint, ManifoldPoint)> {
    match (tag, *m) {
        (StratumTag::OffCut, _) => Ok(offcut_pair(m, rng)),
        (StratumTag::Coincident, _) => {
            let x = random_point(m, rng);
            Ok((x.clone(), x))
        }
        (StratumTag::SphereAntipodal, ModelManifold::Sphere(_)) => {
            let x = random_point(m, rng);
            let y = ManifoldPoint { manifold: *m, lift: x.lift.neg() };
            Ok((x, y))
        }
        (StratumTag::ProjectiveCut, ModelManifold::ComplexProjective(_))
        | (StratumTag::ProjectiveCut, ModelManifold::QuaternionicProjective(_)) => loop {
            let x = random_point(m, rng);
            let y = uniform_sphere(rng, m.ambient_dim());
            if let Some(y) = fiber_orthogonal(m, x.coords(), &y) {
                return Ok((x, ManifoldPoint { manifold: *m, lift: UnitVector::renormalized(y) }));
            }
        },
        (StratumTag::LensC1, ModelManifold::Lens(p)) => {
            let last = rng.random_bool(0.5);
            let s = rng.random_range(0.05..0.95);
            let psi = rng.random_range(0.0..std::f64::consts::TAU);
            let r = face_point(p, last, s, psi)?;
            Ok(lens_pair_from_domain(p, &r, rng))
        }
        (StratumTag::LensCpMinus1, ModelManifold::Lens(p)) => {
            let r = circle_point(rng.random_range(0.0..std::f64::consts::TAU));
            Ok(lens_pair_from_domain(p, &r, rng))
        }
        _ => Err(Error::InvalidInput(format!("stratum {tag:?} does not occur on {m}"))),
    }
}

/// Moves the pair `(q0, r)` by a random `SU(2)` element and relifts both ends by random
/// deck transformations.
fn lens_pair_from_domain<R: Rng + ?Sized>(p: u32, r: &[f64], rng: &mut R) -> (ManifoldPoint, ManifoldPoint) {
    let m = ModelManifold::Lens(p);
    let g = Isometry::su2_from_column(&uniform_sphere(rng, 4));
    let x = deck_image(p, rng.random_range(0..p), &g.apply(&[1.0, 0.0, 0.0, 0.0]));
    let y = deck_image(p, rng.random_range(0..p), &g.apply(r));
    (
        ManifoldPoint { manifold: m, lift: UnitVector::renormalized(x) },
        ManifoldPoint { manifold: m, lift: UnitVector::renormalized(y) },
    )
}

pub fn offcut_pair<R: Rng + ?Sized>(m: &ModelManifold, rng: &mut R) -> (ManifoldPoint, ManifoldPoint) {
    loop {
        let x = random_point(m, rng);
        let y = random_point(m, rng);
        if let Ok(label) = m.classify_pair(&x, &y) {
            if label.tag == StratumTag::OffCut && label.margin > 1e-6 {
                return (x, y);
            }
        }
    }
}

/// A small random displacement of a unit vector: a geodesic step of length at most
/// `radius` in a uniformly random tangent direction.
pub fn perturb<R: Rng + ?Sized>(x: &[f64], radius: f64, rng: &mut R) -> Vec<f64> {
    let d = x.len();
    let w = uniform_sphere(rng, d);
    let t = reject(&w, &[x.to_vec()]);
    let Some(t) = normalized(&t) else {
        return x.to_vec();
    };
    let step = radius * rng.random::<f64>();
    let out = lincomb(step.cos(), x, step.sin(), &t);
    normalized(&out).unwrap_or_else(|| x.to_vec())
}
