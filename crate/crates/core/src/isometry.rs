//! Isometries of the model spaces acting on lifts.
//!
//! Spheres: orthogonal matrices. `CP^n`: unitary matrices. `HP^n`: quaternionic unitary
//! matrices acting on the left (commuting with the right scalar identification).
//! `L(p;1)`: `SU(2)` acting on `(z1, z2)` through `[[a, -conj b], [b, conj a]]`, which
//! commutes with the diagonal deck action.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quat::{complex_at, quat_at, Quat};
use crate::geometry::UnitVector;
use crate::space::{ManifoldPoint, ModelManifold};

const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Isometry {
    Rotation(DMatrix<f64>),
    Unitary(DMatrix<Complex64>),
    /// Row-major quaternionic matrix; `(g x)_k = sum_l g[k][l] x_l`.
    QuaternionicUnitary(Vec<Vec<Quat>>),
    SpecialUnitary2 { a: Complex64, b: Complex64 },
}

impl Isometry {
    pub fn identity(m: &ModelManifold) -> Self {
        match *m {
            ModelManifold::Sphere(_) => Self::Rotation(DMatrix::identity(m.ambient_dim(), m.ambient_dim())),
            ModelManifold::ComplexProjective(n) => {
                Self::Unitary(DMatrix::identity(n as usize + 1, n as usize + 1))
            }
            ModelManifold::QuaternionicProjective(n) => {
                let k = n as usize + 1;
                Self::QuaternionicUnitary(
                    (0..k)
                        .map(|i| (0..k).map(|j| if i == j { Quat::ONE } else { Quat([0.0; 4]) }).collect())
                        .collect(),
                )
            }
            ModelManifold::Lens(_) => Self::SpecialUnitary2 { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) },
        }
    }

    /// The `SU(2)` element sending `(1, 0)` to the unit vector `(a, b)` of `C^2`.
    pub fn su2_from_column(v: &[f64]) -> Self {
        Self::SpecialUnitary2 { a: complex_at(v, 0), b: complex_at(v, 1) }
    }

    /// Largest entry of `g^* g - I` (for `SU(2)`, the deviation of `|a|^2 + |b|^2` from 1).
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            Self::Rotation(g) => max_abs_real(&(g.transpose() * g - DMatrix::identity(g.ncols(), g.ncols()))),
            Self::Unitary(g) => {
                let d = g.adjoint() * g - DMatrix::<Complex64>::identity(g.ncols(), g.ncols());
                d.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
            Self::QuaternionicUnitary(g) => {
                let k = g.len();
                let mut worst: f64 = 0.0;
                for i in 0..k {
                    for j in 0..k {
                        let mut s = Quat([0.0; 4]);
                        for row in g {
                            s = s.add(row[i].conj().mul(row[j]));
                        }
                        if i == j {
                            s.0[0] -= 1.0;
                        }
                        worst = worst.max(s.norm());
                    }
                }
                worst
            }
            Self::SpecialUnitary2 { a, b } => (a.norm_sqr() + b.norm_sqr() - 1.0).abs(),
        }
    }

    fn fits(&self, m: &ModelManifold) -> bool {
        match (self, *m) {
            (Self::Rotation(g), ModelManifold::Sphere(_)) => g.nrows() == m.ambient_dim() && g.is_square(),
            (Self::Unitary(g), ModelManifold::ComplexProjective(n)) => g.nrows() == n as usize + 1 && g.is_square(),
            (Self::QuaternionicUnitary(g), ModelManifold::QuaternionicProjective(n)) => {
                g.len() == n as usize + 1 && g.iter().all(|r| r.len() == g.len())
            }
            (Self::SpecialUnitary2 { .. }, ModelManifold::Lens(_)) => true,
            _ => false,
        }
    }

    /// `g` applied to a raw lift vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::Rotation(g) => (g * DVector::from_column_slice(v)).as_slice().to_vec(),
            Self::Unitary(g) => {
                let z = DVector::<Complex64>::from_iterator(v.len() / 2, (0..v.len() / 2).map(|k| complex_at(v, k)));
                (g * z).iter().flat_map(|c| [c.re, c.im]).collect()
            }
            Self::QuaternionicUnitary(g) => g
                .iter()
                .flat_map(|row| {
                    row.iter()
                        .enumerate()
                        .fold(Quat([0.0; 4]), |acc, (l, q)| acc.add(q.mul(quat_at(v, l))))
                        .0
                })
                .collect(),
            Self::SpecialUnitary2 { a, b } => {
                let (z1, z2) = (complex_at(v, 0), complex_at(v, 1));
                let w1 = a * z1 - b.conj() * z2;
                let w2 = b * z1 + a.conj() * z2;
                vec![w1.re, w1.im, w2.re, w2.im]
            }
        }
    }

    pub fn act(&self, m: &ModelManifold, x: &ManifoldPoint) -> Result<ManifoldPoint> {
        if !self.fits(m) || x.manifold != *m {
            return Err(Error::IsometryMismatch { manifold: m.to_string() });
        }
        let deviation = self.unitarity_defect();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        m.point_from_lift(UnitVector::renormalized(self.apply(x.coords())))
    }
}

fn max_abs_real(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

pub fn random_isometry(m: &ModelManifold, seed: u64) -> Isometry {
    random_isometry_with(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Haar-distributed isometry (QR of a Gaussian matrix with the sign/phase fix).
pub fn random_isometry_with<R: Rng + ?Sized>(m: &ModelManifold, rng: &mut R) -> Isometry {
    match *m {
        ModelManifold::Sphere(_) => {
            let d = m.ambient_dim();
            let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
            let qr = g.qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..d {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            Isometry::Rotation(q)
        }
        ModelManifold::ComplexProjective(n) => {
            let d = n as usize + 1;
            let g = DMatrix::<Complex64>::from_fn(d, d, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let qr = g.qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..d {
                let rj = r[(j, j)];
                if rj.norm() > 0.0 {
                    let phase = rj / rj.norm();
                    let mut col = q.column_mut(j);
                    col *= phase;
                }
            }
            Isometry::Unitary(q)
        }
        ModelManifold::QuaternionicProjective(n) => {
            let d = n as usize + 1;
            Isometry::QuaternionicUnitary(random_quaternionic_unitary(d, rng))
        }
        ModelManifold::Lens(_) => {
            let v: Vec<f64> = crate::sampling::uniform_sphere(rng, 4);
            Isometry::su2_from_column(&v)
        }
    }
}

/// Gram-Schmidt on Gaussian quaternionic columns, projections taken with right scalars.
fn random_quaternionic_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<Quat>> {
    let mut cols: Vec<Vec<Quat>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<Quat> = (0..d)
            .map(|_| Quat(std::array::from_fn(|_| rng.sample(StandardNormal))))
            .collect();
        for _ in 0..2 {
            for u in &cols {
                let c = u.iter().zip(&v).fold(Quat([0.0; 4]), |acc, (a, b)| acc.add(a.conj().mul(*b)));
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi = vi.add(ui.mul(c).scale(-1.0));
                }
            }
        }
        let n = v.iter().map(|q| q.norm() * q.norm()).sum::<f64>().sqrt();
        if n > 1e-8 {
            cols.push(v.into_iter().map(|q| q.scale(1.0 / n)).collect());
        }
    }
    (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::dist;
    use std::f64::consts::PI;

    fn manifolds() -> Vec<ModelManifold> {
        vec![
            ModelManifold::Sphere(2),
            ModelManifold::Sphere(5),
            ModelManifold::ComplexProjective(2),
            ModelManifold::QuaternionicProjective(2),
            ModelManifold::Lens(5),
        ]
    }

    #[test]
    fn random_isometries_are_unitary() {
        for m in manifolds() {
            for seed in 0..5 {
                let g = random_isometry(&m, seed);
                assert!(g.unitarity_defect() < 1e-12, "{m} {seed}");
            }
        }
    }

    #[test]
    fn identity_fixes_points() {
        for m in manifolds() {
            let x = crate::sampling::random_point(&m, &mut ChaCha8Rng::seed_from_u64(3));
            let y = Isometry::identity(&m).act(&m, &x).unwrap();
            assert!(dist(x.coords(), y.coords()) < 1e-15);
        }
    }

    #[test]
    fn lens_isotropy_fixes_base_point() {
        let p = 7;
        let m = ModelManifold::Lens(p);
        let t = 2.0 * PI / p as f64;
        let g = Isometry::SpecialUnitary2 { a: Complex64::from_polar(1.0, t), b: Complex64::new(0.0, 0.0) };
        let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let gx = g.act(&m, &x).unwrap();
        assert!(gx == x);
        assert!(dist(gx.coords(), x.coords()) > 0.5);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = ModelManifold::Lens(3);
        let g = Isometry::SpecialUnitary2 { a: Complex64::new(1.1, 0.0), b: Complex64::new(0.0, 0.0) };
        let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(g.act(&m, &x), Err(Error::NotUnitary { .. })));
        let s = ModelManifold::Sphere(2);
        let sx = s.point(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(g.act(&s, &sx), Err(Error::IsometryMismatch { .. })));
    }

    #[test]
    fn isometries_preserve_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in manifolds() {
            let g = random_isometry_with(&m, &mut rng);
            for _ in 0..20 {
                let x = crate::sampling::random_point(&m, &mut rng);
                let y = crate::sampling::random_point(&m, &mut rng);
                let d0 = m.distance(&x, &y).unwrap();
                let d1 = m.distance(&g.act(&m, &x).unwrap(), &g.act(&m, &y).unwrap()).unwrap();
                assert!((d0 - d1).abs() < 1e-9, "{m}");
            }
        }
    }
}
