//! Model spaces as quotients of unit spheres: round spheres `S^n`, projective spaces
//! `CP^n` and `HP^n` with the submersion metric, and lens spaces `L(p;1) = S^3 / Z_p`.
//!
//! Points carry an ambient unit lift. Geometry never depends on which lift was chosen;
//! only [`ManifoldPoint::canonical_lift`] picks a representative, for output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{
    hyperplane_crossing_time, sphere_distance, sphere_exp, sphere_log_all, GeodesicSegment,
    LogDirections, TangentAtPoint, UnitVector,
};
use crate::lens::deck_image;
use crate::quat::{
    complex_at, complex_i, complex_scale, hermitian, quat_at, quat_hermitian, quat_right_scale,
    Quat,
};
use crate::tol::{Tolerances, ANTIPODAL_TOL, CELL_TOL, COINCIDENT_TOL, TANGENT_TOL};
use crate::vecops::{complement_basis, dot, norm, normalized, reject, sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum ModelManifold {
    Sphere(u32),
    ComplexProjective(u32),
    QuaternionicProjective(u32),
    Lens(u32),
}

impl ModelManifold {
    pub fn sphere(n: u32) -> Result<Self> {
        Self::Sphere(n).validated()
    }

    pub fn cp(n: u32) -> Result<Self> {
        Self::ComplexProjective(n).validated()
    }

    pub fn hp(n: u32) -> Result<Self> {
        Self::QuaternionicProjective(n).validated()
    }

    pub fn lens(p: u32) -> Result<Self> {
        Self::Lens(p).validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Sphere(n) | Self::ComplexProjective(n) | Self::QuaternionicProjective(n) => {
                (1..=64).contains(&n)
            }
            Self::Lens(p) => (3..=100_000).contains(&p),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Unsupported(format!("{self} is outside the supported parameter range")))
        }
    }

    /// Real dimension of the lift sphere's ambient space.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Self::Sphere(n) => n as usize + 1,
            Self::ComplexProjective(n) => 2 * (n as usize + 1),
            Self::QuaternionicProjective(n) => 4 * (n as usize + 1),
            Self::Lens(_) => 4,
        }
    }

    /// Real dimension of the manifold.
    pub fn dim(&self) -> usize {
        match *self {
            Self::Sphere(n) => n as usize,
            Self::ComplexProjective(n) => 2 * n as usize,
            Self::QuaternionicProjective(n) => 4 * n as usize,
            Self::Lens(_) => 3,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Sphere(_) => PI,
            _ => PI / 2.0,
        }
    }

    /// Wraps an exact unit lift.
    pub fn point(&self, lift: Vec<f64>) -> Result<ManifoldPoint> {
        self.check_len(lift.len())?;
        Ok(ManifoldPoint { manifold: *self, lift: UnitVector::new(lift)? })
    }

    /// Normalizes arbitrary nonzero coordinates into a lift.
    pub fn point_normalized(&self, coords: Vec<f64>) -> Result<ManifoldPoint> {
        self.check_len(coords.len())?;
        Ok(ManifoldPoint { manifold: *self, lift: UnitVector::normalize(coords)? })
    }

    pub fn point_from_lift(&self, lift: UnitVector) -> Result<ManifoldPoint> {
        self.check_len(lift.dim())?;
        Ok(ManifoldPoint { manifold: *self, lift })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: len });
        }
        Ok(())
    }

    fn check_pair(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<()> {
        for p in [x, y] {
            if p.manifold != *self {
                return Err(Error::ManifoldMismatch {
                    left: self.to_string(),
                    right: p.manifold.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Basis of the vertical directions at a lift (the tangent space of the fiber).
    pub fn vertical_basis(&self, lift: &[f64]) -> Vec<Vec<f64>> {
        match self {
            Self::Sphere(_) | Self::Lens(_) => Vec::new(),
            Self::ComplexProjective(_) => vec![complex_i(lift)],
            Self::QuaternionicProjective(_) => [Quat::I, Quat::J, Quat::K]
                .iter()
                .map(|q| quat_right_scale(lift, *q))
                .collect(),
        }
    }

    /// Orthonormal basis of the horizontal tangent space at a lift.
    pub fn horizontal_basis(&self, lift: &UnitVector) -> Vec<Vec<f64>> {
        let mut against = vec![lift.coords().to_vec()];
        against.extend(self.vertical_basis(lift.coords()));
        complement_basis(self.ambient_dim(), &against)
    }

    /// Checks that `v` is a horizontal tangent vector at the lift `base`.
    pub fn check_horizontal(&self, v: &TangentAtPoint) -> Result<()> {
        let inner = dot(v.base.coords(), &v.vec);
        if inner.abs() > TANGENT_TOL {
            return Err(Error::NonTangent { inner });
        }
        for w in self.vertical_basis(v.base.coords()) {
            let c = dot(&w, &v.vec);
            if c.abs() > TANGENT_TOL {
                return Err(Error::NonHorizontal { vertical: c });
            }
        }
        Ok(())
    }

    /// Riemannian distance of the quotient metric.
    pub fn distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.lift_distance(x.lift.coords(), y.lift.coords()))
    }

    /// Distance between the classes of two ambient unit vectors.
    pub fn lift_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Self::Sphere(_) => sphere_distance(x, y),
            Self::ComplexProjective(_) | Self::QuaternionicProjective(_) => {
                let (aligned, _) = self.align(x, y);
                sphere_distance(x, &aligned)
            }
            Self::Lens(p) => (0..p)
                .map(|m| sphere_distance(x, &deck_image(p, m, y)))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// For projective spaces: the lift of `y`'s class whose product with `x` is real
    /// and nonnegative, together with the modulus of that product.
    fn align(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
        match self {
            Self::ComplexProjective(_) => {
                let h = hermitian(x, y);
                let s = h.norm();
                if s > 1e-300 {
                    (complex_scale(y, h.conj() / s), s)
                } else {
                    (y.to_vec(), 0.0)
                }
            }
            Self::QuaternionicProjective(_) => {
                let h = quat_hermitian(x, y);
                let s = h.norm();
                if s > 1e-300 {
                    (quat_right_scale(y, h.conj().scale(1.0 / s)), s)
                } else {
                    (y.to_vec(), 0.0)
                }
            }
            _ => (y.to_vec(), dot(x, y)),
        }
    }

    /// Geodesic from the lift of `x` with horizontal unit velocity `v`.
    pub fn exp(&self, x: &ManifoldPoint, v: &TangentAtPoint, t: f64) -> Result<ManifoldPoint> {
        self.check_pair(x, x)?;
        self.check_horizontal(v)?;
        let end = sphere_exp(&x.lift, v, t)?;
        self.point_from_lift(end)
    }

    pub fn minimal_geodesics(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<GeodesicEnumeration> {
        self.minimal_geodesics_with(x, y, &Tolerances::default())
    }

    /// Every minimizing geodesic from `x` to `y`, starting at the given lift of `x`.
    pub fn minimal_geodesics_with(
        &self,
        x: &ManifoldPoint,
        y: &ManifoldPoint,
        tol: &Tolerances,
    ) -> Result<GeodesicEnumeration> {
        self.check_pair(x, y)?;
        let analysis = self.analyze(x, y, tol)?;
        let xl = &x.lift;
        let mut enumeration =
            GeodesicEnumeration { distance: analysis.distance, isolated: Vec::new(), family: None };
        if analysis.tag == StratumTag::Coincident {
            enumeration.distance = 0.0;
            return Ok(enumeration);
        }
        match *self {
            Self::Sphere(n) => {
                let log = sphere_log_all(xl, &y.lift)?;
                match log.directions {
                    LogDirections::Unique { velocity } => {
                        enumeration.isolated.push(GeodesicSegment::new(velocity, log.distance)?)
                    }
                    LogDirections::Antipodal { .. } => {
                        let dir = self.horizontal_basis(xl).swap_remove(0);
                        enumeration.family = Some(GeodesicFamily {
                            family_dim: n as usize - 1,
                            parametrization: FamilyParametrization::EquatorialSphere,
                            representative: GeodesicSegment::new(
                                TangentAtPoint { base: xl.clone(), vec: dir },
                                PI,
                            )?,
                        });
                    }
                    LogDirections::Coincident => {}
                }
            }
            Self::ComplexProjective(_) | Self::QuaternionicProjective(_) => {
                let (aligned, _) = self.align(xl.coords(), y.lift.coords());
                if analysis.tag == StratumTag::ProjectiveCut {
                    // Every lift of y is orthogonal to x; the given one is a representative.
                    let v = reject(&aligned, &[xl.coords().to_vec()]);
                    let v = normalized(&reject(&v, &orthonormal(self.vertical_basis(xl.coords()))))
                        .ok_or(Error::NonUnit { norm: 0.0 })?;
                    let (family_dim, parametrization) = match self {
                        Self::ComplexProjective(_) => (1, FamilyParametrization::PhaseCircle),
                        _ => (3, FamilyParametrization::UnitQuaternionSphere),
                    };
                    enumeration.family = Some(GeodesicFamily {
                        family_dim,
                        parametrization,
                        representative: GeodesicSegment::new(
                            TangentAtPoint { base: xl.clone(), vec: v },
                            PI / 2.0,
                        )?,
                    });
                } else {
                    let target = UnitVector::renormalized(aligned);
                    enumeration.isolated.push(segment_to(xl, &target)?);
                }
            }
            Self::Lens(p) => {
                for &m in &analysis.tie_indices {
                    let target = UnitVector::renormalized(deck_image(p, m, y.lift.coords()));
                    enumeration.isolated.push(segment_to(xl, &target)?);
                }
            }
        }
        Ok(enumeration)
    }

    pub fn classify_pair(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<StratumLabel> {
        self.classify_pair_with(x, y, &Tolerances::default())
    }

    pub fn classify_pair_with(
        &self,
        x: &ManifoldPoint,
        y: &ManifoldPoint,
        tol: &Tolerances,
    ) -> Result<StratumLabel> {
        self.check_pair(x, y)?;
        let a = self.analyze(x, y, tol)?;
        Ok(StratumLabel { tag: a.tag, tie_indices: a.tie_indices, margin: a.margin })
    }

    fn analyze(&self, x: &ManifoldPoint, y: &ManifoldPoint, tol: &Tolerances) -> Result<PairAnalysis> {
        let (xl, yl) = (x.lift.coords(), y.lift.coords());
        match *self {
            Self::Sphere(_) => {
                let d = sphere_distance(xl, yl);
                let c = dot(xl, yl).clamp(-1.0, 1.0);
                let (tag, margin) = if c <= -1.0 + ANTIPODAL_TOL {
                    (StratumTag::SphereAntipodal, ANTIPODAL_TOL - (1.0 + c))
                } else if d < COINCIDENT_TOL {
                    (StratumTag::Coincident, COINCIDENT_TOL - d)
                } else {
                    (StratumTag::OffCut, PI - d)
                };
                let distance = if tag == StratumTag::SphereAntipodal { PI } else { d };
                Ok(PairAnalysis { distance, tag, tie_indices: Vec::new(), margin })
            }
            Self::ComplexProjective(_) | Self::QuaternionicProjective(_) => {
                let (aligned, s) = self.align(xl, yl);
                let d = sphere_distance(xl, &aligned);
                let (tag, margin) = if d < COINCIDENT_TOL {
                    (StratumTag::Coincident, COINCIDENT_TOL - d)
                } else if s <= tol.tie_tol {
                    (StratumTag::ProjectiveCut, tol.tie_tol - s)
                } else if s < tol.ambiguity_limit() {
                    return Err(Error::AmbiguousNearCut { margin: s });
                } else {
                    (StratumTag::OffCut, s)
                };
                let distance = if tag == StratumTag::ProjectiveCut { PI / 2.0 } else { d };
                Ok(PairAnalysis { distance, tag, tie_indices: Vec::new(), margin })
            }
            Self::Lens(p) => lens_analysis(p, xl, yl, tol),
        }
    }

    /// Length of the longest minimizing initial segment of the geodesic with horizontal
    /// unit velocity `v` at the lift of `x`.
    pub fn tangent_cut_time(&self, x: &ManifoldPoint, v: &TangentAtPoint) -> Result<f64> {
        self.check_pair(x, x)?;
        if sphere_distance(v.base.coords(), x.lift.coords()) > 1e-12 {
            return Err(Error::InvalidInput("velocity is not based at the lift of x".into()));
        }
        self.check_horizontal(v)?;
        match *self {
            Self::Sphere(_) => Ok(PI),
            Self::ComplexProjective(_) | Self::QuaternionicProjective(_) => Ok(PI / 2.0),
            Self::Lens(p) => {
                let xl = x.lift.coords();
                let mut best = f64::INFINITY;
                for m in 1..p {
                    let u = sub(xl, &deck_image(p, m, xl));
                    best = best.min(hyperplane_crossing_time(&x.lift, v, &u)?);
                }
                Ok(best)
            }
        }
    }
}

fn orthonormal(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        if let Some(u) = normalized(&reject(&v, &out)) {
            out.push(u);
        }
    }
    out
}

fn segment_to(x: &UnitVector, target: &UnitVector) -> Result<GeodesicSegment> {
    let log = sphere_log_all(x, target)?;
    match log.directions {
        LogDirections::Unique { velocity } => GeodesicSegment::new(velocity, log.distance),
        LogDirections::Coincident => Ok(GeodesicSegment::constant(x.clone())),
        LogDirections::Antipodal { .. } => {
            Err(Error::InvalidInput("lift target is antipodal to the base point".into()))
        }
    }
}

fn lens_analysis(p: u32, x: &[f64], y: &[f64], tol: &Tolerances) -> Result<PairAnalysis> {
    let dists: Vec<f64> = (0..p).map(|m| sphere_distance(x, &deck_image(p, m, y))).collect();
    let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
    if dmin < COINCIDENT_TOL {
        return Ok(PairAnalysis {
            distance: 0.0,
            tag: StratumTag::Coincident,
            tie_indices: Vec::new(),
            margin: COINCIDENT_TOL - dmin,
        });
    }
    let mut ties = Vec::new();
    let mut spread: f64 = 0.0;
    let mut nearest_other = f64::INFINITY;
    for (m, &d) in dists.iter().enumerate() {
        let gap = d - dmin;
        if gap <= tol.tie_tol {
            ties.push(m as u32);
            spread = spread.max(gap);
        } else if gap < tol.ambiguity_limit() {
            return Err(Error::AmbiguousNearCut { margin: gap });
        } else {
            nearest_other = nearest_other.min(gap);
        }
    }
    let margin = if nearest_other.is_finite() { nearest_other } else { tol.tie_tol - spread };
    let tag = match ties.len() {
        1 => StratumTag::OffCut,
        2 => {
            let (a, b) = (ties[0], ties[1]);
            if (a + 1) % p != b && (b + 1) % p != a {
                return Err(Error::NonAdjacentTie { p, indices: ties });
            }
            StratumTag::LensC1
        }
        n if n == p as usize => StratumTag::LensCpMinus1,
        n => return Err(Error::UnexpectedTieMultiplicity { p, count: n }),
    };
    Ok(PairAnalysis { distance: dmin, tag, tie_indices: ties, margin })
}

struct PairAnalysis {
    distance: f64,
    tag: StratumTag,
    tie_indices: Vec<u32>,
    margin: f64,
}

impl fmt::Display for ModelManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sphere(n) => write!(f, "s{n}"),
            Self::ComplexProjective(n) => write!(f, "cp{n}"),
            Self::QuaternionicProjective(n) => write!(f, "hp{n}"),
            Self::Lens(p) => write!(f, "lens{p}"),
        }
    }
}

impl FromStr for ModelManifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadManifoldSpec(s.to_string());
        let t = s.trim().to_ascii_lowercase();
        let (ctor, rest): (fn(u32) -> ModelManifold, &str) = if let Some(r) = t.strip_prefix("lens") {
            (ModelManifold::Lens, r)
        } else if let Some(r) = t.strip_prefix("cp") {
            (ModelManifold::ComplexProjective, r)
        } else if let Some(r) = t.strip_prefix("hp") {
            (ModelManifold::QuaternionicProjective, r)
        } else if let Some(r) = t.strip_prefix('s') {
            (ModelManifold::Sphere, r)
        } else {
            return Err(bad());
        };
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let n: u32 = rest.parse().map_err(|_| bad())?;
        ctor(n).validated()
    }
}

/// A point of a model manifold, stored as one of its unit lifts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldPoint {
    pub manifold: ModelManifold,
    pub lift: UnitVector,
}

impl PartialEq for ManifoldPoint {
    /// Equality of equivalence classes.
    fn eq(&self, other: &Self) -> bool {
        self.manifold == other.manifold
            && self.lift.dim() == other.lift.dim()
            && self.manifold.lift_distance(self.lift.coords(), other.lift.coords()) < COINCIDENT_TOL
    }
}

impl ManifoldPoint {
    pub fn coords(&self) -> &[f64] {
        self.lift.coords()
    }

    /// Index of the first homogeneous coordinate with nonzero modulus (projective
    /// spaces and lens spaces); `None` for spheres.
    pub fn leading_cell(&self) -> Option<usize> {
        let v = self.lift.coords();
        match self.manifold {
            ModelManifold::Sphere(_) => None,
            ModelManifold::ComplexProjective(_) | ModelManifold::Lens(_) => {
                (0..v.len() / 2).find(|&k| complex_at(v, k).norm() > CELL_TOL)
            }
            ModelManifold::QuaternionicProjective(_) => {
                (0..v.len() / 4).find(|&k| quat_at(v, k).norm() > CELL_TOL)
            }
        }
    }

    /// Deterministic representative of the class, for hashing and output.
    ///
    /// Projective spaces: the leading homogeneous coordinate made real and positive.
    /// Lens spaces: the deck image whose leading complex coordinate has phase in
    /// `[0, 2 pi / p)`.
    pub fn canonical_lift(&self) -> UnitVector {
        let v = self.lift.coords();
        let Some(k) = self.leading_cell() else {
            return self.lift.clone();
        };
        match self.manifold {
            ModelManifold::Sphere(_) => self.lift.clone(),
            ModelManifold::ComplexProjective(_) => {
                let z = complex_at(v, k);
                UnitVector::renormalized(complex_scale(v, z.conj() / z.norm()))
            }
            ModelManifold::QuaternionicProjective(_) => {
                let q = quat_at(v, k);
                UnitVector::renormalized(quat_right_scale(v, q.conj().scale(1.0 / q.norm())))
            }
            ModelManifold::Lens(p) => {
                let z = complex_at(v, k);
                let step = 2.0 * PI / p as f64;
                let phase = z.arg().rem_euclid(2.0 * PI);
                let shift = (phase / step).floor() as i64;
                let m = (-shift).rem_euclid(p as i64) as u32;
                let out = deck_image(p, m, v);
                // Guard against the phase landing exactly on 2 pi / p after rounding.
                let ph = complex_at(&out, k).arg().rem_euclid(2.0 * PI);
                if ph >= step - 1e-15 && ph > 0.0 {
                    UnitVector::renormalized(deck_image(p, (m + 1) % p, v))
                } else {
                    UnitVector::renormalized(out)
                }
            }
        }
    }

    /// The same class with a different lift, obtained by multiplying the lift by a unit
    /// scalar (complex phase, right unit quaternion, or deck index `m` for lens spaces).
    pub fn relifted(&self, scalar: LiftScalar) -> Result<ManifoldPoint> {
        let v = self.lift.coords();
        let out = match (self.manifold, scalar) {
            (ModelManifold::Sphere(_), LiftScalar::Identity) => v.to_vec(),
            (ModelManifold::ComplexProjective(_), LiftScalar::Phase(t)) => {
                complex_scale(v, Complex64::from_polar(1.0, t))
            }
            (ModelManifold::QuaternionicProjective(_), LiftScalar::Quaternion(q)) => {
                quat_right_scale(v, q.normalized())
            }
            (ModelManifold::Lens(p), LiftScalar::Deck(m)) => deck_image(p, m % p, v),
            (_, LiftScalar::Identity) => v.to_vec(),
            _ => return Err(Error::InvalidInput("lift scalar does not match manifold".into())),
        };
        self.manifold.point_from_lift(UnitVector::renormalized(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiftScalar {
    Identity,
    Phase(f64),
    Quaternion(Quat),
    Deck(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumTag {
    OffCut,
    SphereAntipodal,
    ProjectiveCut,
    LensC1,
    LensCpMinus1,
    Coincident,
}

impl StratumTag {
    pub fn is_cut(&self) -> bool {
        !matches!(self, Self::OffCut | Self::Coincident)
    }
}

/// Which cut stratum (if any) a pair lies on.
///
/// For lens spaces `tie_indices` lists every deck index `m` (relative to the lifts used)
/// for which `Psi_m` applied to the lift of `y` is nearest to the lift of `x`; it is empty
/// for the other models. `margin` is the distance gap to the nearest competing
/// classification, or the unused slack of the tie tolerance when nothing competes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumLabel {
    pub tag: StratumTag,
    pub tie_indices: Vec<u32>,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyParametrization {
    /// All unit tangent directions at the base point.
    EquatorialSphere,
    /// Unit complex multiples of the representative velocity.
    PhaseCircle,
    /// Right unit-quaternion multiples of the representative velocity.
    UnitQuaternionSphere,
}

/// A continuous family of minimizing geodesics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicFamily {
    pub family_dim: usize,
    pub parametrization: FamilyParametrization,
    pub representative: GeodesicSegment,
}

impl GeodesicFamily {
    /// Euclidean distance from a unit initial velocity to the family's velocity set.
    pub fn velocity_error(&self, v: &[f64]) -> f64 {
        let rep = &self.representative.initial_velocity.vec;
        match self.parametrization {
            FamilyParametrization::EquatorialSphere => {
                let base = self.representative.start.coords();
                (norm(v) - 1.0).abs() + dot(base, v).abs()
            }
            FamilyParametrization::PhaseCircle => {
                let h = hermitian(rep, v);
                let phase = if h.norm() > 0.0 { h / h.norm() } else { Complex64::new(1.0, 0.0) };
                norm(&sub(v, &complex_scale(rep, phase)))
            }
            FamilyParametrization::UnitQuaternionSphere => {
                let h = quat_hermitian(rep, v);
                let unit = if h.norm() > 0.0 { h.scale(1.0 / h.norm()) } else { Quat::ONE };
                norm(&sub(v, &quat_right_scale(rep, unit)))
            }
        }
    }
}

/// The complete set of minimizing geodesics between two points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicEnumeration {
    pub distance: f64,
    pub isolated: Vec<GeodesicSegment>,
    pub family: Option<GeodesicFamily>,
}

impl GeodesicEnumeration {
    /// Whether `v` (unit, at the same lift) is the initial velocity of some minimizer,
    /// within `tol`.
    pub fn contains_velocity(&self, v: &[f64], tol: f64) -> bool {
        self.isolated.iter().any(|s| crate::vecops::dist(&s.initial_velocity.vec, v) <= tol)
            || self.family.as_ref().is_some_and(|f| f.velocity_error(v) <= tol)
    }

    pub fn count(&self) -> usize {
        self.isolated.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parse_specs() {
        assert_eq!("s3".parse::<ModelManifold>().unwrap(), ModelManifold::Sphere(3));
        assert_eq!("cp2".parse::<ModelManifold>().unwrap(), ModelManifold::ComplexProjective(2));
        assert_eq!("hp1".parse::<ModelManifold>().unwrap(), ModelManifold::QuaternionicProjective(1));
        assert_eq!("lens7".parse::<ModelManifold>().unwrap(), ModelManifold::Lens(7));
        for bad in ["lens2", "s0", "x3", "cp", "lens-3", "s3.5"] {
            assert!(bad.parse::<ModelManifold>().is_err(), "{bad}");
        }
        assert_eq!(ModelManifold::Lens(7).to_string(), "lens7");
    }

    #[test]
    fn lens_circle_distance() {
        for p in [3, 5, 8] {
            let m = ModelManifold::Lens(p);
            let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
            let y = m.point(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
            assert_abs_diff_eq!(m.distance(&x, &y).unwrap(), PI / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn cp_orthogonal_lifts_at_diameter() {
        let m = ModelManifold::ComplexProjective(2);
        let x = m.point(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let y = m.point(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(m.distance(&x, &y).unwrap(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn sphere_self_distance_zero() {
        let m = ModelManifold::Sphere(2);
        let x = m.point(vec![0.0, 0.6, 0.8]).unwrap();
        assert_eq!(m.distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_manifolds_rejected() {
        let a = ModelManifold::Lens(3);
        let b = ModelManifold::Lens(5);
        let x = a.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let y = b.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(a.distance(&x, &y), Err(Error::ManifoldMismatch { .. })));
    }

    #[test]
    fn lens_canonical_lift_is_lift_independent() {
        let m = ModelManifold::Lens(5);
        let x = m.point_normalized(vec![0.3, -0.7, 0.2, 0.5]).unwrap();
        let c0 = x.canonical_lift();
        for j in 1..5 {
            let c = x.relifted(LiftScalar::Deck(j)).unwrap().canonical_lift();
            assert_abs_diff_eq!(c.coords(), c0.coords(), epsilon = 1e-14);
        }
        let z = complex_at(c0.coords(), 0);
        let ph = z.arg().rem_euclid(2.0 * PI);
        assert!((0.0..2.0 * PI / 5.0).contains(&ph));
    }

    #[test]
    fn projective_canonical_lift_has_real_positive_leader() {
        let m = ModelManifold::QuaternionicProjective(1);
        let x = m.point_normalized(vec![0.0, 0.0, 0.0, 0.0, 0.3, -0.2, 0.5, 0.1]).unwrap();
        assert_eq!(x.leading_cell(), Some(1));
        let c = x.canonical_lift();
        let q = quat_at(c.coords(), 1);
        assert!(q.0[0] > 0.0);
        assert_abs_diff_eq!(&q.0[1..], [0.0, 0.0, 0.0].as_slice(), epsilon = 1e-15);
        assert!(x == m.point_from_lift(c).unwrap());
    }
}
