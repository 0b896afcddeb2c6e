//! Geodesic motion planners built from explicit decompositions of `M x M`.
//!
//! Piece 0 is always the complement of the total cut locus, where the minimizer is
//! unique. The remaining pieces split the cut locus so that a continuous choice of
//! minimizer exists on each one:
//!
//! * odd spheres: one antipodal piece, using the complex structure of `R^{n+1}`;
//! * even spheres: antipodal pairs with `x != N`, using a field that vanishes only at
//!   `N = e_0`, and the single pair `(N, -N)`;
//! * `CP^n`, `HP^n`: cut pairs grouped by the sum of the leading cell indices of the
//!   two points, with the arc between canonical lifts;
//! * `L(p;1)`: the two-geodesic stratum (pick the tie index whose successor is the
//!   other) and four pieces over the `p`-geodesic stratum, organized by a left-invariant
//!   frame of `S^3` that descends to the quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{GeodesicSegment, TangentAtPoint, UnitVector};
use crate::isometry::Isometry;
use crate::lens::deck_image;
use crate::quat::{complex_at, complex_i, complex_scale, quat_at, quat_right_scale, Quat};
use crate::sampling::{fiber_orthogonal, perturb, random_point, stratum_pair, uniform_sphere};
use crate::space::{ManifoldPoint, ModelManifold, StratumLabel, StratumTag};
use crate::tol::Tolerances;
use crate::vecops::{dist, dot, normalized, reject, scale};

pub const DEFAULT_PATH_SAMPLES: usize = 64;

/// Which frame field of `S^3` supplies the reference direction on the `p`-geodesic stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameReference {
    /// `q -> q i`, used wherever its projection to the candidate plane is nonzero.
    First,
    /// `q -> q j`, used on the two Hopf circles `z1 = 0` and `z2 = 0`.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    OffCut,
    AntipodalField,
    AntipodalPunctured,
    AntipodalPole,
    ProjectiveCells { cell_sum: usize },
    LensAdjacentTie,
    LensFrame { reference: FrameReference, aligned: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub id: usize,
    pub kind: PieceKind,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionLedger {
    pub constructed_count: usize,
    /// Pieces that contain at least one pair.
    pub nonempty_count: usize,
    /// Best upper bound on the geodesic complexity known from theory.
    pub known_bound: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub manifold: ModelManifold,
    pub pieces: Vec<Piece>,
    pub ledger: DecompositionLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionPlan {
    pub piece_id: usize,
    pub segment: GeodesicSegment,
    pub samples: Vec<ManifoldPoint>,
}

/// North pole and reference tangent for even spheres.
const POLE: usize = 0;
const POLE_DIRECTION: usize = 1;

pub fn build_decomposition(m: &ModelManifold) -> Result<Decomposition> {
    let m = m.validated()?;
    let mut kinds = vec![(PieceKind::OffCut, "pairs joined by a unique minimizing geodesic".to_string())];
    let (known_bound, note) = match m {
        ModelManifold::Sphere(n) if n % 2 == 1 => {
            kinds.push((
                PieceKind::AntipodalField,
                "antipodal pairs, geodesic in the direction of the complex structure J(x)".into(),
            ));
            (2, "odd spheres: the constructed count equals the topological complexity".to_string())
        }
        ModelManifold::Sphere(_) => {
            kinds.push((
                PieceKind::AntipodalPunctured,
                "antipodal pairs with x != e0, geodesic along a field vanishing only at e0".into(),
            ));
            kinds.push((PieceKind::AntipodalPole, "the single pair (e0, -e0), geodesic along e1".into()));
            (3, "even spheres: the constructed count equals the topological complexity".to_string())
        }
        ModelManifold::ComplexProjective(n) | ModelManifold::QuaternionicProjective(n) => {
            for s in 0..=2 * n as usize {
                let text = if s == 2 * n as usize {
                    format!("cut pairs with leading cells summing to {s} (empty)")
                } else {
                    format!("cut pairs with leading cells summing to {s}, arc between canonical lifts")
                };
                kinds.push((PieceKind::ProjectiveCells { cell_sum: s }, text));
            }
            (
                2 * n as usize + 1,
                format!(
                    "one cut piece per cell-index sum 0..={}; the last is empty, so {} pieces are \
                     nonempty, matching the known bound 2n+1 = {}",
                    2 * n,
                    2 * n + 1,
                    2 * n + 1
                ),
            )
        }
        ModelManifold::Lens(_) => {
            kinds.push((
                PieceKind::LensAdjacentTie,
                "two minimizers with adjacent deck indices {m, m+1}; choose m".into(),
            ));
            for (reference, aligned, text) in [
                (FrameReference::First, false, "p minimizers, q i reference, nearest candidate strictly ahead"),
                (FrameReference::First, true, "p minimizers, q i reference, a candidate aligned with it"),
                (FrameReference::Second, false, "p minimizers on z1 = 0 or z2 = 0, q j reference, strictly ahead"),
                (FrameReference::Second, true, "p minimizers on z1 = 0 or z2 = 0, q j reference, aligned"),
            ] {
                kinds.push((PieceKind::LensFrame { reference, aligned }, text.to_string()));
            }
            (
                7,
                "frame construction over the p-geodesic stratum uses 4 pieces; continuity is \
                 checked numerically by the continuity probe"
                    .to_string(),
            )
        }
    };
    let pieces: Vec<Piece> = kinds
        .into_iter()
        .enumerate()
        .map(|(id, (kind, description))| Piece { id, kind, description })
        .collect();
    let nonempty_count = pieces.iter().filter(|p| !piece_is_empty(&m, p.kind)).count();
    Ok(Decomposition {
        manifold: m,
        ledger: DecompositionLedger { constructed_count: pieces.len(), nonempty_count, known_bound, note },
        pieces,
    })
}

/// Whether a piece contains no pair at all (the top projective cell sum).
pub fn piece_is_empty(m: &ModelManifold, kind: PieceKind) -> bool {
    match (kind, *m) {
        (PieceKind::ProjectiveCells { cell_sum }, ModelManifold::ComplexProjective(n))
        | (PieceKind::ProjectiveCells { cell_sum }, ModelManifold::QuaternionicProjective(n)) => {
            cell_sum >= 2 * n as usize
        }
        _ => false,
    }
}

impl Decomposition {
    pub fn piece(&self, id: usize) -> Result<&Piece> {
        self.pieces.get(id).ok_or(Error::NoPiece)
    }

    /// Ids of every piece whose membership predicate accepts the pair.
    pub fn accepting(&self, x: &ManifoldPoint, y: &ManifoldPoint, tol: &Tolerances) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            if p.contains(&self.manifold, x, y, tol)? {
                out.push(p.id);
            }
        }
        Ok(out)
    }

    /// The unique piece containing the pair.
    pub fn locate(&self, x: &ManifoldPoint, y: &ManifoldPoint, tol: &Tolerances) -> Result<&Piece> {
        let ids = self.accepting(x, y, tol)?;
        match ids.as_slice() {
            [] => Err(Error::NoPiece),
            [id] => Ok(&self.pieces[*id]),
            _ => Err(Error::OverlappingPieces { ids }),
        }
    }
}

impl Piece {
    pub fn contains(&self, m: &ModelManifold, x: &ManifoldPoint, y: &ManifoldPoint, tol: &Tolerances) -> Result<bool> {
        let label = m.classify_pair_with(x, y, tol)?;
        Ok(match self.kind {
            PieceKind::OffCut => matches!(label.tag, StratumTag::OffCut | StratumTag::Coincident),
            PieceKind::AntipodalField => label.tag == StratumTag::SphereAntipodal,
            PieceKind::AntipodalPunctured => {
                label.tag == StratumTag::SphereAntipodal && !at_pole(x.coords(), tol)?
            }
            PieceKind::AntipodalPole => label.tag == StratumTag::SphereAntipodal && at_pole(x.coords(), tol)?,
            PieceKind::ProjectiveCells { cell_sum } => {
                label.tag == StratumTag::ProjectiveCut && cell_pair(x, y)?.0 + cell_pair(x, y)?.1 == cell_sum
            }
            PieceKind::LensAdjacentTie => label.tag == StratumTag::LensC1,
            PieceKind::LensFrame { reference, aligned } => {
                if label.tag != StratumTag::LensCpMinus1 {
                    false
                } else {
                    let f = lens_frame(m, x, y, tol)?;
                    f.reference == reference && f.aligned == aligned
                }
            }
        })
    }

    /// The geodesic the planner assigns to a member pair, starting at the lift of `x`.
    pub fn section(&self, m: &ModelManifold, x: &ManifoldPoint, y: &ManifoldPoint, tol: &Tolerances) -> Result<GeodesicSegment> {
        if !self.contains(m, x, y, tol)? {
            return Err(Error::NoPiece);
        }
        let xl = &x.lift;
        match self.kind {
            PieceKind::OffCut => {
                let e = m.minimal_geodesics_with(x, y, tol)?;
                Ok(e.isolated.into_iter().next().unwrap_or_else(|| GeodesicSegment::constant(xl.clone())))
            }
            PieceKind::AntipodalField => {
                let v: Vec<f64> = xl.coords().chunks(2).flat_map(|c| [-c[1], c[0]]).collect();
                GeodesicSegment::new(TangentAtPoint::new(xl.clone(), v)?, PI)
            }
            PieceKind::AntipodalPunctured => {
                let v = normalized(&pole_field(xl.coords())).ok_or(Error::NoPiece)?;
                GeodesicSegment::new(TangentAtPoint::projected(xl.clone(), &v)?, PI)
            }
            PieceKind::AntipodalPole => {
                let v = UnitVector::basis(xl.dim(), POLE_DIRECTION).into_inner();
                GeodesicSegment::new(TangentAtPoint::projected(xl.clone(), &v)?, PI)
            }
            PieceKind::ProjectiveCells { .. } => {
                let yc = y.canonical_lift();
                let k = x.leading_cell().ok_or(Error::NoPiece)?;
                // The given lift is the canonical one times a unit scalar mu; transport the
                // velocity from the canonical lift by the same scalar.
                let v = match m {
                    ModelManifold::ComplexProjective(_) => {
                        let z = complex_at(xl.coords(), k);
                        complex_scale(yc.coords(), z / z.norm())
                    }
                    _ => {
                        let q = quat_at(xl.coords(), k);
                        quat_right_scale(yc.coords(), q.normalized())
                    }
                };
                let v = normalized(&reject(&v, &[xl.coords().to_vec()])).ok_or(Error::NoPiece)?;
                GeodesicSegment::new(TangentAtPoint::new(xl.clone(), v)?, PI / 2.0)
            }
            PieceKind::LensAdjacentTie => {
                let ModelManifold::Lens(p) = *m else { return Err(Error::NoPiece) };
                let label = m.classify_pair_with(x, y, tol)?;
                let chosen = adjacent_choice(p, &label)?;
                let e = m.minimal_geodesics_with(x, y, tol)?;
                let i = label.tie_indices.iter().position(|&t| t == chosen).ok_or(Error::NoPiece)?;
                Ok(e.isolated[i].clone())
            }
            PieceKind::LensFrame { .. } => {
                let f = lens_frame(m, x, y, tol)?;
                let label = m.classify_pair_with(x, y, tol)?;
                let e = m.minimal_geodesics_with(x, y, tol)?;
                let i = label.tie_indices.iter().position(|&t| t == f.selected).ok_or(Error::NoPiece)?;
                Ok(e.isolated[i].clone())
            }
        }
    }
}

fn at_pole(x: &[f64], tol: &Tolerances) -> Result<bool> {
    let d = dist(x, &UnitVector::basis(x.len(), POLE).into_inner());
    if d <= tol.tie_tol {
        Ok(true)
    } else if d < tol.ambiguity_limit() {
        Err(Error::AmbiguousNearCut { margin: d })
    } else {
        Ok(false)
    }
}

/// `V(x) = (1 - <x, N>) a - <a, x> (x - N)`: tangent to the sphere, zero only at `N`.
fn pole_field(x: &[f64]) -> Vec<f64> {
    let (xn, xa) = (x[POLE], x[POLE_DIRECTION]);
    let mut v: Vec<f64> = x.iter().map(|c| -xa * c).collect();
    v[POLE] += xa;
    v[POLE_DIRECTION] += 1.0 - xn;
    v
}

/// Real coordinates per homogeneous coordinate.
fn cell_block(m: &ModelManifold) -> usize {
    match m {
        ModelManifold::QuaternionicProjective(_) => 4,
        _ => 2,
    }
}

fn cell_pair(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<(usize, usize)> {
    Ok((x.leading_cell().ok_or(Error::NoPiece)?, y.leading_cell().ok_or(Error::NoPiece)?))
}

/// For ties `{m, m+1 mod p}`, the index `m`.
fn adjacent_choice(p: u32, label: &StratumLabel) -> Result<u32> {
    match label.tie_indices.as_slice() {
        &[a, b] if (a + 1) % p == b => Ok(a),
        &[a, b] if (b + 1) % p == a => Ok(b),
        _ => Err(Error::NonAdjacentTie { p, indices: label.tie_indices.clone() }),
    }
}

/// Frame data for a pair on the `p`-geodesic stratum of `L(p;1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameChoice {
    pub reference: FrameReference,
    /// Unit reference direction in the plane of candidate velocities.
    pub rho: Vec<f64>,
    /// `(deck index, angular offset in [0, 2 pi))` for each candidate, measured from
    /// `rho` towards `i rho`.
    pub offsets: Vec<(u32, f64)>,
    pub aligned: bool,
    pub selected: u32,
}

/// The candidate velocities `Psi_m y` span the complex line orthogonal to `x`; measure
/// their angles from a frame-derived reference direction and pick the smallest.
pub fn lens_frame(m: &ModelManifold, x: &ManifoldPoint, y: &ManifoldPoint, tol: &Tolerances) -> Result<FrameChoice> {
    let ModelManifold::Lens(p) = *m else {
        return Err(Error::Unsupported(format!("frame pieces are defined for lens spaces, not {m}")));
    };
    let (reference, rho) = reference_direction(x.coords(), tol)?;
    let offsets = candidate_offsets(p, &rho, y.coords());
    let (near_k, near) = offsets
        .iter()
        .map(|&(k, phi)| (k, signed_angle(phi).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::EmptyInput)?;
    let (aligned, selected) = if near <= tol.tie_tol {
        (true, near_k)
    } else if near < tol.ambiguity_limit() {
        return Err(Error::AmbiguousNearCut { margin: near });
    } else {
        let (k, _) = offsets.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).ok_or(Error::EmptyInput)?;
        (false, k)
    };
    Ok(FrameChoice { reference, rho, offsets, aligned, selected })
}

fn signed_angle(phi: f64) -> f64 {
    if phi > PI {
        phi - TAU
    } else {
        phi
    }
}

/// Normalized projection of `q i` onto the complex line orthogonal to `q`, or of `q j`
/// where that projection vanishes (exactly when `z1 = 0` or `z2 = 0`).
fn reference_direction(x: &[f64], tol: &Tolerances) -> Result<(FrameReference, Vec<f64>)> {
    let against = [x.to_vec(), complex_i(x)];
    let e1 = reject(&quat_right_scale(x, Quat::I), &against);
    let nu = e1.iter().map(|c| c * c).sum::<f64>().sqrt();
    if nu > tol.ambiguity_limit() {
        Ok((FrameReference::First, scale(&e1, 1.0 / nu)))
    } else if nu <= tol.tie_tol {
        let e2 = reject(&quat_right_scale(x, Quat::J), &against);
        Ok((FrameReference::Second, normalized(&e2).ok_or(Error::NoPiece)?))
    } else {
        Err(Error::AmbiguousNearCut { margin: nu })
    }
}

/// Angle of each `Psi_k y` from `rho` towards `i rho`, in `[0, 2 pi)`.
fn candidate_offsets(p: u32, rho: &[f64], y: &[f64]) -> Vec<(u32, f64)> {
    let jrho = complex_i(rho);
    (0..p)
        .map(|k| {
            let v = deck_image(p, k, y);
            (k, dot(&v, &jrho).atan2(dot(&v, rho)).rem_euclid(TAU))
        })
        .collect()
}

pub fn plan(m: &ModelManifold, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<MotionPlan> {
    let d = build_decomposition(m)?;
    plan_with(&d, x, y, DEFAULT_PATH_SAMPLES, &Tolerances::default())
}

pub fn plan_with(
    d: &Decomposition,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    sample_count: usize,
    tol: &Tolerances,
) -> Result<MotionPlan> {
    if sample_count < 2 {
        return Err(Error::InvalidInput(format!("path sample count {sample_count} (need >= 2)")));
    }
    let m = d.manifold;
    let piece = d.locate(x, y, tol)?;
    let segment = piece.section(&m, x, y, tol)?;
    let samples = (0..sample_count)
        .map(|i| {
            let t = segment.length * i as f64 / (sample_count - 1) as f64;
            ManifoldPoint { manifold: m, lift: segment.point_at(t) }
        })
        .collect();
    Ok(MotionPlan { piece_id: piece.id, segment, samples })
}

/// Initial velocity scaled by the length of the plan.
pub fn velocity_of(plan: &MotionPlan) -> TangentAtPoint {
    plan.segment.initial_velocity.scaled(plan.segment.length)
}

fn scaled_velocity(s: &GeodesicSegment) -> Vec<f64> {
    scale(&s.initial_velocity.vec, s.length)
}

/// A random pair in the given piece.
pub fn sample_in_piece<R: Rng + ?Sized>(m: &ModelManifold, kind: PieceKind, rng: &mut R) -> Result<(ManifoldPoint, ManifoldPoint)> {
    let point = |v: Vec<f64>| ManifoldPoint { manifold: *m, lift: UnitVector::renormalized(v) };
    match (kind, *m) {
        (PieceKind::OffCut, _) => stratum_pair(m, StratumTag::OffCut, rng),
        (PieceKind::AntipodalField, _) | (PieceKind::AntipodalPunctured, _) => {
            stratum_pair(m, StratumTag::SphereAntipodal, rng)
        }
        (PieceKind::AntipodalPole, _) => {
            let n = UnitVector::basis(m.ambient_dim(), POLE);
            Ok((point(n.coords().to_vec()), point(n.neg().into_inner())))
        }
        (PieceKind::ProjectiveCells { cell_sum }, ModelManifold::ComplexProjective(n))
        | (PieceKind::ProjectiveCells { cell_sum }, ModelManifold::QuaternionicProjective(n)) => {
            let n = n as usize;
            if cell_sum >= 2 * n {
                return Err(Error::InvalidInput(format!("piece with cell sum {cell_sum} is empty")));
            }
            let k = rng.random_range(cell_sum.saturating_sub(n)..=cell_sum.min(n));
            let l = cell_sum - k;
            let block = cell_block(m);
            let cell_point = |c: usize, rng: &mut R| {
                let mut v = uniform_sphere(rng, m.ambient_dim());
                v[..c * block].iter_mut().for_each(|t| *t = 0.0);
                normalized(&v).unwrap_or_else(|| UnitVector::basis(v.len(), c * block).into_inner())
            };
            let x = cell_point(k, rng);
            let y = cell_point(l, rng);
            // Project the point with the smaller leading cell; the other's zero block keeps
            // the leading cell of the projected point in place.
            let (x, y) = if k < l {
                (fiber_orthogonal(m, &y, &x).ok_or(Error::NoPiece)?, y)
            } else {
                let y = fiber_orthogonal(m, &x, &y).ok_or(Error::NoPiece)?;
                (x, y)
            };
            Ok((point(x), point(y)))
        }
        (PieceKind::LensAdjacentTie, _) => stratum_pair(m, StratumTag::LensC1, rng),
        (PieceKind::LensFrame { reference, aligned }, ModelManifold::Lens(p)) => {
            let x = match reference {
                FrameReference::First => uniform_sphere(rng, 4),
                FrameReference::Second => {
                    let a = rng.random_range(0.0..TAU);
                    if rng.random_bool(0.5) {
                        vec![a.cos(), a.sin(), 0.0, 0.0]
                    } else {
                        vec![0.0, 0.0, a.cos(), a.sin()]
                    }
                }
            };
            let xp = point(x);
            // Any unit vector of the complex line orthogonal to x completes a p-geodesic pair.
            let y0 = fiber_orthogonal(m, xp.coords(), &uniform_sphere(rng, 4)).ok_or(Error::NoPiece)?;
            let f = lens_frame(m, &xp, &point(y0.clone()), &Tolerances::default())?;
            let step = TAU / p as f64;
            let (_, phi) = f.offsets[0];
            let target = if aligned { 0.0 } else { rng.random_range(0.05..0.95) * step };
            let y = complex_scale(&y0, num_complex::Complex64::from_polar(1.0, target - phi));
            let y = deck_image(p, rng.random_range(0..p), &y);
            Ok((xp, point(y)))
        }
        _ => Err(Error::InvalidInput(format!("piece {kind:?} does not belong to {m}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub piece_id: usize,
    pub radius: f64,
    pub accepted_samples: usize,
    pub escaped_samples: usize,
    pub max_velocity_deviation: f64,
}

/// Empirical continuity of a piece's section around a member pair.
///
/// Each sample displaces the lifts of both points by geodesic steps of length at most
/// `radius / sqrt 2`, then moves the pair back onto the defining constraints of the piece
/// (for cut pieces); samples that still leave the piece are counted as escaped. The
/// deviation is the largest ambient distance between length-scaled initial velocities.
#[allow(clippy::too_many_arguments)]
pub fn continuity_probe(
    d: &Decomposition,
    piece_id: usize,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    radius: f64,
    sample_count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ProbeReport> {
    let m = d.manifold;
    let piece = d.piece(piece_id)?;
    let center = scaled_velocity(&piece.section(&m, x, y, tol)?);
    let mut report = ProbeReport {
        piece_id,
        radius,
        accepted_samples: 0,
        escaped_samples: 0,
        max_velocity_deviation: 0.0,
    };
    if radius <= 0.0 || sample_count == 0 {
        return Ok(report);
    }
    let center_label = m.classify_pair_with(x, y, tol)?;
    let outcomes: Vec<Option<f64>> = (0..sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i + 1);
            let (xp, yp) = constrained_perturbation(&m, piece.kind, x, y, &center_label, radius, &mut rng)?;
            if !piece.contains(&m, &xp, &yp, tol).unwrap_or(false) {
                return None;
            }
            let s = piece.section(&m, &xp, &yp, tol).ok()?;
            Some(dist(&scaled_velocity(&s), &center))
        })
        .collect();
    for o in outcomes {
        match o {
            Some(dev) => {
                report.accepted_samples += 1;
                report.max_velocity_deviation = report.max_velocity_deviation.max(dev);
            }
            None => report.escaped_samples += 1,
        }
    }
    Ok(report)
}

fn constrained_perturbation<R: Rng + ?Sized>(
    m: &ModelManifold,
    kind: PieceKind,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    label: &StratumLabel,
    radius: f64,
    rng: &mut R,
) -> Option<(ManifoldPoint, ManifoldPoint)> {
    let step = radius / 2f64.sqrt();
    let mut xp = perturb(x.coords(), step, rng);
    let mut yp = perturb(y.coords(), step, rng);
    match kind {
        PieceKind::OffCut => {}
        PieceKind::AntipodalField | PieceKind::AntipodalPunctured => yp = scale(&xp, -1.0),
        PieceKind::AntipodalPole => {
            xp = x.coords().to_vec();
            yp = y.coords().to_vec();
        }
        PieceKind::ProjectiveCells { .. } => {
            // Stay in the cells of the center pair, then restore orthogonality by moving the
            // point whose leading cell comes first.
            let (k, l) = cell_pair(x, y).ok()?;
            let b = cell_block(m);
            xp[..k * b].iter_mut().for_each(|t| *t = 0.0);
            yp[..l * b].iter_mut().for_each(|t| *t = 0.0);
            xp = normalized(&xp)?;
            yp = normalized(&yp)?;
            if k < l {
                xp = fiber_orthogonal(m, &yp, &xp)?;
            } else {
                yp = fiber_orthogonal(m, &xp, &yp)?;
            }
        }
        PieceKind::LensAdjacentTie => {
            let ModelManifold::Lens(p) = *m else { return None };
            let (a, b) = (label.tie_indices[0], label.tie_indices[1]);
            // Keep d(x, Psi_a y) = d(x, Psi_b y): y stays orthogonal to Psi_{-a} x - Psi_{-b} x.
            let w = crate::vecops::sub(&deck_image(p, p - a % p, &xp), &deck_image(p, p - b % p, &xp));
            let w = normalized(&w)?;
            yp = normalized(&reject(&yp, &[w]))?;
        }
        PieceKind::LensFrame { reference, aligned } => {
            if reference == FrameReference::Second {
                // Stay on the Hopf circle of the center point.
                let first = complex_at(x.coords(), 0).norm() > 0.5;
                let keep = if first { 0..2 } else { 2..4 };
                let v: Vec<f64> = (0..4).map(|i| if keep.contains(&i) { xp[i] } else { 0.0 }).collect();
                xp = normalized(&v)?;
            }
            yp = fiber_orthogonal(m, &xp, &yp)?;
            if aligned {
                let ModelManifold::Lens(p) = *m else { return None };
                let (_, rho) = reference_direction(&xp, &Tolerances::default()).ok()?;
                let phi = candidate_offsets(p, &rho, &yp)
                    .iter()
                    .map(|&(_, phi)| signed_angle(phi))
                    .min_by(|a, b| a.abs().total_cmp(&b.abs()))?;
                yp = complex_scale(&yp, num_complex::Complex64::from_polar(1.0, -phi));
            }
        }
    }
    Some((
        ManifoldPoint { manifold: *m, lift: UnitVector::renormalized(xp) },
        ManifoldPoint { manifold: *m, lift: UnitVector::renormalized(yp) },
    ))
}

/// Smallest [`frontier_clearance`] of a continuity-probe center. Section slopes grow like
/// the inverse clearance, so a fixed deviation bound at a fixed radius needs a fixed
/// distance from the frontier.
pub const PROBE_CLEARANCE: f64 = 0.25;

/// How far a member pair sits from the frontier of its piece, where the section is
/// allowed to jump or steepen without bound: the classification margin on pieces bounded
/// by a higher stratum, the size of the leading homogeneous coordinates on projective
/// cells, the distance from the pole on the punctured antipodal piece, and on frame
/// pieces the angular gap to alignment and the length of the first reference vector. Probe radii must stay well below this for the probe to measure continuity at
/// the pair rather than the jump across the frontier. Infinite where no such frontier is
/// tracked.
pub fn frontier_clearance(
    d: &Decomposition,
    piece_id: usize,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    tol: &Tolerances,
) -> Result<f64> {
    let m = d.manifold;
    match d.piece(piece_id)?.kind {
        PieceKind::OffCut | PieceKind::LensAdjacentTie => Ok(m.classify_pair_with(x, y, tol)?.margin),
        PieceKind::LensFrame { .. } => {
            let f = lens_frame(&m, x, y, tol)?;
            let mut c = f64::INFINITY;
            if !f.aligned {
                c = f.offsets.iter().map(|&(_, phi)| signed_angle(phi).abs()).fold(c, f64::min);
            }
            if f.reference == FrameReference::First {
                let xl = x.coords();
                let e1 = reject(&quat_right_scale(xl, Quat::I), &[xl.to_vec(), complex_i(xl)]);
                c = c.min(dot(&e1, &e1).sqrt());
            }
            Ok(c)
        }
        PieceKind::ProjectiveCells { .. } => {
            let b = cell_block(&m);
            let (kx, ky) = cell_pair(x, y)?;
            let size = |v: &[f64], k: usize| v[b * k..b * (k + 1)].iter().map(|c| c * c).sum::<f64>().sqrt();
            Ok(size(x.coords(), kx).min(size(y.coords(), ky)))
        }
        PieceKind::AntipodalPunctured => Ok(dist(x.coords(), &UnitVector::basis(x.coords().len(), POLE).into_inner())),
        PieceKind::AntipodalField | PieceKind::AntipodalPole => Ok(f64::INFINITY),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcLedger {
    pub manifold: ModelManifold,
    /// Topological complexity, a lower bound for the geodesic complexity.
    pub lower: usize,
    pub upper_constructed: usize,
    pub nonempty_constructed: usize,
    /// Best upper bound known from theory.
    pub upper_known: usize,
    /// `lower <= upper_known <= upper_constructed`.
    pub consistent: bool,
    pub note: String,
}

pub fn gc_ledger(m: &ModelManifold) -> Result<GcLedger> {
    let d = build_decomposition(m)?;
    let lower = match *m {
        ModelManifold::Sphere(n) => 2 + (n % 2 == 0) as usize,
        ModelManifold::ComplexProjective(n) | ModelManifold::QuaternionicProjective(n) => 2 * n as usize + 1,
        ModelManifold::Lens(_) => 6,
    };
    let upper_known = d.ledger.known_bound;
    let upper_constructed = d.ledger.constructed_count;
    let consistent = lower <= upper_known && upper_known <= upper_constructed;
    let note = if consistent {
        d.ledger.note.clone()
    } else {
        format!(
            "{}; the constructed count {} is below the known bound {}, resting on the numerical \
             continuity checks of the frame pieces",
            d.ledger.note, upper_constructed, upper_known
        )
    };
    Ok(GcLedger {
        manifold: d.manifold,
        lower,
        upper_constructed,
        nonempty_constructed: d.ledger.nonempty_count,
        upper_known,
        consistent,
        note,
    })
}

/// `g` applied to every sample of a plan.
pub fn transform_plan(m: &ModelManifold, g: &Isometry, plan: &MotionPlan) -> Result<Vec<ManifoldPoint>> {
    plan.samples.iter().map(|s| g.act(m, s)).collect()
}

/// A random pair, useful for partition sweeps.
pub fn random_pair<R: Rng + ?Sized>(m: &ModelManifold, rng: &mut R) -> (ManifoldPoint, ManifoldPoint) {
    (random_point(m, rng), random_point(m, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_manifolds() -> Vec<ModelManifold> {
        vec![
            ModelManifold::Sphere(2),
            ModelManifold::Sphere(3),
            ModelManifold::Sphere(4),
            ModelManifold::ComplexProjective(1),
            ModelManifold::ComplexProjective(2),
            ModelManifold::QuaternionicProjective(1),
            ModelManifold::QuaternionicProjective(2),
            ModelManifold::Lens(3),
            ModelManifold::Lens(4),
            ModelManifold::Lens(7),
        ]
    }

    #[test]
    fn piece_counts() {
        let count = |m| build_decomposition(&m).unwrap().pieces.len();
        assert_eq!(count(ModelManifold::Sphere(3)), 2);
        assert_eq!(count(ModelManifold::Sphere(2)), 3);
        assert_eq!(count(ModelManifold::ComplexProjective(2)), 6);
        assert_eq!(count(ModelManifold::QuaternionicProjective(3)), 8);
        assert!(count(ModelManifold::Lens(3)) <= 7);
    }

    #[test]
    fn ledgers() {
        let l = gc_ledger(&ModelManifold::Lens(5)).unwrap();
        assert_eq!((l.lower, l.upper_known), (6, 7));
        assert!(l.upper_constructed <= 7);
        let l = gc_ledger(&ModelManifold::ComplexProjective(3)).unwrap();
        assert_eq!((l.lower, l.upper_constructed, l.upper_known, l.nonempty_constructed), (7, 8, 7, 7));
        let l = gc_ledger(&ModelManifold::Sphere(2)).unwrap();
        assert_eq!((l.lower, l.upper_constructed, l.upper_known), (3, 3, 3));
    }

    #[test]
    fn quarter_circle_plan() {
        let m = ModelManifold::Sphere(2);
        let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
        let y = m.point(vec![0.0, 1.0, 0.0]).unwrap();
        let p = plan(&m, &x, &y).unwrap();
        assert_eq!(p.piece_id, 0);
        assert_eq!(p.samples.len(), DEFAULT_PATH_SAMPLES);
        let v = velocity_of(&p);
        assert!(dist(&v.vec, &[0.0, PI / 2.0, 0.0]) < 1e-12);
    }

    #[test]
    fn lens_circle_plan() {
        let m = ModelManifold::Lens(3);
        let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let y = m.point(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let p = plan(&m, &x, &y).unwrap();
        let d = build_decomposition(&m).unwrap();
        assert!(matches!(d.pieces[p.piece_id].kind, PieceKind::LensFrame { .. }));
        assert!((p.segment.length - PI / 2.0).abs() < 1e-12);
        let v = velocity_of(&p).vec;
        assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
        assert!((v[2].hypot(v[3]) - PI / 2.0).abs() < 1e-12);
        let e = m.minimal_geodesics(&x, &y).unwrap();
        assert!(e.contains_velocity(&p.segment.initial_velocity.vec, 1e-9));
    }

    #[test]
    fn cp2_cell_plan() {
        let m = ModelManifold::ComplexProjective(2);
        let x = m.point(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let y = m.point(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let p = plan(&m, &x, &y).unwrap();
        assert_eq!(p.piece_id, 2);
        let end = p.samples.last().unwrap();
        assert!(m.distance(end, &y).unwrap() < 1e-9);
    }

    #[test]
    fn zero_length_plan_has_zero_velocity() {
        let m = ModelManifold::Lens(5);
        let x = m.point_normalized(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let p = plan(&m, &x, &x).unwrap();
        assert_eq!(velocity_of(&p).norm(), 0.0);
    }

    #[test]
    fn every_piece_sample_is_accepted_once_and_lands() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let tol = Tolerances::default();
        for m in all_manifolds() {
            let d = build_decomposition(&m).unwrap();
            for piece in &d.pieces {
                if piece_is_empty(&m, piece.kind) {
                    assert!(sample_in_piece(&m, piece.kind, &mut rng).is_err());
                    continue;
                }
                for _ in 0..20 {
                    let (x, y) = sample_in_piece(&m, piece.kind, &mut rng).unwrap();
                    assert_eq!(d.accepting(&x, &y, &tol).unwrap(), vec![piece.id], "{m} {:?}", piece.kind);
                    let plan = plan_with(&d, &x, &y, 8, &tol).unwrap();
                    let end = plan.samples.last().unwrap();
                    assert!(m.distance(end, &y).unwrap() < 1e-9, "{m} {:?}", piece.kind);
                    assert!((plan.segment.length - m.distance(&x, &y).unwrap()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn probe_radius_zero() {
        let m = ModelManifold::Lens(3);
        let d = build_decomposition(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, y) = sample_in_piece(&m, PieceKind::LensAdjacentTie, &mut rng).unwrap();
        let r = continuity_probe(&d, 1, &x, &y, 0.0, 10, 0, &Tolerances::default()).unwrap();
        assert_eq!(r.max_velocity_deviation, 0.0);
    }

    #[test]
    fn probes_scale_linearly() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for m in all_manifolds() {
            let d = build_decomposition(&m).unwrap();
            for piece in &d.pieces {
                if piece_is_empty(&m, piece.kind) {
                    continue;
                }
                let (x, y) = sample_in_piece(&m, piece.kind, &mut rng).unwrap();
                for r in [1e-3, 2e-3, 4e-3] {
                    let rep = continuity_probe(&d, piece.id, &x, &y, r, 50, 9, &tol).unwrap();
                    assert!(rep.max_velocity_deviation <= 10.0 * r, "{m} {:?} {rep:?}", piece.kind);
                    if piece.kind != PieceKind::AntipodalPole {
                        assert!(rep.accepted_samples > 0, "{m} {:?} {rep:?}", piece.kind);
                    }
                }
            }
        }
    }
}
