//! Normal fundamental domain of the `Z_p` action on `S^3` and the boundary strata that
//! make up the tangent cut locus of `L(p;1)`.
//!
//! `S^3` sits in `C^2 = R^4` with `z1 = (c0, c1)`, `z2 = (c2, c3)`. The deck action is
//! `Psi_m (z1, z2) = (w^m z1, w^m z2)` with `w = exp(2 pi i / p)`, and the domain is
//! centered at `q0 = (1, 0, 0, 0)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quat::complex_scale;
use crate::sampling::uniform_sphere;
use crate::tol::BOUNDARY_TOL;
use crate::vecops::{dot, normalized, sub};

/// `Psi_m` applied to a vector of `R^4` (or any even-dimensional vector).
pub fn deck_image(p: u32, m: u32, v: &[f64]) -> Vec<f64> {
    if m % p == 0 {
        return v.to_vec();
    }
    let angle = 2.0 * PI * (m % p) as f64 / p as f64;
    complex_scale(v, Complex64::from_polar(1.0, angle))
}

/// The cyclic group `Z_p` acting on `S^3` by diagonal scalar rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckAction {
    p: u32,
}

impl DeckAction {
    pub fn new(p: u32) -> Result<Self> {
        if p < 3 {
            return Err(Error::Unsupported(format!("lens parameter p = {p} (need p >= 3)")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn apply(&self, m: u32, v: &[f64]) -> Vec<f64> {
        deck_image(self.p, m, v)
    }

    pub fn compose(&self, m: u32, k: u32) -> u32 {
        (m + k) % self.p
    }

    /// The orbit `Psi_0 v, ..., Psi_{p-1} v`.
    pub fn orbit(&self, v: &[f64]) -> Vec<Vec<f64>> {
        (0..self.p).map(|m| self.apply(m, v)).collect()
    }
}

fn angle(p: u32, k: u32) -> f64 {
    2.0 * PI * k as f64 / p as f64
}

/// `u_k = q0 - Psi_k q0`, the normal of the bisector between `q0` and its `k`-th translate.
pub fn u_vector(p: u32, k: u32) -> Result<[f64; 4]> {
    if k == 0 || k >= p {
        return Err(Error::IndexOutOfRange { index: k, max: p.saturating_sub(1) });
    }
    let a = angle(p, k);
    Ok([1.0 - a.cos(), -a.sin(), 0.0, 0.0])
}

/// Slope `(1 - cos(2 pi l / p)) / sin(2 pi l / p)` of the face `<u_l, r> = 0` in the
/// first coordinate plane, i.e. `tan(pi l / p)`.
pub fn sigma(p: u32, l: u32) -> Result<f64> {
    if l == 0 || l >= p {
        return Err(Error::IndexOutOfRange { index: l, max: p.saturating_sub(1) });
    }
    if 2 * l == p {
        return Err(Error::SingularIndex { p, index: l });
    }
    let a = angle(p, l);
    Ok((1.0 - a.cos()) / a.sin())
}

/// Lemma-level test for the bisector half-space `H_{q,r} = { v : d(q,v) < d(r,v) }`,
/// evaluated as `<v, q - r> > 0`.
pub fn in_half_space(q: &[f64], r: &[f64], v: &[f64]) -> bool {
    dot(v, &sub(q, r)) > 0.0
}

/// The three boundary pieces of the normal domain that are nonempty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStratum {
    /// Only `<u_1, r>` vanishes: an open 2-disk.
    FaceFirst,
    /// Only `<u_{p-1}, r>` vanishes: an open 2-disk.
    FaceLast,
    /// All `<u_k, r>` vanish: the circle `{(0, 0, x, y)}`.
    Circle,
}

impl BoundaryStratum {
    /// Builds the stratum whose vanishing index set is `indices` (sorted, 1-based).
    pub fn from_indices(p: u32, indices: &[u32]) -> Result<Self> {
        let all: Vec<u32> = (1..p).collect();
        match indices {
            [1] => Ok(Self::FaceFirst),
            [k] if *k == p - 1 => Ok(Self::FaceLast),
            s if s == all.as_slice() => Ok(Self::Circle),
            _ => Err(Error::InvalidStratum { indices: indices.to_vec() }),
        }
    }

    /// Vanishing index set `{1}`, `{p-1}` or `{1, ..., p-1}`.
    pub fn indices(&self, p: u32) -> Vec<u32> {
        match self {
            Self::FaceFirst => vec![1],
            Self::FaceLast => vec![p - 1],
            Self::Circle => (1..p).collect(),
        }
    }

    /// Level `l`: the number of vanishing constraints.
    pub fn level(&self, p: u32) -> u32 {
        match self {
            Self::Circle => p - 1,
            _ => 1,
        }
    }

    /// The cut stratum downstairs that this piece covers.
    pub fn cut_stratum(&self) -> CutStratum {
        match self {
            Self::Circle => CutStratum::CpMinus1,
            _ => CutStratum::C1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FaceFirst => "face_1",
            Self::FaceLast => "face_p_minus_1",
            Self::Circle => "circle",
        }
    }
}

/// The two strata of the cut locus of a point of `L(p;1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutStratum {
    /// Points joined by exactly two minimizing geodesics.
    C1,
    /// Points joined by exactly `p` minimizing geodesics.
    CpMinus1,
}

/// Number of boundary points of the normal domain over one cut point of the stratum.
pub fn covering_degree(p: u32, stratum: BoundaryStratum) -> u32 {
    match stratum.cut_stratum() {
        // Psi_1 carries the last face onto the first: two disks over one.
        CutStratum::C1 => 2,
        CutStratum::CpMinus1 => p,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainMembership {
    Interior,
    /// On the boundary; `vanishing` lists the `k` with `<u_k, r> = 0` within tolerance.
    Boundary { vanishing: Vec<u32> },
    Exterior,
}

/// Locates `r` relative to the normal domain centered at `q0`.
pub fn in_normal_domain(p: u32, r: &[f64]) -> DomainMembership {
    in_normal_domain_tol(p, r, BOUNDARY_TOL)
}

pub fn in_normal_domain_tol(p: u32, r: &[f64], tol: f64) -> DomainMembership {
    let mut vanishing = Vec::new();
    for k in 1..p {
        let a = angle(p, k);
        let s = (1.0 - a.cos()) * r[0] - a.sin() * r[1];
        if s < -tol {
            return DomainMembership::Exterior;
        }
        if s <= tol {
            vanishing.push(k);
        }
    }
    if vanishing.is_empty() {
        DomainMembership::Interior
    } else {
        DomainMembership::Boundary { vanishing }
    }
}

/// A point of the face `<u_1, r> = 0` (or the last face when `last`), parametrized as
/// `(a, ±sigma_1 a, rho cos psi, rho sin psi)` with `a > 0`. `a` is given as a fraction
/// `s` in `(0, 1)` of its maximal admissible value.
pub fn face_point(p: u32, last: bool, s: f64, psi: f64) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidInput(format!("face parameter {s} outside (0, 1)")));
    }
    let sig = sigma(p, 1)? * if last { -1.0 } else { 1.0 };
    let a_max = 1.0 / (1.0 + sig * sig).sqrt();
    let a = s * a_max;
    let rho = (1.0 - a * a * (1.0 + sig * sig)).max(0.0).sqrt();
    Ok(vec![a, sig * a, rho * psi.cos(), rho * psi.sin()])
}

/// The point `(0, 0, cos theta, sin theta)` of the boundary circle.
pub fn circle_point(theta: f64) -> Vec<f64> {
    vec![0.0, 0.0, theta.cos(), theta.sin()]
}

/// Whether the vanishing set `indices` is realized by some point of `S^3` on which the
/// remaining products are strictly positive.
///
/// All `u_k` lie in the first coordinate plane, so the constraints act on `(c0, c1)`
/// only. Two distinct `u_k` are never parallel, hence two or more constraints force
/// `c0 = c1 = 0`; a single constraint leaves the line spanned by its normal's rotation,
/// whose solution set on `S^3` is parametrized by `cos theta` along that line.
pub fn index_set_feasible(p: u32, indices: &[u32]) -> Result<bool> {
    Ok(index_set_margin(p, indices)? > BOUNDARY_TOL)
}

const SOLUTION_CIRCLE_SAMPLES: usize = 4096;

/// Best achievable minimum of `<u_j, r>` over `j` outside `indices`, on the solution set
/// of the vanishing constraints. Positive exactly when the set is feasible.
fn index_set_margin(p: u32, indices: &[u32]) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rows = Vec::new();
    for &k in indices {
        let u = u_vector(p, k)?;
        rows.push([u[0], u[1]]);
    }
    let rank = plane_rank(&rows);
    let others: Vec<[f64; 4]> =
        (1..p).filter(|k| !indices.contains(k)).map(|k| u_vector(p, k)).collect::<Result<_>>()?;
    if others.is_empty() {
        // Every constraint vanishes: feasible iff the solution set is nonempty,
        // which it always is (the circle).
        return Ok(f64::INFINITY);
    }
    if rank == 2 {
        // Only (0, 0, x, y) remains; every other product is exactly zero.
        return Ok(0.0);
    }
    // Rank one: (c0, c1) = lambda * w with w orthogonal to the constraint normal.
    let n = rows[0];
    let w = normalized(&[-n[1], n[0]]).ok_or(Error::DegenerateRootData("zero normal".into()))?;
    let mut best = f64::NEG_INFINITY;
    for i in 0..SOLUTION_CIRCLE_SAMPLES {
        let lambda = (2.0 * PI * i as f64 / SOLUTION_CIRCLE_SAMPLES as f64).cos();
        let worst = others
            .iter()
            .map(|u| lambda * (u[0] * w[0] + u[1] * w[1]))
            .fold(f64::INFINITY, f64::min);
        best = best.max(worst);
    }
    Ok(best)
}

fn plane_rank(rows: &[[f64; 2]]) -> usize {
    let nonzero: Vec<&[f64; 2]> = rows.iter().filter(|r| r[0].hypot(r[1]) > 1e-12).collect();
    if nonzero.is_empty() {
        return 0;
    }
    let a = nonzero[0];
    let independent = nonzero.iter().any(|b| {
        let cross = a[0] * b[1] - a[1] * b[0];
        cross.abs() > 1e-12 * a[0].hypot(a[1]) * b[0].hypot(b[1])
    });
    if independent {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptinessReport {
    pub p: u32,
    pub samples: usize,
    pub violations: usize,
    pub stratum_hits: BTreeMap<String, usize>,
    /// Smallest infeasibility margin among single forbidden faces; positive means
    /// every forbidden face is infeasible with room to spare.
    pub min_margin: f64,
    /// Index sets found feasible by the exhaustive scan.
    pub feasible_sets: Vec<Vec<u32>>,
    pub index_sets_checked: usize,
}

/// Checks numerically that the only nonempty boundary strata of the normal domain are
/// the two extreme faces and the circle.
///
/// Two complementary sweeps run. Every nonempty index set of `{1, ..., p-1}` is solved
/// exactly for feasibility (up to `p = 20`; beyond that only sets of size one and the full
/// set, which covers everything since larger sets have rank two). Then `sample_count`
/// uniform points of `S^3` are projected onto each face `<u_k, .> = 0` and onto the
/// circle, and every projection that lands on the boundary must carry an admissible
/// vanishing pattern.
pub fn verify_emptiness(p: u32, sample_count: usize, seed: u64) -> Result<EmptinessReport> {
    DeckAction::new(p)?;
    let mut feasible_sets = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut checked = 0usize;
    let mut check_set = |set: Vec<u32>| -> Result<()> {
        checked += 1;
        let margin = index_set_margin(p, &set)?;
        let allowed = BoundaryStratum::from_indices(p, &set).is_ok();
        if margin > BOUNDARY_TOL {
            if !allowed {
                return Err(Error::LemmaViolation { point: witness(p, &set), indices: set });
            }
            feasible_sets.push(set);
        } else if set.len() == 1 {
            min_margin = min_margin.min(-margin);
        }
        Ok(())
    };
    if p <= 20 {
        for mask in 1u32..(1u32 << (p - 1)) {
            let set: Vec<u32> = (1..p).filter(|k| mask & (1 << (k - 1)) != 0).collect();
            check_set(set)?;
        }
    } else {
        for k in 1..p {
            check_set(vec![k])?;
        }
        check_set((1..p).collect())?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normals: Vec<[f64; 4]> = (1..p).map(|k| u_vector(p, k)).collect::<Result<_>>()?;
    let mut hits: BTreeMap<String, usize> =
        [BoundaryStratum::FaceFirst, BoundaryStratum::FaceLast, BoundaryStratum::Circle]
            .iter()
            .map(|s| (s.name().to_string(), 0))
            .collect();
    let mut violations = 0usize;
    let mut first_violation = None;
    for _ in 0..sample_count {
        let r = uniform_sphere(&mut rng, 4);
        let mut candidates: Vec<Vec<f64>> = normals
            .iter()
            .filter_map(|u| {
                let c = dot(&r, u) / dot(u, u);
                normalized(&[r[0] - c * u[0], r[1] - c * u[1], r[2], r[3]])
            })
            .collect();
        if let Some(c) = normalized(&[0.0, 0.0, r[2], r[3]]) {
            candidates.push(c);
        }
        for c in candidates {
            if let DomainMembership::Boundary { vanishing } = in_normal_domain(p, &c) {
                match BoundaryStratum::from_indices(p, &vanishing) {
                    Ok(s) => *hits.get_mut(s.name()).unwrap() += 1,
                    Err(_) => {
                        violations += 1;
                        first_violation.get_or_insert((c, vanishing));
                    }
                }
            }
        }
    }
    if let Some((point, indices)) = first_violation {
        return Err(Error::LemmaViolation { point, indices });
    }
    Ok(EmptinessReport {
        p,
        samples: sample_count,
        violations,
        stratum_hits: hits,
        min_margin,
        feasible_sets,
        index_sets_checked: checked,
    })
}

fn witness(p: u32, set: &[u32]) -> Vec<f64> {
    match set {
        [k] => u_vector(p, *k)
            .ok()
            .and_then(|u| normalized(&[u[1], -u[0], 0.0, 0.0]))
            .unwrap_or_default(),
        _ => circle_point(0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigReport {
    pub p_max: u32,
    pub checks: usize,
    /// `None` when the range of `(p, m)` is empty.
    pub min_margin: Option<f64>,
    pub argmin: Option<(u32, u32)>,
}

/// Checks `(1 - cos(2 pi m / p)) / sin(2 pi m / p) - tan(pi / p) > 1e-12` for all
/// `3 <= p <= p_max` and `2 <= m < p / 2`.
pub fn verify_trig_inequality(p_max: u32) -> Result<TrigReport> {
    if p_max < 3 {
        return Err(Error::InvalidInput(format!("p_max = {p_max} (need >= 3)")));
    }
    let mut report = TrigReport { p_max, checks: 0, min_margin: None, argmin: None };
    for p in 3..=p_max {
        for m in 2.. {
            if 2 * m >= p {
                break;
            }
            let a = angle(p, m);
            let margin = (1.0 - a.cos()) / a.sin() - (PI / p as f64).tan();
            report.checks += 1;
            if !(margin > 1e-12) {
                return Err(Error::InequalityViolation { p, m, margin });
            }
            if report.min_margin.is_none_or(|best| margin < best) {
                report.min_margin = Some(margin);
                report.argmin = Some((p, m));
            }
        }
    }
    Ok(report)
}
