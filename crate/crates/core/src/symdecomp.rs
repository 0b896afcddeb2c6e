//! Root-system bookkeeping for cut-locus decompositions of compact symmetric spaces and
//! the resulting upper bounds on geodesic complexity.
//!
//! Only the arithmetic is implemented: the subsets `Delta` of simple roots indexing the
//! cut-locus pieces, the dimensions of the chamber faces `S_Delta`, category estimates
//! from dimension and connectivity, and the two summation formulas.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystemInput {
    pub rank: usize,
    pub simple_roots: Vec<Vec<f64>>,
    pub highest_root: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeltaSubset {
    /// Indices into `simple_roots`, ascending.
    pub members: Vec<usize>,
}

impl DeltaSubset {
    pub fn cardinality(&self) -> usize {
        self.members.len()
    }
}

impl RootSystemInput {
    pub fn new(simple_roots: Vec<Vec<f64>>, highest_root: Vec<f64>) -> Result<Self> {
        let rs = Self { rank: simple_roots.len(), simple_roots, highest_root };
        rs.validate()?;
        Ok(rs)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.rank;
        if r == 0 || self.simple_roots.len() != r {
            return Err(Error::DegenerateRootData(format!("expected {r} simple roots, got {}", self.simple_roots.len())));
        }
        if self.simple_roots.iter().chain([&self.highest_root]).any(|v| v.len() != r) {
            return Err(Error::DegenerateRootData(format!("root vectors must have length {r}")));
        }
        if rank_of(&self.simple_roots) != r {
            return Err(Error::DegenerateRootData("simple roots are linearly dependent".into()));
        }
        let coeffs = self.highest_root_coefficients()?;
        if let Some(c) = coeffs.iter().find(|c| **c < -RANK_TOL) {
            return Err(Error::DegenerateRootData(format!("highest root has negative coefficient {c}")));
        }
        Ok(())
    }

    /// Coefficients of the highest root in the basis of simple roots.
    pub fn highest_root_coefficients(&self) -> Result<Vec<f64>> {
        let r = self.rank;
        let a = DMatrix::from_fn(r, r, |i, j| self.simple_roots[j][i]);
        let b = nalgebra::DVector::from_column_slice(&self.highest_root);
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::DegenerateRootData("simple roots are linearly dependent".into()))?;
        Ok(x.iter().copied().collect())
    }

    /// Index of the simple root equal to the highest root, if any.
    pub fn highest_root_simple_index(&self) -> Option<usize> {
        self.simple_roots.iter().position(|a| {
            a.iter().zip(&self.highest_root).all(|(u, v)| (u - v).abs() <= RANK_TOL)
        })
    }
}

fn rank_of(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    m.svd(false, false).singular_values.iter().filter(|s| **s > RANK_TOL).count()
}

/// All nonempty subsets of simple roots not containing the highest root; for rank one
/// the single subset `{gamma}`.
pub fn enumerate_d(rs: &RootSystemInput) -> Vec<DeltaSubset> {
    if rs.rank == 1 {
        return vec![DeltaSubset { members: vec![0] }];
    }
    let excluded = rs.highest_root_simple_index();
    let mut out: Vec<DeltaSubset> = (1u64..(1u64 << rs.rank))
        .map(|mask| DeltaSubset { members: (0..rs.rank).filter(|i| mask & (1 << i) != 0).collect() })
        .filter(|d| excluded.is_none_or(|e| !d.members.contains(&e)))
        .collect();
    out.sort_by(|a, b| a.cardinality().cmp(&b.cardinality()).then_with(|| a.members.cmp(&b.members)));
    out
}

pub fn group_by_cardinality(d: &[DeltaSubset]) -> BTreeMap<usize, Vec<DeltaSubset>> {
    let mut out: BTreeMap<usize, Vec<DeltaSubset>> = BTreeMap::new();
    for s in d {
        out.entry(s.cardinality()).or_default().push(s.clone());
    }
    out
}

/// Dimension of `{X : <gamma, X> = 0 for simple gamma outside Delta, 2 <delta, X> = 1}`,
/// which is `|Delta| - 1` for root data in general position. The affine system is solved
/// explicitly and any disagreement with that count is reported.
pub fn s_delta_dim(rs: &RootSystemInput, delta: &DeltaSubset) -> Result<usize> {
    if delta.members.is_empty() || delta.members.iter().any(|&i| i >= rs.rank) {
        return Err(Error::InvalidInput(format!("invalid subset {:?}", delta.members)));
    }
    let mut rows: Vec<Vec<f64>> =
        (0..rs.rank).filter(|i| !delta.members.contains(i)).map(|i| rs.simple_roots[i].clone()).collect();
    rows.push(rs.highest_root.iter().map(|v| 2.0 * v).collect());
    let rank = rank_of(&rows);
    let augmented: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.push(if i + 1 == rows.len() { 1.0 } else { 0.0 });
            r
        })
        .collect();
    if rank_of(&augmented) != rank {
        return Err(Error::DegenerateRootData(format!("S_Delta is empty for {:?}", delta.members)));
    }
    let solved = rs.rank - rank;
    let generic = delta.cardinality() - 1;
    if solved != generic {
        return Err(Error::DegenerateRootData(format!(
            "affine solve gives dimension {solved}, expected {generic} for {:?}",
            delta.members
        )));
    }
    Ok(solved)
}

/// Category estimate for a closed manifold of the given dimension: `dim/2 + 1` when
/// simply connected, `dim + 1` otherwise.
pub fn cat_upper_bound(dim: usize, simply_connected: bool) -> usize {
    cat_upper_bound_connected(dim, simply_connected as usize)
}

/// `floor(dim / (c + 1)) + 1` for a `c`-connected space.
pub fn cat_upper_bound_connected(dim: usize, connectivity: usize) -> usize {
    dim / (connectivity + 1) + 1
}

pub fn gc_upper_bound_fibered(secat_bounds: &[usize]) -> Result<usize> {
    if secat_bounds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if secat_bounds.contains(&0) {
        return Err(Error::NonPositiveBound);
    }
    Ok(secat_bounds.iter().sum::<usize>() + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricBound {
    pub result: usize,
    /// `(cardinality, max of its group)`, largest cardinality first.
    pub maxima: Vec<(usize, usize)>,
}

/// `sum over i of max(group_i) + 1`, for groups keyed by cardinality `1..=r`.
pub fn gc_upper_bound_symmetric(groups: &BTreeMap<usize, Vec<usize>>) -> Result<SymmetricBound> {
    let r = *groups.keys().max().ok_or(Error::EmptyInput)?;
    let mut maxima = Vec::with_capacity(r);
    for i in (1..=r).rev() {
        let g = groups.get(&i).filter(|g| !g.is_empty()).ok_or(Error::MissingCardinality(i))?;
        if g.contains(&0) {
            return Err(Error::NonPositiveBound);
        }
        maxima.push((i, *g.iter().max().expect("nonempty")));
    }
    if groups.contains_key(&0) {
        return Err(Error::MissingCardinality(0));
    }
    let result = maxima.iter().map(|(_, m)| m).sum::<usize>() + 1;
    Ok(SymmetricBound { result, maxima })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceDims {
    pub label: String,
    pub cardinality: usize,
    /// Dimension of the piece `A_Delta` of the total cut locus.
    pub dim: usize,
    pub connectivity: usize,
    pub cat_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltinExample {
    pub name: String,
    pub manifold_dim: usize,
    pub pieces: Vec<PieceDims>,
    pub groups: BTreeMap<usize, Vec<usize>>,
    pub bound: SymmetricBound,
    pub expected: usize,
}

/// Prepared inputs for `gr2c4`, `cpn(n)` and `hpn(n)`, evaluated through the category
/// estimate and the symmetric-space bound.
pub fn builtin_example(name: &str) -> Result<BuiltinExample> {
    let trimmed = name.trim().to_ascii_lowercase();
    let unknown = || Error::UnknownExample(name.to_string());
    let param = |prefix: &str| -> Option<usize> {
        let rest = trimmed.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
        rest.parse().ok().filter(|n| (1..=64).contains(n))
    };
    let (manifold_dim, pieces, expected) = if trimmed == "gr2c4" {
        // A_Delta is a bundle over the 8-dimensional Grassmannian with fiber C_Delta.
        let mk = |label: &str, card: usize, fiber: usize| {
            let dim = 8 + fiber;
            PieceDims { label: label.into(), cardinality: card, dim, connectivity: 1, cat_bound: cat_upper_bound(dim, true) }
        };
        (8, vec![mk("Delta_0", 2, 6), mk("Delta_1", 1, 4), mk("Delta_2", 1, 0)], 16)
    } else if let Some(n) = param("cpn") {
        // Cut(CP^n) fibers over CP^n with fiber CP^{n-1}; simply connected.
        let dim = 4 * n - 2;
        let cut = PieceDims { label: "Cut".into(), cardinality: 1, dim, connectivity: 1, cat_bound: cat_upper_bound(dim, true) };
        (2 * n, vec![cut], 2 * n + 1)
    } else if let Some(n) = param("hpn") {
        // Cut(HP^n) fibers over HP^n with fiber HP^{n-1}; 3-connected.
        let dim = 8 * n - 4;
        let cut = PieceDims { label: "Cut".into(), cardinality: 1, dim, connectivity: 3, cat_bound: cat_upper_bound_connected(dim, 3) };
        (4 * n, vec![cut], 2 * n + 1)
    } else {
        return Err(unknown());
    };
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in &pieces {
        groups.entry(p.cardinality).or_default().push(p.cat_bound);
    }
    let bound = gc_upper_bound_symmetric(&groups)?;
    Ok(BuiltinExample { name: trimmed, manifold_dim, pieces, groups, bound, expected })
}
