//! Brute-force enumeration of minimizing geodesics by shooting.
//!
//! Horizontal unit directions at the lift of `x` are laid out on a deterministic grid,
//! each is followed for the distance `d(x, y)`, and those landing near `y` are refined
//! by compass search over the direction until the landing error drops below
//! `1e-10`. Refined velocities are then clustered. Nothing here uses the closed-form
//! enumeration, so the two can certify each other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{sphere_distance, TangentAtPoint, UnitVector};
use crate::lens::DeckAction;
use crate::space::{ManifoldPoint, ModelManifold};
use crate::tol::COINCIDENT_TOL;
use crate::vecops::{complement_basis, dist, lincomb, normalized};

/// Landing error accepted after refinement.
pub const REFINED_TOL: f64 = 1e-10;
/// Cluster radius as a multiple of the landing tolerance.
pub const CLUSTER_FACTOR: f64 = 10.0;
/// A chain of more clusters than this is read as a continuous family.
pub const FAMILY_CHAIN: usize = 10;
pub const MIN_GRID: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub velocity: TangentAtPoint,
    pub length: f64,
    pub population: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub manifold: ModelManifold,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    pub grid_size: usize,
    pub land_tol: f64,
    /// `land_tol` widened by the landing displacement a grid cell can cause.
    pub effective_land_tol: f64,
    pub survivors: usize,
    pub refined: usize,
    pub clusters: Vec<Cluster>,
    pub family_detected: bool,
}

/// Quasi-uniform unit vectors of `R^k` for `k <= 4`, together with a covering radius.
pub fn direction_grid(k: usize, n: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let vol = |k: usize| match k {
        2 => TAU,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => 2.0,
    };
    let cover = |k: usize, count: usize| 2.0 * (vol(k) / count as f64).powf(1.0 / (k as f64 - 1.0));
    match k {
        1 => Ok((vec![vec![1.0], vec![-1.0]], 0.0)),
        2 => {
            let pts = (0..n).map(|i| {
                let a = TAU * (i as f64 + 0.5) / n as f64;
                vec![a.cos(), a.sin()]
            });
            Ok((pts.collect(), cover(2, n)))
        }
        3 => {
            // Fibonacci spiral: equal-area bands in z, golden-angle longitudes.
            let golden = PI * (3.0 - 5f64.sqrt());
            let pts = (0..n).map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let a = golden * i as f64;
                vec![r * a.cos(), r * a.sin(), z]
            });
            Ok((pts.collect(), cover(3, n)))
        }
        4 => {
            // Hopf coordinates (cos eta e^{i a}, sin eta e^{i b}); s = sin^2 eta is
            // uniformly distributed, so a product grid in (s, a, b) is equal-volume.
            let side = (n as f64).cbrt().ceil() as usize;
            let mut pts = Vec::with_capacity(side * side * side);
            for i in 0..side {
                let s = (i as f64 + 0.5) / side as f64;
                let (c, sn) = ((1.0 - s).sqrt(), s.sqrt());
                for j in 0..side {
                    let a = TAU * (j as f64 + 0.5) / side as f64;
                    for l in 0..side {
                        let b = TAU * (l as f64 + 0.5) / side as f64;
                        pts.push(vec![c * a.cos(), c * a.sin(), sn * b.cos(), sn * b.sin()]);
                    }
                }
            }
            let count = pts.len();
            Ok((pts, cover(4, count)))
        }
        _ => Err(Error::Unsupported(format!("tangent dimension {k} is too large for the shooting oracle"))),
    }
}

struct Shooter<'a> {
    m: &'a ModelManifold,
    x: &'a [f64],
    y: &'a [f64],
    /// Deck orbit of `y` for lens spaces, computed once.
    orbit: Vec<Vec<f64>>,
    basis: Vec<Vec<f64>>,
}

impl Shooter<'_> {
    fn velocity(&self, w: &[f64]) -> Option<Vec<f64>> {
        let mut v = vec![0.0; self.x.len()];
        for (c, b) in w.iter().zip(&self.basis) {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += c * bi;
            }
        }
        normalized(&v)
    }

    fn landing_error(&self, w: &[f64], t: f64) -> f64 {
        match self.velocity(w) {
            Some(v) => {
                let z = lincomb(t.cos(), self.x, t.sin(), &v);
                if self.orbit.is_empty() {
                    self.m.lift_distance(&z, self.y)
                } else {
                    self.orbit.iter().map(|o| sphere_distance(&z, o)).fold(f64::INFINITY, f64::min)
                }
            }
            None => f64::INFINITY,
        }
    }

    /// Compass search over the direction `w` at fixed length `t`, moving along a tangent
    /// frame of the unit sphere and renormalizing; the step halves when nothing improves.
    fn refine(&self, w0: &[f64], t: f64, step0: f64) -> (Vec<f64>, f64) {
        let k = w0.len();
        let mut w = normalized(w0).unwrap_or_else(|| w0.to_vec());
        let mut f = self.landing_error(&w, t);
        let mut h = step0.max(1e-3);
        let mut frame = complement_basis(k, std::slice::from_ref(&w));
        let mut iterations = 0;
        while f > REFINED_TOL * 1e-2 && h > 1e-15 && iterations < 5000 {
            iterations += 1;
            let mut best: Option<(Vec<f64>, f64)> = None;
            for e in &frame {
                for sgn in [h, -h] {
                    if let Some(cw) = normalized(&lincomb(1.0, &w, sgn, e)) {
                        let fc = self.landing_error(&cw, t);
                        if fc < best.as_ref().map_or(f, |b| b.1) {
                            best = Some((cw, fc));
                        }
                    }
                }
            }
            match best {
                Some((bw, bf)) => {
                    w = bw;
                    f = bf;
                    frame = complement_basis(k, std::slice::from_ref(&w));
                }
                None => h *= 0.5,
            }
        }
        (w, f)
    }
}

pub fn brute_force_minimizers(
    m: &ModelManifold,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    grid_size: usize,
    land_tol: f64,
) -> Result<OracleReport> {
    let supported = match *m {
        ModelManifold::Sphere(n) => n <= 4,
        ModelManifold::ComplexProjective(n) => n <= 2,
        ModelManifold::QuaternionicProjective(n) => n == 1,
        ModelManifold::Lens(_) => true,
    };
    if !supported {
        return Err(Error::Unsupported(format!("{m} is beyond the shooting oracle's dimension limit")));
    }
    if grid_size < MIN_GRID {
        return Err(Error::InvalidInput(format!("grid size {grid_size} (need >= {MIN_GRID})")));
    }
    if !(land_tol > 0.0) {
        return Err(Error::InvalidInput(format!("landing tolerance {land_tol} must be positive")));
    }
    let distance = m.distance(x, y)?;
    let mut report = OracleReport {
        manifold: *m,
        x: x.coords().to_vec(),
        y: y.coords().to_vec(),
        distance,
        grid_size,
        land_tol,
        effective_land_tol: land_tol,
        survivors: 0,
        refined: 0,
        clusters: Vec::new(),
        family_detected: false,
    };
    if distance < COINCIDENT_TOL {
        return Ok(report);
    }
    let orbit = match *m {
        ModelManifold::Lens(p) => DeckAction::new(p)?.orbit(y.coords()),
        _ => Vec::new(),
    };
    let shooter = Shooter { m, x: x.coords(), y: y.coords(), orbit, basis: m.horizontal_basis(&x.lift) };
    let (grid, cover) = direction_grid(shooter.basis.len(), grid_size)?;
    let effective = land_tol + distance.sin() * cover;
    report.effective_land_tol = effective;

    // Grid order is preserved by the indexed parallel collect, so reports are reproducible.
    let shots: Vec<Option<Option<(Vec<f64>, f64)>>> = grid
        .par_iter()
        .map(|w| {
            if shooter.landing_error(w, distance) > effective {
                return None;
            }
            let (w, f) = shooter.refine(w, distance, cover);
            if f > REFINED_TOL {
                return Some(None);
            }
            Some(shooter.velocity(&w).map(|v| (v, distance)))
        })
        .collect();
    report.survivors = shots.iter().filter(|s| s.is_some()).count();
    let hits: Vec<(Vec<f64>, f64)> = shots.into_iter().flatten().flatten().collect();
    report.refined = hits.len();
    if hits.is_empty() {
        return Err(Error::GridTooCoarse { grid_size, land_tol });
    }

    let radius = CLUSTER_FACTOR * land_tol;
    let mut reps: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    for (v, t) in hits {
        match reps.iter_mut().find(|(r, _, _)| dist(r, &v) <= radius) {
            Some(c) => c.2 += 1,
            None => reps.push((v, t, 1)),
        }
    }
    report.family_detected = longest_chain(&reps.iter().map(|r| r.0.clone()).collect::<Vec<_>>(), 2.0 * radius) > FAMILY_CHAIN;
    report.clusters = reps
        .into_iter()
        .map(|(v, t, population)| Cluster {
            velocity: TangentAtPoint { base: UnitVector::renormalized(x.coords().to_vec()), vec: v },
            length: t,
            population,
        })
        .collect();
    Ok(report)
}

/// Size of the largest connected component when points closer than `link` are joined.
fn longest_chain(points: &[Vec<f64>], link: f64) -> usize {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist(&points[i], &points[j]) <= link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut sizes = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        sizes[r] += 1;
    }
    sizes.into_iter().max().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub count_match: bool,
    pub velocity_max_err: f64,
    pub closed_form_count: usize,
    pub closed_form_family: bool,
    pub oracle_count: usize,
    pub family_detected: bool,
}

/// Matches oracle clusters to the closed-form minimizers by nearest initial velocity.
pub fn compare_with_closed_form(
    m: &ModelManifold,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    report: &OracleReport,
) -> Result<Comparison> {
    let e = m.minimal_geodesics(x, y)?;
    let mut cmp = Comparison {
        count_match: false,
        velocity_max_err: 0.0,
        closed_form_count: e.isolated.len(),
        closed_form_family: e.family.is_some(),
        oracle_count: report.clusters.len(),
        family_detected: report.family_detected,
    };
    if let Some(f) = &e.family {
        cmp.count_match = report.family_detected;
        cmp.velocity_max_err =
            report.clusters.iter().map(|c| f.velocity_error(&c.velocity.vec)).fold(0.0, f64::max);
        return Ok(cmp);
    }
    if report.family_detected || report.clusters.len() != e.isolated.len() {
        return Ok(cmp);
    }
    let mut used = vec![false; e.isolated.len()];
    for c in &report.clusters {
        let (j, err) = e
            .isolated
            .iter()
            .enumerate()
            .map(|(j, s)| (j, dist(&s.initial_velocity.vec, &c.velocity.vec)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("counts match and are nonzero");
        if used[j] {
            cmp.velocity_max_err = cmp.velocity_max_err.max(err);
            return Ok(cmp);
        }
        used[j] = true;
        cmp.velocity_max_err = cmp.velocity_max_err.max(err);
    }
    cmp.count_match = true;
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::{LAND_TOL, ORACLE_GRID};

    #[test]
    fn grids_are_unit_and_sized() {
        for k in 1..=4 {
            let (g, _) = direction_grid(k, 2000).unwrap();
            assert!(g.iter().all(|v| (v.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12));
            if k > 1 {
                assert!(g.len() >= 2000);
            }
        }
        assert!(direction_grid(5, 2000).is_err());
    }

    #[test]
    fn lens_circle_pair_has_p_minimizers() {
        let m = ModelManifold::Lens(3);
        let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let y = m.point(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let r = brute_force_minimizers(&m, &x, &y, ORACLE_GRID, LAND_TOL).unwrap();
        assert_eq!(r.clusters.len(), 3);
        assert!(!r.family_detected);
        let c = compare_with_closed_form(&m, &x, &y, &r).unwrap();
        assert!(c.count_match, "{c:?}");
    }

    #[test]
    fn antipodal_sphere_pair_is_a_family() {
        let m = ModelManifold::Sphere(2);
        let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
        let y = m.point(vec![-1.0, 0.0, 0.0]).unwrap();
        let r = brute_force_minimizers(&m, &x, &y, ORACLE_GRID, LAND_TOL).unwrap();
        assert!(r.family_detected);
        assert!(compare_with_closed_form(&m, &x, &y, &r).unwrap().count_match);
    }

    #[test]
    fn cp1_off_cut_pair() {
        let m = ModelManifold::ComplexProjective(1);
        let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let s = 0.5f64.sqrt();
        let y = m.point(vec![s, 0.0, s, 0.0]).unwrap();
        let r = brute_force_minimizers(&m, &x, &y, ORACLE_GRID, LAND_TOL).unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert!((r.clusters[0].length - PI / 4.0).abs() < 1e-8);
        let c = compare_with_closed_form(&m, &x, &y, &r).unwrap();
        assert!(c.count_match && c.velocity_max_err < 1e-6, "{c:?}");
    }

    #[test]
    fn rejects_large_manifolds_and_small_grids() {
        let m = ModelManifold::QuaternionicProjective(2);
        let x = m.point(UnitVector::basis(12, 0).into_inner()).unwrap();
        assert!(matches!(brute_force_minimizers(&m, &x, &x, ORACLE_GRID, LAND_TOL), Err(Error::Unsupported(_))));
        let m = ModelManifold::Sphere(2);
        let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(brute_force_minimizers(&m, &x, &x, 10, LAND_TOL), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn deterministic() {
        let m = ModelManifold::Lens(5);
        let x = m.point_normalized(vec![0.3, 0.1, -0.5, 0.2]).unwrap();
        let y = m.point_normalized(vec![-0.2, 0.7, 0.1, 0.4]).unwrap();
        let a = brute_force_minimizers(&m, &x, &y, 5000, LAND_TOL).unwrap();
        let b = brute_force_minimizers(&m, &x, &y, 5000, LAND_TOL).unwrap();
        assert_eq!(a, b);
    }
}
