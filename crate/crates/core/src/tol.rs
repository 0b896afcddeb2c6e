//! Numerical thresholds shared across modules.
//!
//! All values are absolute. Distances and angles are in radians.

use serde::{Deserialize, Serialize};

/// Allowed deviation of a lift or velocity from unit norm.
pub const UNIT_TOL: f64 = 1e-12;
/// Allowed deviation of a unit velocity from unit norm when passed to `exp`.
pub const VELOCITY_UNIT_TOL: f64 = 1e-10;
/// Allowed inner product between a base point and a tangent vector.
pub const TANGENT_TOL: f64 = 1e-10;
/// `<x, y> <= -1 + ANTIPODAL_TOL` selects the antipodal family branch.
pub const ANTIPODAL_TOL: f64 = 1e-12;
/// Pairs closer than this are the same point.
pub const COINCIDENT_TOL: f64 = 1e-10;
/// Default tie tolerance on distances.
pub const TIE_TOL: f64 = 1e-9;
/// Width factor of the ambiguity band `(tie_tol, AMBIGUITY_FACTOR * tie_tol)`.
pub const AMBIGUITY_FACTOR: f64 = 10.0;
/// Sign-pattern tolerance on `<u_k, r>` for the lens Dirichlet domain.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// A homogeneous coordinate with modulus below this counts as zero.
pub const CELL_TOL: f64 = 1e-12;
/// Default shooting landing tolerance of the brute-force oracle.
pub const LAND_TOL: f64 = 5e-3;
/// Default number of shooting directions of the oracle.
pub const ORACLE_GRID: usize = 20_000;

/// Run-time adjustable tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tie_tol: f64,
    pub land_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tie_tol: TIE_TOL, land_tol: LAND_TOL }
    }
}

impl Tolerances {
    /// Upper edge of the ambiguity band.
    pub fn ambiguity_limit(&self) -> f64 {
        self.tie_tol * AMBIGUITY_FACTOR
    }
}
