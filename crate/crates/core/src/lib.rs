//! Cut loci, minimal geodesics and geodesic motion planners on round spheres,
//! complex and quaternionic projective spaces, and lens spaces `L(p;1)`.

pub mod error;
pub mod geometry;
pub mod isometry;
pub mod lens;
pub mod oracle;
pub mod planner;
pub mod quat;
pub mod sampling;
pub mod space;
pub mod symdecomp;
pub mod tol;
pub mod vecops;

pub use error::{Error, Result};
pub use geometry::{GeodesicSegment, TangentAtPoint, UnitVector};
pub use space::{
    GeodesicEnumeration, GeodesicFamily, LiftScalar, ManifoldPoint, ModelManifold, StratumLabel,
    StratumTag,
};
pub use tol::Tolerances;
