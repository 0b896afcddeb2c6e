use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector is not unit length (norm {norm})")]
    NonUnit { norm: f64 },
    #[error("velocity is not tangent at the base point (inner product {inner})")]
    NonTangent { inner: f64 },
    #[error("velocity has a vertical component {vertical} at the lift")]
    NonHorizontal { vertical: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("start point is not strictly inside the half-space (inner product {inner})")]
    OutsideHalfSpace { inner: f64 },
    #[error("points live on different manifolds ({left} vs {right})")]
    ManifoldMismatch { left: String, right: String },
    #[error("pair lies too close to a cut stratum to classify (margin {margin:e})")]
    AmbiguousNearCut { margin: f64 },
    #[error("two tied deck indices {indices:?} are not adjacent mod {p}")]
    NonAdjacentTie { p: u32, indices: Vec<u32> },
    #[error("unexpected minimizer multiplicity {count} on lens space with p = {p}")]
    UnexpectedTieMultiplicity { p: u32, count: usize },
    #[error("isometry datum deviates from unitarity by {deviation:e}")]
    NotUnitary { deviation: f64 },
    #[error("isometry datum does not fit {manifold}")]
    IsometryMismatch { manifold: String },
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: u32, max: u32 },
    #[error("index {index} is singular for p = {p} (sin vanishes)")]
    SingularIndex { p: u32, index: u32 },
    #[error("boundary index set {indices:?} is not one of the admissible strata")]
    InvalidStratum { indices: Vec<u32> },
    #[error("boundary point {point:?} has forbidden vanishing pattern {indices:?}")]
    LemmaViolation { point: Vec<f64>, indices: Vec<u32> },
    #[error("trigonometric inequality fails at p = {p}, m = {m} (margin {margin:e})")]
    InequalityViolation { p: u32, m: u32, margin: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no piece of the decomposition accepts the pair")]
    NoPiece,
    #[error("several pieces ({ids:?}) accept the pair")]
    OverlappingPieces { ids: Vec<usize> },
    #[error("empty input")]
    EmptyInput,
    #[error("bound group for cardinality {0} is missing or empty")]
    MissingCardinality(usize),
    #[error("secat bounds must be positive")]
    NonPositiveBound,
    #[error("degenerate root data: {0}")]
    DegenerateRootData(String),
    #[error("unknown builtin example {0:?}")]
    UnknownExample(String),
    #[error("no shooting direction landed (grid {grid_size}, land_tol {land_tol:e})")]
    GridTooCoarse { grid_size: usize, land_tol: f64 },
    #[error("cannot parse manifold spec {0:?} (expected s<n>, cp<n>, hp<n> or lens<p>)")]
    BadManifoldSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
