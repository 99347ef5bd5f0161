use crate::graph::Vertex;

/// Errors raised while constructing or querying sphere-stratified graphs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("edge length must be strictly positive and finite, got {value} ({context})")]
    NonpositiveLength { value: f64, context: String },
    #[error("sphere numbers must be at least 1 (sphere {sphere} has {size})")]
    NonpositiveSphere { sphere: usize, size: usize },
    #[error("length scheme underflows to zero at n = {n}; reduce the horizon")]
    SchemeUnderflow { n: usize },
    #[error("horizon {requested} exceeds generated horizon {available}")]
    HorizonExceeded { requested: usize, available: usize },
    #[error("explicit scheme has no entry for n = {n}")]
    SchemeExhausted { n: usize },
    #[error("unknown vertex ({0})")]
    UnknownVertex(Vertex),
    #[error("duplicate edge ({i},{j}) at sphere {sphere}")]
    DuplicateEdge { sphere: usize, i: usize, j: usize },
    #[error("vertex {index} in sphere {sphere} has no backward edge; graph would be disconnected")]
    DisconnectedSphere { sphere: usize, index: usize },
    #[error("rope ladder has no horizontal edge at level 0")]
    RungAtRoot,
    #[error("operation requires family {expected}, got {found}")]
    WrongFamily { expected: String, found: String },
    #[error("canonical ray set is empty")]
    EmptyRaySet,
    #[error("invalid family config: {0}")]
    Config(String),
}

/// Errors from the sphere recurrences and harmonic solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarmonicError {
    #[error("graph has horizontal edges; the sphere recurrence assumes none")]
    HorizontalEdgesPresent,
    #[error("seed violates the root equation: |M1 f1 - d f0| = {residual:.3e} > {tol:.3e}")]
    SeedInconsistent { residual: f64, tol: f64 },
    #[error("right-hand side leaves the recurrence range at sphere {sphere} (residual {residual:.3e})")]
    InconsistentAt { sphere: usize, residual: f64 },
    #[error("recurrence iterates overflowed at sphere {sphere}")]
    Overflow { sphere: usize },
    #[error("boundary data missing for vertex ({0})")]
    MissingBoundaryValue(Vertex),
    #[error("harmonic system is singular (unexpected for a connected truncation)")]
    SingularSystem,
    #[error("unknown family for deficiency estimation: {0}")]
    UnknownFamily(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors from end detection and classification.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EndsError {
    #[error("horizon {0} is too small; need at least 2")]
    HorizonTooSmall(usize),
    #[error("total volume verdict is inconclusive; cannot certify the bound")]
    VolumeInconclusive,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors from the boundary-relation machinery.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RelationError {
    #[error("C and D must be square matrices of equal size ({0}x{1} vs {2}x{3})")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("relation is not self-adjoint: {0}")]
    NotSelfAdjoint(String),
}

/// Errors from discretization and end evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("mesh size must be positive, got {0}")]
    NonpositiveMesh(f64),
    #[error("eigensolver failed to converge: residual {achieved:.3e} > {required:.3e}")]
    ConvergenceFailure { achieved: f64, required: f64 },
    #[error("requested {requested} eigenvalues but the operator has dimension {dim}")]
    TooManyEigenvalues { requested: usize, dim: usize },
    #[error("graph has {0} branches at horizon; normal derivatives need a single end")]
    MultiEnded(usize),
    #[error("tail window {window} exceeds field horizon {horizon}")]
    WindowExceedsHorizon { window: usize, horizon: usize },
    #[error("field carries no second-derivative data")]
    MissingSecondDerivative,
    #[error(transparent)]
    Ends(#[from] EndsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
