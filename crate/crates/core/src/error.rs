//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // --- network parsing / validation ---
    #[error("unsupported section {section} at line {line}")]
    UnsupportedSection { section: String, line: usize },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("pipe {pipe:?} references unknown node {node:?}")]
    MissingEndpoint { pipe: String, node: String },
    #[error("unknown or missing units directive: {0}")]
    UnitsUnknown(String),
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("network has no reservoir")]
    NoReservoir,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node {a:?} is unreachable from {b:?}")]
    Unreachable { a: String, b: String },

    // --- numerics ---
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("target leak flow {target} m3/s is infeasible: {reason}")]
    TargetInfeasible { target: f64, reason: String },
    #[error("QP is infeasible: {0}")]
    Infeasible(String),
    #[error("QP solver diverged: {0}")]
    SolverDiverged(String),
    #[error("singular KKT system: {0}")]
    SingularKKT(String),

    // --- learning ---
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("inconsistent labels: {0}")]
    InconsistentLabels(String),
    #[error("too few atoms: {n_atom} atoms for {n_class} classes")]
    TooFewAtoms { n_atom: usize, n_class: usize },

    // --- placement / experiments ---
    #[error("not enough candidates: requested {requested}, available {available}")]
    NotEnoughCandidates { requested: usize, available: usize },
    #[error("dataset is missing full-state ground truth")]
    MissingGroundTruth,
    #[error("sensor configuration mismatch: {0}")]
    SensorMismatch(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    // --- io ---
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad matrix file: {0}")]
    BadMatrixFile(String),
    #[error("artifact integrity check failed: {0}")]
    Integrity(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Wrap an error with a pipeline stage label.
    pub fn stage(stage: impl Into<String>, source: Error) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
