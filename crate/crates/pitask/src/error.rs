use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A task, label or weight violated a structural constraint.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// A metric or behavior referenced a label that does not exist.
    #[error("unknown label: {0}")]
    Lookup(String),

    /// A quantum model failed validation (non-PSD state, bad trace, ...).
    #[error("model validation failed: {0}")]
    ModelValidation(String),

    /// An enumeration exceeded its configured budget.
    #[error("search budget exceeded: {0}")]
    Budget(String),

    /// The conic backend failed to produce a usable solution.
    #[error("solver failure ({status}): {detail}")]
    SolverFailure { status: String, detail: String },

    /// Declared equivalence constraints admit no feasible point.
    #[error("infeasible constraints: {0}")]
    InfeasibleConstraints(String),

    /// A metric does not have the shape required by an operation.
    #[error("metric shape not eligible: {0}")]
    MetricShape(String),

    /// Malformed experiment configuration.
    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
