use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Input problems found while parsing or constructing an instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("malformed model file: {0}")]
    Json(String),
    #[error("instance has no agents")]
    NoAgents,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("edge references unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: String, to: String },
    #[error("self-loop on agent `{0}`")]
    SelfLoop(String),
    #[error("negative weight {weight} on edge {from} -> {to}")]
    NegativeWeight { from: String, to: String, weight: f64 },
    #[error("non-finite value in `{field}`{}", agent_suffix(.agent))]
    NonFinite { field: &'static str, agent: Option<String> },
    #[error("`{field}` must be positive, got {value}{}", agent_suffix(.agent))]
    NonPositive { field: &'static str, value: f64, agent: Option<String> },
    #[error("`{field}` must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("`{field}` has length {found}, expected {expected}")]
    DimensionMismatch { field: &'static str, expected: usize, found: usize },
    #[error("{0}")]
    Argument(String),
}

fn agent_suffix(agent: &Option<String>) -> String {
    match agent {
        Some(a) => format!(" (agent `{a}`)"),
        None => String::new(),
    }
}

/// Which spectral condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Unique interior equilibrium: rho(beta C^-1 G) < 1.
    A1,
    /// Well-posed principal problem: rho(delta (MG)^T MG) < 1.
    A2,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::A1 => f.write_str("A1"),
            Condition::A2 => f.write_str("A2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("{condition} violated, rho={rho}")]
    Assumption { condition: Condition, rho: f64 },
    #[error("objective not concave: smallest eigenvalue of the first-order system is {min_eigenvalue}")]
    NotConcave { min_eigenvalue: f64 },
    #[error("eigenvalue routine did not converge (best estimate {estimate})")]
    EigenNonConvergence { estimate: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// The innermost error, skipping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Validation(_) => 2,
            Error::Assumption { .. } | Error::NotConcave { .. } => 3,
            Error::EigenNonConvergence { .. } | Error::Numeric(_) => 4,
            Error::Consistency(_) => 5,
            Error::Stage { .. } => unreachable!(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::Validation(_) => "validation",
            Error::Assumption { .. } => "assumption",
            Error::NotConcave { .. } => "not_concave",
            Error::EigenNonConvergence { .. } => "eigen_non_convergence",
            Error::Numeric(_) => "numeric",
            Error::Consistency(_) => "consistency",
            Error::Stage { .. } => unreachable!(),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
