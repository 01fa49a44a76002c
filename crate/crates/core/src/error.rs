use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// The requested SINR vector has no nonnegative power solution.
    #[error("SINR vector is infeasible (spectral radius {spectral_radius:.6})")]
    InfeasibleSinr { spectral_radius: f64 },

    /// The primary users cannot be protected even without secondary users.
    #[error("primary network is infeasible without secondary users: {0}")]
    PrimaryInfeasible(String),

    #[error("no active secondary user to remove")]
    NoCandidate,

    #[error("expansion point has a non-positive SINR at index {0}")]
    DegenerateGamma(usize),

    #[error("geometric program has no strictly feasible point")]
    InfeasibleProblem,

    #[error("full system is not feasible at the target SINRs")]
    FeasibilityRequired,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CSV status column.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidNetwork(_) => "invalid_network",
            Error::InfeasibleSinr { .. } => "infeasible_sinr",
            Error::PrimaryInfeasible(_) => "primary_infeasible",
            Error::NoCandidate => "no_candidate",
            Error::DegenerateGamma(_) => "degenerate_gamma",
            Error::InfeasibleProblem => "infeasible_problem",
            Error::FeasibilityRequired => "feasibility_required",
            Error::InvalidScenario(_) => "invalid_scenario",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }
}
