use thiserror::Error;

/// Errors raised by the transport, support and limb routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {site} carries mass but has no assignment in the map")]
    DomainMismatch { site: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("total masses differ: {mu} vs {nu}")]
    MassMismatch { mu: String, nu: String },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFiniteCost { row: usize, col: usize },

    #[error("support graph is not a forest; cycle through x={xs:?}, y={ys:?}")]
    NotAForest { xs: Vec<usize>, ys: Vec<usize> },

    #[error("no nonnegative coupling vanishes outside the system: stage {stage}, site {site}, deficit {deficit}")]
    Infeasible {
        stage: usize,
        site: usize,
        deficit: String,
    },

    #[error("candidate has mass at ({row}, {col}) outside the limb system")]
    OutsideSystem { row: usize, col: usize },

    #[error("instance too large for brute force: {size} > {max}")]
    TooLarge { size: usize, max: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable code, used for the CLI's JSON error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DomainMismatch { .. } => "DomainMismatch",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::MassMismatch { .. } => "MassMismatch",
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::InvalidCoupling(_) => "InvalidCoupling",
            Error::NonFiniteCost { .. } => "NonFiniteCost",
            Error::NotAForest { .. } => "NotAForest",
            Error::Infeasible { .. } => "Infeasible",
            Error::OutsideSystem { .. } => "OutsideSystem",
            Error::TooLarge { .. } => "TooLarge",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::Parse(_) => "Parse",
            Error::Internal(_) => "Internal",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
