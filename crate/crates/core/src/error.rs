use thiserror::Error;

use crate::classical::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// [`Error::name`] gives a stable machine-readable identifier and
/// [`Error::is_validation`] separates bad input from numerical failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{0}` must be strictly positive and finite")]
    NonPositiveParameter(&'static str),

    #[error("natural units require {field} = {expected}, got {got}")]
    UnitsModeMismatch {
        field: &'static str,
        expected: f64,
        got: f64,
    },

    #[error("neither the chemical potential nor the particle number was given")]
    MissingPotentialAndCount,

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no level satisfies the validity bound")]
    EmptySpectrum,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: estimated error {estimated:e} exceeds {limit:e} for level {level}")]
    GridTooCoarse {
        level: usize,
        estimated: f64,
        limit: f64,
    },

    #[error("eigenvalue bisection did not converge for index {0}")]
    NonConvergence(usize),

    #[error("particle number {target} is outside the attainable range ({min}, {max})")]
    Unbracketable { target: f64, min: f64, max: f64 },

    #[error("state at theta = {0} is outside the coordinate chart")]
    ChartBoundary(f64),

    #[error("trajectory left the coordinate chart after {} steps", .0.times.len().saturating_sub(1))]
    ChartExit(Box<Trajectory>),

    #[error("finite-difference step too small: estimates {coarse:e} and {fine:e} disagree")]
    StepTooSmall { coarse: f64, fine: f64 },

    #[error("need at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("grid is not uniform in 1/b (relative spacing deviation {0:e})")]
    NonUniformGrid(f64),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonPositiveParameter(_) => "NonPositiveParameter",
            Error::UnitsModeMismatch { .. } => "UnitsModeMismatch",
            Error::MissingPotentialAndCount => "MissingPotentialAndCount",
            Error::InvalidTruncation(_) => "InvalidTruncation",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::EmptySpectrum => "EmptySpectrum",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::NonConvergence(_) => "NonConvergence",
            Error::Unbracketable { .. } => "Unbracketable",
            Error::ChartBoundary(_) => "ChartBoundary",
            Error::ChartExit(_) => "ChartExit",
            Error::StepTooSmall { .. } => "StepTooSmall",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::NonUniformGrid(_) => "NonUniformGrid",
            Error::Config(_) => "Config",
        }
    }

    /// True when the error stems from the caller's input rather than from
    /// a numerical procedure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveParameter(_)
                | Error::UnitsModeMismatch { .. }
                | Error::MissingPotentialAndCount
                | Error::InvalidTruncation(_)
                | Error::InvalidArgument(_)
                | Error::InvalidGrid(_)
                | Error::ChartBoundary(_)
                | Error::TooFewPoints { .. }
                | Error::NonUniformGrid(_)
                | Error::Config(_)
        )
    }
}
