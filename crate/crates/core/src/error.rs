use thiserror::Error;

/// Errors reported by the estimator, the exact solver and the shock-tube driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} is not finite")]
    NonFinite { field: &'static str },
    #[error("gamma must be greater than 1 (got {0})")]
    InvalidGamma(f64),
    #[error("co-volume must be non-negative (got {0})")]
    NegativeCovolume(f64),
    #[error("{side} density is negative ({value})")]
    NegativeDensity { side: &'static str, value: f64 },
    #[error("{side} pressure is negative ({value})")]
    NegativePressure { side: &'static str, value: f64 },
    #[error("{side} state has zero density but pressure {value}; vacuum requires rho = p = 0")]
    PartialVacuum { side: &'static str, value: f64 },
    #[error("{side} state is inadmissible: 1 - b*rho = {covol} <= 0")]
    Inadmissible { side: &'static str, covol: f64 },
    #[error("vacuum state has no wave curve")]
    VacuumState,
    #[error("velocity jump opens a vacuum; the two-rarefaction pressure is undefined")]
    VacuumFormation,
    #[error(
        "gamma = {0} exceeds 5/3: the two-rarefaction pressure is not a certified upper bound"
    )]
    UncertifiedGamma(f64),
    #[error("could not bracket the star pressure after {0} doublings")]
    BracketExpansion(usize),
    #[error("exact solver did not converge after {0} iterations")]
    OracleNoConvergence(usize),
    #[error("star pressure is below the smallest positive float (p* < {upper})")]
    StarPressureUnderflow { upper: f64 },
    #[error("exact solver inconsistency: {0}")]
    OracleInconsistent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cell {cell} at sub-step {substep}: {reason}")]
    CellInvariant {
        cell: usize,
        substep: usize,
        reason: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
