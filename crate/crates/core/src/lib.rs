//! Guaranteed upper bounds on the maximum wave speed of the one-dimensional
//! Euler Riemann problem for a co-volume gas.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); `*64` and `*32`
//! aliases below fix the scalar for common use.

pub mod bench;
pub mod eos;
pub mod error;
pub mod estimator;
pub mod fmt;
pub mod oracle;
pub mod scalar;
pub mod solver1d;

pub use eos::{GasParams, Phase, PrimitiveState, RiemannProblem, Side, WaveCurve, WaveCurveCoeffs};
pub use error::{Error, Result};
pub use estimator::{
    estimate_extreme_speeds, estimate_lambda_max, initialize, noniterative_upper_bound,
    EstimatorConfig, ExtremeSpeeds, Init, PressureBracket, SpeedBounds, SpeedEstimate, StopRule,
    Termination, UpdateScheme,
};
pub use oracle::{
    check_admissibility, gap_lower_bound, naive_estimate, p_star_exact, solve_exact, ExactSolution,
    WaveKind,
};
pub use scalar::Real;
pub use solver1d::{
    run_shocktube, ConservedState, OverheadCounters, ShockTubeCase, ShockTubeConfig, ShockTubeRun,
};

pub type GasParams64 = GasParams<f64>;
pub type PrimitiveState64 = PrimitiveState<f64>;
pub type RiemannProblem64 = RiemannProblem<f64>;
pub type EstimatorConfig64 = EstimatorConfig<f64>;
pub type SpeedEstimate64 = SpeedEstimate<f64>;
pub type PressureBracket64 = PressureBracket<f64>;

pub type GasParams32 = GasParams<f32>;
pub type PrimitiveState32 = PrimitiveState<f32>;
pub type EstimatorConfig32 = EstimatorConfig<f32>;
pub type SpeedEstimate32 = SpeedEstimate<f32>;
