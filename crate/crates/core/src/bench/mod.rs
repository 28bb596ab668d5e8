//! Reference tables, randomized cross-checks and timing, all in `f64`.

pub mod fixtures;
pub mod fuzz;
pub mod perf;

pub use fixtures::{run_fixture_suite, FixtureCase, FixtureReport, FixtureRow, Suite};
pub use fuzz::{fuzz, sample_case, FuzzConfig, FuzzReport};
pub use perf::{
    convergence_order, fit_order, throughput, throughput_noniterative, ConvergenceOrder, Throughput,
};
