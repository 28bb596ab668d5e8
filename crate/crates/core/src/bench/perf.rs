//! Timing and convergence-rate measurements.

use std::hint::black_box;
use std::time::Instant;

use crate::eos::{GasParams, PrimitiveState};
use crate::error::{Error, Result};
use crate::estimator::{
    bracket_history, estimate_lambda_max, noniterative_upper_bound, EstimatorConfig,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub repetitions: usize,
    pub seconds: f64,
    pub calls_per_second: f64,
    /// Result of the final call.
    pub lambda_max: f64,
    pub iterations: usize,
}

fn timed<F: FnMut() -> Result<(f64, usize)>>(
    repetitions: usize,
    mut call: F,
) -> Result<Throughput> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument(
            "repetitions must be at least 1".into(),
        ));
    }
    let mut last = (0.0, 0);
    let start = Instant::now();
    for _ in 0..repetitions {
        last = black_box(call()?);
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(Throughput {
        repetitions,
        seconds,
        calls_per_second: repetitions as f64 / seconds.max(f64::MIN_POSITIVE),
        lambda_max: last.0,
        iterations: last.1,
    })
}

/// Wall-clock time of `repetitions` full estimates on one input.
pub fn throughput(
    left: &PrimitiveState<f64>,
    right: &PrimitiveState<f64>,
    gas: &GasParams<f64>,
    cfg: &EstimatorConfig<f64>,
    repetitions: usize,
) -> Result<Throughput> {
    timed(repetitions, || {
        let est = estimate_lambda_max(
            black_box(left),
            black_box(right),
            black_box(gas),
            black_box(cfg),
        )?;
        Ok((est.lambda_max_upper(), est.iterations))
    })
}

/// Same as [`throughput`] for the initialization-only bound.
pub fn throughput_noniterative(
    left: &PrimitiveState<f64>,
    right: &PrimitiveState<f64>,
    gas: &GasParams<f64>,
    repetitions: usize,
) -> Result<Throughput> {
    timed(repetitions, || {
        Ok((
            noniterative_upper_bound(black_box(left), black_box(right), black_box(gas))?,
            0,
        ))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvergenceOrder {
    Fitted {
        order: f64,
        relative_widths: Vec<f64>,
    },
    /// Fewer than three resolvable widths.
    Indeterminate { relative_widths: Vec<f64> },
}

impl ConvergenceOrder {
    pub fn order(&self) -> Option<f64> {
        match self {
            ConvergenceOrder::Fitted { order, .. } => Some(*order),
            ConvergenceOrder::Indeterminate { .. } => None,
        }
    }

    pub fn relative_widths(&self) -> &[f64] {
        match self {
            ConvergenceOrder::Fitted {
                relative_widths, ..
            }
            | ConvergenceOrder::Indeterminate { relative_widths } => relative_widths,
        }
    }
}

/// Widths below this are dominated by rounding and excluded from the fit.
pub const WIDTH_FLOOR: f64 = 1e-14;

/// Order `q` from the last three errors `e_{k+1} ~ C e_k^q`:
/// `q = ln(e_{k+1}/e_k) / ln(e_k/e_{k-1})`.
pub fn fit_order(errors: &[f64]) -> Option<f64> {
    let e: Vec<f64> = errors
        .iter()
        .copied()
        .filter(|&x| x > WIDTH_FLOOR)
        .collect();
    if e.len() < 3 {
        return None;
    }
    let n = e.len();
    let q = (e[n - 1] / e[n - 2]).ln() / (e[n - 2] / e[n - 3]).ln();
    q.is_finite().then_some(q)
}

/// Fits the convergence order of the bracket widths `(p2 - p1) / p2`
/// produced at `eps = 1e-15`. The iteration stops on its own criterion; no
/// extra iterations are forced.
pub fn convergence_order(
    left: &PrimitiveState<f64>,
    right: &PrimitiveState<f64>,
    gas: &GasParams<f64>,
    skip_newton_init: bool,
) -> Result<ConvergenceOrder> {
    let cfg = EstimatorConfig {
        eps: 1e-15,
        skip_newton_init,
        ..EstimatorConfig::default()
    };
    let (history, _) = bracket_history(left, right, gas, &cfg)?;
    let widths: Vec<f64> = history
        .iter()
        .filter(|b| b.p2 > 0.0)
        .map(|b| b.width() / b.p2)
        .collect();
    Ok(match fit_order(&widths) {
        Some(order) => ConvergenceOrder::Fitted {
            order,
            relative_widths: widths,
        },
        None => ConvergenceOrder::Indeterminate {
            relative_widths: widths,
        },
    })
}
