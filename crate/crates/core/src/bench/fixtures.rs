//! Reference cases with expected digits, and the runner that checks them.
//!
//! Every case below uses an ideal gas with `gamma = 1.4`. Expected values
//! are kept as decimal strings exactly as published or recorded; each one
//! carries its own tolerance.

use std::io::{self, Write};

use crate::eos::{GasParams, PrimitiveState};
use crate::error::Result;
use crate::estimator::{estimate_lambda_max, EstimatorConfig};
use crate::fmt::g17;
use crate::oracle::{naive_estimate, solve_exact};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    SlowShock,
    FastShock,
    CounterExamples,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "slow" | "slow-shock" | "slowshock" => Some(Suite::SlowShock),
            "fast" | "fast-shock" | "fastshock" => Some(Suite::FastShock),
            "counter" | "counter-examples" | "counterexamples" | "naive" => {
                Some(Suite::CounterExamples)
            }
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Printed in the reference tables (possibly rounded there).
    Published,
    /// Computed by this crate's exact solver and frozen.
    Computed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
    Exact,
}

impl Tolerance {
    pub fn accepts(self, expected: f64, actual: f64) -> bool {
        match self {
            Tolerance::Relative(r) => (actual - expected).abs() <= r * expected.abs(),
            Tolerance::Absolute(a) => (actual - expected).abs() <= a,
            Tolerance::Exact => actual == expected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Iteration count of the estimator.
    K,
    /// Estimator upper bound.
    LambdaMax,
    P1,
    P2,
    /// Exact star pressure.
    PStar,
    /// Exact maximum wave speed.
    ExactLambdaMax,
    /// `max(|u_L| + a_L, |u_R| + a_R)`.
    Naive,
    /// Exact maximum wave speed over the naive estimate.
    Ratio,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::K => "k",
            Field::LambdaMax => "lambda_max",
            Field::P1 => "p1",
            Field::P2 => "p2",
            Field::PStar => "p_star",
            Field::ExactLambdaMax => "exact_lambda_max",
            Field::Naive => "naive",
            Field::Ratio => "ratio",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub field: Field,
    pub value: &'static str,
    pub tol: Tolerance,
    pub source: Source,
}

const REL: Tolerance = Tolerance::Relative(1e-11);

const fn published(field: Field, value: &'static str) -> Expected {
    Expected {
        field,
        value,
        tol: REL,
        source: Source::Published,
    }
}

const fn k(value: &'static str) -> Expected {
    Expected {
        field: Field::K,
        value,
        tol: Tolerance::Exact,
        source: Source::Published,
    }
}

const fn rounded(field: Field, value: &'static str, abs: f64) -> Expected {
    Expected {
        field,
        value,
        tol: Tolerance::Absolute(abs),
        source: Source::Published,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureCase {
    pub id: &'static str,
    pub suite: Suite,
    /// `(rho, u, p)`.
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub gamma: f64,
    pub b: f64,
    pub eps: f64,
    pub expected: &'static [Expected],
}

impl FixtureCase {
    pub fn states(&self) -> (PrimitiveState<f64>, PrimitiveState<f64>) {
        let [rl, ul, pl] = self.left;
        let [rr, ur, pr] = self.right;
        (
            PrimitiveState::new(rl, ul, pl),
            PrimitiveState::new(rr, ur, pr),
        )
    }

    pub fn gas(&self) -> GasParams<f64> {
        GasParams {
            gamma: self.gamma,
            b: self.b,
        }
    }

    pub fn config(&self) -> EstimatorConfig<f64> {
        EstimatorConfig::with_eps(self.eps)
    }
}

const SLOW: [f64; 2] = [0.01, 100.0];
const FAST_1_L: [f64; 3] = [1.0, 10.0, 1000.0];
const FAST_1_R: [f64; 3] = [1.0, 10.0, 0.01];
const FAST_2_L: [f64; 3] = [5.99924, 19.5975, 460.894];
const FAST_2_R: [f64; 3] = [5.99242, -6.19633, 46.0950];
const P_STAR_SLOW: &str = "46.09504424886797";

pub static FIXTURES: &[FixtureCase] = &[
    FixtureCase {
        id: "slow-1",
        suite: Suite::SlowShock,
        left: [1.0, 0.0, SLOW[0]],
        right: [1.0, 0.0, SLOW[1]],
        gamma: 1.4,
        b: 0.0,
        eps: 1e-15,
        expected: &[
            k("0"),
            published(Field::LambdaMax, "11.83215956619923"),
            published(Field::P1, "37.70559999364363"),
            published(Field::P2, "82.98306927558072"),
            published(Field::PStar, P_STAR_SLOW),
        ],
    },
    FixtureCase {
        id: "slow-2",
        suite: Suite::SlowShock,
        left: [1.0, -1.0, SLOW[0]],
        right: [1.0, -1.0, SLOW[1]],
        gamma: 1.4,
        b: 0.0,
        eps: 1e-15,
        expected: &[
            k("1"),
            published(Field::LambdaMax, "10.83215956619923"),
            published(Field::P1, "45.87266091833658"),
            published(Field::P2, "46.70007404915459"),
            published(Field::PStar, P_STAR_SLOW),
        ],
    },
    FixtureCase {
        id: "slow-3",
        suite: Suite::SlowShock,
        left: [1.0, -2.18, SLOW[0]],
        right: [1.0, -2.18, SLOW[1]],
        gamma: 1.4,
        b: 0.0,
        eps: 1e-15,
        expected: &[
            k("2"),
            published(Field::LambdaMax, "9.65215956619923"),
            published(Field::P1, "46.09504109404150"),
            published(Field::P2, "46.09505272562230"),
            published(Field::PStar, P_STAR_SLOW),
        ],
    },
    FixtureCase {
        id: "fast-1-eps1e-1",
        suite: Suite::FastShock,
        left: FAST_1_L,
        right: FAST_1_R,
        gamma: 1.4,
        b: 0.0,
        eps: 1e-1,
        expected: &[
            k("1"),
            published(Field::LambdaMax, "33.81930602421521"),
            published(Field::P1, "455.2466713625296"),
            published(Field::P2, "472.7977828960125"),
        ],
    },
    FixtureCase {
        id: "fast-1-eps1e-2",
        suite: Suite::FastShock,
        left: FAST_1_L,
        right: FAST_1_R,
        gamma: 1.4,
        b: 0.0,
        eps: 1e-2,
        expected: &[
            k("2"),
            published(Field::LambdaMax, "33.51755796979217"),
            published(Field::P1, "460.8933865271423"),
            published(Field::P2, "460.8946107187795"),
        ],
    },
    FixtureCase {
        id: "fast-1-eps1e-15",
        suite: Suite::FastShock,
        left: FAST_1_L,
        right: FAST_1_R,
        gamma: 1.4,
        b: 0.0,
        eps: 1e-15,
        expected: &[
            k("3"),
            published(Field::LambdaMax, "33.51753696690324"),
            published(Field::P1, "460.8937874913834"),
            published(Field::P2, "460.8937874913835"),
        ],
    },
    FixtureCase {
        id: "fast-2-eps1e-1",
        suite: Suite::FastShock,
        left: FAST_2_L,
        right: FAST_2_R,
        gamma: 1.4,
        b: 0.0,
        eps: 1e-1,
        expected: &[
            k("1"),
            published(Field::LambdaMax, "12.25636731290528"),
            published(Field::P1, "1691.520678281327"),
            published(Field::P2, "1692.676852734373"),
        ],
    },
    FixtureCase {
        id: "fast-2-eps1e-4",
        suite: Suite::FastShock,
        left: FAST_2_L,
        right: FAST_2_R,
        gamma: 1.4,
        b: 0.0,
        eps: 1e-4,
        expected: &[
            k("2"),
            published(Field::LambdaMax, "12.25077812313116"),
            published(Field::P1, "1691.646955398068"),
            published(Field::P2, "1691.646955407751"),
        ],
    },
    FixtureCase {
        id: "fast-2-eps1e-15",
        suite: Suite::FastShock,
        left: FAST_2_L,
        right: FAST_2_R,
        gamma: 1.4,
        b: 0.0,
        eps: 1e-15,
        expected: &[
            k("3"),
            published(Field::LambdaMax, "12.25077812308434"),
            published(Field::P1, "1691.646955399126"),
            published(Field::P2, "1691.646955399126"),
            published(Field::PStar, "1691.646955399126"),
        ],
    },
    FixtureCase {
        id: "naive-over",
        suite: Suite::CounterExamples,
        left: FAST_2_L,
        right: FAST_2_R,
        gamma: 1.4,
        b: 0.0,
        eps: 1e-15,
        expected: &[
            rounded(Field::ExactLambdaMax, "12.25", 0.005),
            rounded(Field::Naive, "29.97", 0.005),
            rounded(Field::Ratio, "0.41", 0.02),
        ],
    },
    FixtureCase {
        id: "naive-under",
        suite: Suite::CounterExamples,
        left: [0.01, 0.0, 0.01],
        right: [1000.0, 0.0, 1000.0],
        gamma: 1.4,
        b: 0.0,
        eps: 1e-15,
        expected: &[
            rounded(Field::ExactLambdaMax, "5.227", 0.0005),
            Expected {
                field: Field::ExactLambdaMax,
                value: "5.227270670473105",
                tol: REL,
                source: Source::Computed,
            },
            rounded(Field::Naive, "1.183", 0.0005),
            rounded(Field::Ratio, "4.4", 0.05),
        ],
    },
];

pub fn cases(suite: Suite) -> impl Iterator<Item = &'static FixtureCase> {
    FIXTURES.iter().filter(move |c| suite.includes(c.suite))
}

pub fn find(id: &str) -> Option<&'static FixtureCase> {
    FIXTURES.iter().find(|c| c.id == id)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureRow {
    pub case: &'static str,
    pub field: Field,
    pub expected: f64,
    pub actual: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub source: Source,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureReport {
    pub rows: Vec<FixtureRow>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FixtureRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn row(&self, case: &str, field: Field) -> Option<&FixtureRow> {
        self.rows
            .iter()
            .find(|r| r.case == case && r.field == field)
    }

    /// `case,field,expected,actual,rel_err,pass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# fixture report: {} rows, {} failed",
            self.rows.len(),
            self.failures().count()
        )?;
        writeln!(w, "case,field,expected,actual,rel_err,pass")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.case,
                r.field.name(),
                g17(r.expected),
                g17(r.actual),
                g17(r.rel_err),
                r.pass
            )?;
        }
        Ok(())
    }

    /// One line per case: `case: ok` or the failing fields.
    pub fn write_summary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut ids: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !ids.contains(&r.case) {
                ids.push(r.case);
            }
        }
        for id in ids {
            let bad: Vec<_> = self
                .rows
                .iter()
                .filter(|r| r.case == id && !r.pass)
                .map(|r| r.field.name())
                .collect();
            if bad.is_empty() {
                writeln!(w, "{id}: ok")?;
            } else {
                writeln!(w, "{id}: FAILED {}", bad.join(" "))?;
            }
        }
        let failed = self.failures().count();
        writeln!(w, "{} checks, {} failed", self.rows.len(), failed)
    }
}

/// Computes every field a case can be checked against.
fn actual(case: &FixtureCase, field: Field) -> Result<f64> {
    let (l, r) = case.states();
    let gas = case.gas();
    Ok(match field {
        Field::K | Field::LambdaMax | Field::P1 | Field::P2 => {
            let est = estimate_lambda_max(&l, &r, &gas, &case.config())?;
            match field {
                Field::K => est.iterations as f64,
                Field::LambdaMax => est.lambda_max_upper(),
                Field::P1 => est.bracket.p1,
                _ => est.bracket.p2,
            }
        }
        Field::PStar => solve_exact(&l, &r, &gas)?.p_star,
        Field::ExactLambdaMax => solve_exact(&l, &r, &gas)?.lambda_max,
        Field::Naive => naive_estimate(&l, &r, &gas)?,
        Field::Ratio => solve_exact(&l, &r, &gas)?.lambda_max / naive_estimate(&l, &r, &gas)?,
    })
}

pub fn run_case(case: &'static FixtureCase) -> Result<Vec<FixtureRow>> {
    case.expected
        .iter()
        .map(|e| {
            let expected: f64 = e.value.parse().expect("fixture literal parses");
            let actual = actual(case, e.field)?;
            let rel_err = if expected == 0.0 {
                (actual - expected).abs()
            } else {
                ((actual - expected) / expected).abs()
            };
            Ok(FixtureRow {
                case: case.id,
                field: e.field,
                expected,
                actual,
                rel_err,
                pass: e.tol.accepts(expected, actual),
                source: e.source,
            })
        })
        .collect()
}

pub fn run_fixture_suite(suite: Suite) -> Result<FixtureReport> {
    let mut report = FixtureReport::default();
    for case in cases(suite) {
        report.rows.extend(run_case(case)?);
    }
    Ok(report)
}
