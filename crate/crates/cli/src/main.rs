//! `wavebound`: batch front end for the estimator, the exact solver, the
//! reference tables, the randomized cross-check and the shock-tube driver.
//!
//! Exit status is 0 on success, 1 when a check or computation fails and 2
//! on invalid input.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavebound::bench::fixtures::find;
use wavebound::bench::{
    fuzz, run_fixture_suite, throughput, throughput_noniterative, FuzzConfig, Suite,
};
use wavebound::fmt::g17;
use wavebound::solver1d::{write_overhead_csv, write_profile_csv};
use wavebound::{
    estimate_lambda_max, naive_estimate, run_shocktube, solve_exact, Error, EstimatorConfig64,
    GasParams64, PrimitiveState, PrimitiveState64, RiemannProblem, ShockTubeCase, ShockTubeConfig,
    UpdateScheme,
};

#[derive(Parser)]
#[command(
    name = "wavebound",
    version,
    about = "Guaranteed upper bounds on the maximum wave speed of the Euler Riemann problem"
)]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// Ratio of specific heats [default: 1.4, or the case's own value]
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Co-volume [default: 0]
    #[arg(long, global = true)]
    b: Option<f64>,
    /// Relative tolerance of the estimate [default: 1e-10]
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Gauss-Seidel bracket update instead of Jacobi
    #[arg(long, global = true)]
    seidel: bool,
    /// Skip the Newton step on the initial bracket
    #[arg(long, global = true)]
    no_newton_init: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Kv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Kv,
}

#[derive(Args)]
struct States {
    #[arg(long)]
    rho_l: f64,
    #[arg(long)]
    u_l: f64,
    #[arg(long)]
    p_l: f64,
    #[arg(long)]
    rho_r: f64,
    #[arg(long)]
    u_r: f64,
    #[arg(long)]
    p_r: f64,
}

impl States {
    fn left(&self) -> PrimitiveState64 {
        PrimitiveState::new(self.rho_l, self.u_l, self.p_l)
    }

    fn right(&self) -> PrimitiveState64 {
        PrimitiveState::new(self.rho_r, self.u_r, self.p_r)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Upper bound on the maximum wave speed
    #[command(allow_negative_numbers = true)]
    Estimate(States),
    /// Exact solution by root finding
    #[command(allow_negative_numbers = true)]
    Oracle(States),
    /// Reference table comparison
    Bench {
        /// slow, fast, counter or all
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Randomized cross-check against the exact solver
    #[command(allow_negative_numbers = true)]
    Fuzz(FuzzArgs),
    /// 1D finite-volume shock tube using the estimate in the flux
    #[command(allow_negative_numbers = true)]
    Shocktube(ShocktubeArgs),
    /// Samples of phi and its two-rarefaction counterpart
    #[command(allow_negative_numbers = true)]
    PhiCurve(PhiCurveArgs),
    /// Wall-clock time of repeated estimates on a reference case
    Throughput {
        /// Reference case id
        #[arg(long, default_value = "fast-2-eps1e-15")]
        case: String,
        #[arg(long, default_value_t = 1_000_000)]
        reps: usize,
        /// Time the initialization-only bound instead
        #[arg(long)]
        noniterative: bool,
    },
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1.001)]
    gamma_min: f64,
    #[arg(long, default_value_t = 5.0 / 3.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.9)]
    b_rho_max: f64,
    #[arg(long, default_value_t = -6.0)]
    log_p_min: f64,
    #[arg(long, default_value_t = 4.0)]
    log_p_max: f64,
    /// Velocities are drawn from [-u_max, u_max]
    #[arg(long, default_value_t = 100.0)]
    u_max: f64,
    /// Violations printed verbatim
    #[arg(long, default_value_t = 20)]
    keep: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TubeCase {
    Sod,
    Leblanc,
    /// States from --rho-l ... --p-r, gas from --gamma and --b
    Custom,
}

#[derive(Args)]
struct ShocktubeArgs {
    #[arg(long, value_enum, default_value_t = TubeCase::Sod)]
    case: TubeCase,
    #[arg(long, default_value_t = 100)]
    cells: usize,
    /// [default: 0.25 for leblanc, else 0.5]
    #[arg(long)]
    cfl: Option<f64>,
    /// [default: 0.4 for leblanc, else 0.2]
    #[arg(long)]
    t_end: Option<f64>,
    /// Per-stage estimator overhead series
    #[arg(long)]
    overhead_csv: Option<PathBuf>,
    /// Final profile; standard output when absent
    #[arg(long)]
    profile_csv: Option<PathBuf>,
    #[arg(long)]
    rho_l: Option<f64>,
    #[arg(long)]
    u_l: Option<f64>,
    #[arg(long)]
    p_l: Option<f64>,
    #[arg(long)]
    rho_r: Option<f64>,
    #[arg(long)]
    u_r: Option<f64>,
    #[arg(long)]
    p_r: Option<f64>,
}

#[derive(Args)]
struct PhiCurveArgs {
    #[command(flatten)]
    states: States,
    #[arg(long)]
    p_lo: f64,
    #[arg(long)]
    p_hi: f64,
    #[arg(long, default_value_t = 101)]
    samples: usize,
}

enum Failure {
    /// Bad flags or inadmissible input.
    Usage(String),
    /// A check failed or a computation did not succeed.
    Check(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Check(format!("i/o error: {e}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let usage = matches!(
            e,
            Error::NonFinite { .. }
                | Error::InvalidGamma(_)
                | Error::NegativeCovolume(_)
                | Error::NegativeDensity { .. }
                | Error::NegativePressure { .. }
                | Error::PartialVacuum { .. }
                | Error::Inadmissible { .. }
                | Error::UncertifiedGamma(_)
                | Error::InvalidArgument(_)
        );
        if usage {
            Failure::Usage(e.to_string())
        } else {
            Failure::Check(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out);
    let flushed = out.flush();
    match result.and(flushed.map_err(Failure::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, out: &mut impl Write) -> Outcome {
    let s = &cli.shared;
    match &cli.command {
        Command::Estimate(states) => cmd_estimate(s, states, out),
        Command::Oracle(states) => cmd_oracle(s, states, out),
        Command::Bench { suite } => cmd_bench(s, suite, out),
        Command::Fuzz(args) => cmd_fuzz(s, args, out),
        Command::Shocktube(args) => cmd_shocktube(s, args, out),
        Command::PhiCurve(args) => cmd_phi_curve(s, args, out),
        Command::Throughput {
            case,
            reps,
            noniterative,
        } => cmd_throughput(s, case, *reps, *noniterative, out),
    }
}

fn gas(s: &Shared) -> Result<GasParams64, Failure> {
    Ok(GasParams64::new(
        s.gamma.unwrap_or(1.4),
        s.b.unwrap_or(0.0),
    )?)
}

fn estimator(s: &Shared, base: EstimatorConfig64) -> Result<EstimatorConfig64, Failure> {
    let cfg = EstimatorConfig64 {
        eps: s.eps.unwrap_or(base.eps),
        update_scheme: if s.seidel {
            UpdateScheme::Seidel
        } else {
            base.update_scheme
        },
        skip_newton_init: s.no_newton_init || base.skip_newton_init,
        ..base
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: &mut impl Write, format: Format, fields: &[(&str, String)]) -> io::Result<()> {
    match format {
        Format::Kv => {
            for (k, v) in fields {
                writeln!(out, "{k}={v}")?;
            }
        }
        Format::Csv => {
            let keys: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let values: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            writeln!(out, "{}", keys.join(","))?;
            writeln!(out, "{}", values.join(","))?;
        }
    }
    Ok(())
}

fn cmd_estimate(s: &Shared, st: &States, out: &mut impl Write) -> Outcome {
    let cfg = estimator(s, EstimatorConfig64::default())?;
    let est = estimate_lambda_max(&st.left(), &st.right(), &gas(s)?, &cfg)?;
    emit(
        out,
        s.format,
        &[
            ("lambda_max", g17(est.lambda_max_upper())),
            ("lambda_min", g17(est.lambda_min())),
            ("p1", g17(est.bracket.p1)),
            ("p2", g17(est.bracket.p2)),
            ("k", est.iterations.to_string()),
            ("termination", est.termination.name().to_string()),
        ],
    )?;
    Ok(())
}

fn cmd_oracle(s: &Shared, st: &States, out: &mut impl Write) -> Outcome {
    let (l, r, gas) = (st.left(), st.right(), gas(s)?);
    let sol = solve_exact(&l, &r, &gas)?;
    emit(
        out,
        s.format,
        &[
            ("p_star", g17(sol.p_star)),
            ("u_star", g17(sol.u_star)),
            ("lambda_1_minus", g17(sol.lambda_1_minus)),
            ("lambda_1_plus", g17(sol.lambda_1_plus)),
            ("lambda_3_minus", g17(sol.lambda_3_minus)),
            ("lambda_3_plus", g17(sol.lambda_3_plus)),
            ("rho_star_l", g17(sol.rho_star_l)),
            ("rho_star_r", g17(sol.rho_star_r)),
            ("left_wave", sol.left_wave.name().to_string()),
            ("right_wave", sol.right_wave.name().to_string()),
            ("lambda_max", g17(sol.lambda_max)),
            ("naive", g17(naive_estimate(&l, &r, &gas)?)),
        ],
    )?;
    Ok(())
}

fn cmd_bench(s: &Shared, suite: &str, out: &mut impl Write) -> Outcome {
    let suite =
        Suite::parse(suite).ok_or_else(|| Failure::Usage(format!("unknown suite {suite:?}")))?;
    let report = run_fixture_suite(suite)?;
    match s.format {
        Format::Csv => report.write_csv(&mut *out)?,
        Format::Kv => report.write_summary(&mut *out)?,
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} fixture checks failed",
            report.failures().count()
        )))
    }
}

fn cmd_fuzz(s: &Shared, a: &FuzzArgs, out: &mut impl Write) -> Outcome {
    let mut cfg = FuzzConfig {
        n: a.n,
        seed: a.seed,
        gamma_range: (a.gamma_min, a.gamma_max),
        b_rho_max: a.b_rho_max,
        log10_p_range: (a.log_p_min, a.log_p_max),
        u_range: (-a.u_max, a.u_max),
        keep_violations: a.keep,
        update_scheme: if s.seidel {
            UpdateScheme::Seidel
        } else {
            UpdateScheme::Jacobi
        },
        ..FuzzConfig::default()
    };
    if let Some(g) = s.gamma {
        cfg.gamma_range = (g, g);
    }
    if let Some(eps) = s.eps {
        cfg.eps = vec![eps];
    }
    let (g_lo, g_hi) = cfg.gamma_range;
    if cfg.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    if !(g_lo > 1.0 && g_lo <= g_hi && g_hi <= 5.0 / 3.0) {
        return Err(Failure::Usage(format!(
            "gamma range [{g_lo}, {g_hi}] must lie in (1, 5/3]"
        )));
    }
    if !(0.0..1.0).contains(&cfg.b_rho_max) {
        return Err(Failure::Usage("--b-rho-max must lie in [0, 1)".into()));
    }
    if !(a.log_p_min <= a.log_p_max && a.u_max >= 0.0 && a.u_max.is_finite()) {
        return Err(Failure::Usage("empty pressure or velocity range".into()));
    }
    if cfg.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Failure::Usage("--eps must lie in (0, 1)".into()));
    }
    let report = fuzz(&cfg);
    report.write_summary(&mut *out)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} violations (seed {}); rerun an index to reproduce",
            report.total_violations(),
            cfg.seed
        )))
    }
}

fn cmd_shocktube(s: &Shared, a: &ShocktubeArgs, out: &mut impl Write) -> Outcome {
    let case = match a.case {
        TubeCase::Sod => ShockTubeCase::Sod,
        TubeCase::Leblanc => ShockTubeCase::Leblanc,
        TubeCase::Custom => {
            let need = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| Failure::Usage(format!("--case custom needs --{name}")))
            };
            ShockTubeCase::Custom {
                left: PrimitiveState::new(
                    need(a.rho_l, "rho-l")?,
                    need(a.u_l, "u-l")?,
                    need(a.p_l, "p-l")?,
                ),
                right: PrimitiveState::new(
                    need(a.rho_r, "rho-r")?,
                    need(a.u_r, "u-r")?,
                    need(a.p_r, "p-r")?,
                ),
                gas: gas(s)?,
            }
        }
    };
    if a.case != TubeCase::Custom && (s.gamma.is_some() || s.b.is_some()) {
        return Err(Failure::Usage(
            "--gamma and --b apply to --case custom only".into(),
        ));
    }
    let mut cfg = ShockTubeConfig::new(case, a.cells);
    cfg.estimator = estimator(s, EstimatorConfig64::default())?;
    if let Some(cfl) = a.cfl {
        cfg.cfl = cfl;
    }
    if let Some(t) = a.t_end {
        cfg.t_end = t;
    }
    let run = run_shocktube(&cfg)?;
    let label = case.name();
    if let Some(path) = &a.overhead_csv {
        write_overhead_csv(BufWriter::new(File::create(path)?), &run, label)?;
    }
    match &a.profile_csv {
        Some(path) => write_profile_csv(BufWriter::new(File::create(path)?), &run, label)?,
        None => write_profile_csv(&mut *out, &run, label)?,
    }
    Ok(())
}

fn cmd_phi_curve(s: &Shared, a: &PhiCurveArgs, out: &mut impl Write) -> Outcome {
    if !(a.p_lo >= 0.0 && a.p_lo < a.p_hi && a.p_hi.is_finite()) {
        return Err(Failure::Usage(format!(
            "need 0 <= p-lo < p-hi, got [{}, {}]",
            a.p_lo, a.p_hi
        )));
    }
    if a.samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    let gas = gas(s)?;
    let (l, r) = (a.states.left(), a.states.right());
    for (st, side) in [(&l, wavebound::Side::Left), (&r, wavebound::Side::Right)] {
        if st.classify(&gas, side)? == wavebound::Phase::Vacuum {
            return Err(Failure::Usage("phi is undefined for a vacuum state".into()));
        }
    }
    let problem = RiemannProblem::new(&l, &r, &gas)?;
    writeln!(
        out,
        "# p_min={} p_max={}",
        g17(problem.p_min()),
        g17(problem.p_max())
    )?;
    writeln!(out, "p,phi,phi_R")?;
    let last = (a.samples - 1) as f64;
    for i in 0..a.samples {
        let p = if i + 1 == a.samples {
            a.p_hi
        } else {
            a.p_lo + (a.p_hi - a.p_lo) * (i as f64 / last)
        };
        writeln!(
            out,
            "{},{},{}",
            g17(p),
            g17(problem.phi(p)),
            g17(problem.phi_two_rarefaction(p))
        )?;
    }
    Ok(())
}

fn cmd_throughput(
    s: &Shared,
    id: &str,
    reps: usize,
    noniterative: bool,
    out: &mut impl Write,
) -> Outcome {
    let case = find(id).ok_or_else(|| Failure::Usage(format!("unknown case {id:?}")))?;
    if s.gamma.is_some() || s.b.is_some() {
        return Err(Failure::Usage(
            "--gamma and --b are fixed by the reference case".into(),
        ));
    }
    let (l, r) = case.states();
    let gas = case.gas();
    let t = if noniterative {
        throughput_noniterative(&l, &r, &gas, reps)?
    } else {
        throughput(&l, &r, &gas, &estimator(s, case.config())?, reps)?
    };
    emit(
        out,
        s.format,
        &[
            ("case", id.to_string()),
            ("repetitions", t.repetitions.to_string()),
            ("seconds", g17(t.seconds)),
            ("calls_per_second", g17(t.calls_per_second)),
            ("lambda_max", g17(t.lambda_max)),
            ("k", t.iterations.to_string()),
        ],
    )?;
    Ok(())
}
