//! Randomized cross-check of the estimator against the exact solver.
//!
//! Case `i` of a run with seed `s` is drawn from its own ChaCha stream
//! `(s, i)`, so any reported violation can be reproduced in isolation with
//! [`sample_case`]. Densities and pressures are log-uniform. The co-volume is
//! `b = y / max(rho_L, rho_R)` with `y` uniform, which keeps `b rho <= y`.
//!
//! A fixed fraction of cases is drawn from dedicated strata: equal states,
//! vacuum formation, the slow-shock data moving at `u = 2.2`, and
//! `gamma = 5/3` exactly.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eos::{GasParams, PrimitiveState, RiemannProblem};
use crate::error::{Error, Result};
use crate::estimator::{
    bracket_history, EstimatorConfig, PressureBracket, Termination, UpdateScheme,
};
use crate::fmt::g17;
use crate::oracle::{check_admissibility, gap_lower_bound, solve_exact, ExactSolution, WaveKind};

/// Relative slack allowed for rounding in the inequality checks.
const ROUND: f64 = 1e-13;
const STRATA: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzConfig {
    pub n: usize,
    pub seed: u64,
    pub gamma_range: (f64, f64),
    /// Upper end of the sampled `b max(rho_L, rho_R)`.
    pub b_rho_max: f64,
    pub log10_rho_range: (f64, f64),
    pub log10_p_range: (f64, f64),
    pub u_range: (f64, f64),
    /// Tolerances each case is estimated with.
    pub eps: Vec<f64>,
    pub update_scheme: UpdateScheme,
    /// Violations kept verbatim in the report.
    pub keep_violations: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            n: 100_000,
            seed: 42,
            gamma_range: (1.001, 5.0 / 3.0),
            b_rho_max: 0.9,
            log10_rho_range: (-3.0, 3.0),
            log10_p_range: (-6.0, 4.0),
            u_range: (-100.0, 100.0),
            eps: vec![1e-2, 1e-6, 1e-12],
            update_scheme: UpdateScheme::Jacobi,
            keep_violations: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stratum {
    Random,
    EqualStates,
    VacuumFormation,
    MovingSlowShock,
    MaxGamma,
}

impl Stratum {
    pub fn name(self) -> &'static str {
        match self {
            Stratum::Random => "random",
            Stratum::EqualStates => "equal_states",
            Stratum::VacuumFormation => "vacuum_formation",
            Stratum::MovingSlowShock => "u_2.2",
            Stratum::MaxGamma => "gamma_5/3",
        }
    }

    fn of(index: usize) -> Self {
        match index % STRATA {
            0 => Stratum::EqualStates,
            1 => Stratum::VacuumFormation,
            2 => Stratum::MovingSlowShock,
            3 => Stratum::MaxGamma,
            _ => Stratum::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzCase {
    pub index: usize,
    pub stratum: Stratum,
    pub left: PrimitiveState<f64>,
    pub right: PrimitiveState<f64>,
    pub gas: GasParams<f64>,
}

/// Named checks, in report order.
pub const CHECKS: &[&str] = &[
    "upper_bound",
    "accuracy",
    "nesting",
    "phi_above_phi_r",
    "shock_above_rarefaction",
    "p_star_below_p_tilde",
    "gap",
    "admissibility",
    "wave_order",
    "oracle_residual",
    "equal_states_k0",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub seed: u64,
    pub index: usize,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzReport {
    pub seed: u64,
    pub n: usize,
    pub violations: BTreeMap<&'static str, usize>,
    /// Smallest normalized margin seen per check; negative means violated.
    pub worst_margin: BTreeMap<&'static str, f64>,
    pub kept: Vec<Violation>,
    pub terminations: BTreeMap<Termination, usize>,
    /// Iteration counts at the tightest tolerance.
    pub iterations: BTreeMap<usize, usize>,
    /// Iteration counts observed in the `u = 2.2` stratum.
    pub moving_slow_shock_k: BTreeMap<usize, usize>,
    /// Wave patterns `(left, right)` of the exact solutions.
    pub patterns: BTreeMap<(&'static str, &'static str), usize>,
    pub strata: BTreeMap<Stratum, usize>,
    /// Cases whose star pressure is below the smallest positive float. Only
    /// the upper-bound check runs for these, against the speed at that float.
    pub underflow: usize,
}

impl FuzzReport {
    fn new(cfg: &FuzzConfig) -> Self {
        Self {
            seed: cfg.seed,
            n: cfg.n,
            violations: CHECKS.iter().map(|c| (*c, 0)).collect(),
            worst_margin: BTreeMap::new(),
            kept: Vec::new(),
            terminations: BTreeMap::new(),
            iterations: BTreeMap::new(),
            moving_slow_shock_k: BTreeMap::new(),
            patterns: BTreeMap::new(),
            strata: BTreeMap::new(),
            underflow: 0,
        }
    }

    pub fn total_violations(&self) -> usize {
        self.violations.values().sum()
    }

    pub fn passed(&self) -> bool {
        self.total_violations() == 0
    }

    pub fn count(&self, check: &str) -> usize {
        self.violations.get(check).copied().unwrap_or(0)
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# fuzz seed={} n={}", self.seed, self.n)?;
        writeln!(w, "check,violations,worst_margin")?;
        for c in CHECKS {
            let m = self
                .worst_margin
                .get(c)
                .map(|m| g17(*m))
                .unwrap_or_else(|| "-".into());
            writeln!(w, "{c},{},{m}", self.count(c))?;
        }
        for (t, n) in &self.terminations {
            writeln!(w, "# termination {t}: {n}")?;
        }
        for (k, n) in &self.iterations {
            writeln!(w, "# iterations {k}: {n}")?;
        }
        for (k, n) in &self.moving_slow_shock_k {
            writeln!(w, "# u=2.2 stratum k={k}: {n}")?;
        }
        for ((l, r), n) in &self.patterns {
            writeln!(w, "# pattern {l}-{r}: {n}")?;
        }
        writeln!(w, "# star pressure underflow: {}", self.underflow)?;
        for v in &self.kept {
            writeln!(
                w,
                "# violation seed={} index={} {}: {}",
                v.seed, v.index, v.check, v.detail
            )?;
        }
        writeln!(w, "# total violations: {}", self.total_violations())
    }

    fn margin(&mut self, check: &'static str, m: f64) {
        let e = self.worst_margin.entry(check).or_insert(f64::INFINITY);
        if m < *e {
            *e = m;
        }
    }

    fn fail(&mut self, keep: usize, index: usize, check: &'static str, detail: String) {
        *self.violations.entry(check).or_insert(0) += 1;
        if self.kept.len() < keep {
            self.kept.push(Violation {
                seed: self.seed,
                index,
                check,
                detail,
            });
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    10f64.powf(rng.gen_range(lo..=hi))
}

/// Deterministic case `index` of the run with `cfg.seed`.
pub fn sample_case(cfg: &FuzzConfig, index: usize) -> FuzzCase {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let stratum = Stratum::of(index);

    let mut gamma = rng.gen_range(cfg.gamma_range.0..=cfg.gamma_range.1);
    if stratum == Stratum::MaxGamma {
        gamma = 5.0 / 3.0;
    }
    let state = |rng: &mut ChaCha8Rng| {
        PrimitiveState::new(
            log_uniform(rng, cfg.log10_rho_range),
            rng.gen_range(cfg.u_range.0..=cfg.u_range.1),
            log_uniform(rng, cfg.log10_p_range),
        )
    };
    let (mut left, mut right) = (state(&mut rng), state(&mut rng));
    let y = rng.gen_range(0.0..=cfg.b_rho_max);
    let mut gas = GasParams {
        gamma,
        b: y / left.rho.max(right.rho),
    };

    match stratum {
        Stratum::EqualStates => right = left,
        Stratum::VacuumFormation => {
            // Push the states apart until a vacuum must open in between.
            let front = |s: &PrimitiveState<f64>| {
                let cv = 1.0 - gas.b * s.rho;
                2.0 * (gamma * s.p * cv / s.rho).sqrt() / (gamma - 1.0)
            };
            let gap = (front(&left) + front(&right)) * rng.gen_range(1.0..4.0);
            let mid = 0.5 * (left.u + right.u);
            left.u = mid - 0.5 * gap;
            right.u = mid + 0.5 * gap;
        }
        Stratum::MovingSlowShock => {
            left = PrimitiveState::new(1.0, 2.2, 0.01);
            right = PrimitiveState::new(1.0, 2.2, 100.0);
            gas = GasParams { gamma: 1.4, b: 0.0 };
        }
        Stratum::Random | Stratum::MaxGamma => {}
    }
    FuzzCase {
        index,
        stratum,
        left,
        right,
        gas,
    }
}

struct Scales {
    /// Velocity scale for rounding in speed comparisons.
    speed: f64,
}

fn check_case(cfg: &FuzzConfig, case: &FuzzCase, report: &mut FuzzReport) -> Result<()> {
    let (l, r, gas) = (&case.left, &case.right, &case.gas);
    let keep = cfg.keep_violations;
    let i = case.index;
    let problem = RiemannProblem::new(l, r, gas)?;
    let (a_l, a_r) = (
        problem.left.coeffs.sound_speed,
        problem.right.coeffs.sound_speed,
    );
    *report.strata.entry(case.stratum).or_insert(0) += 1;
    let sol = match solve_exact(l, r, gas) {
        Ok(sol) => Some(sol),
        Err(Error::StarPressureUnderflow { .. }) => {
            report.underflow += 1;
            None
        }
        Err(e) => return Err(e),
    };
    // Without a representable p*, the speeds at the float just above it
    // still bound the exact maximum speed from above.
    let exact = match &sol {
        Some(sol) => sol.lambda_max,
        None => {
            let upper = f64::MIN_POSITIVE;
            let left = l.u - problem.left.speed_magnitude(upper);
            let right = r.u + problem.right.speed_magnitude(upper);
            (-left).max(right).max(0.0)
        }
    };
    let sc = Scales {
        speed: exact + l.u.abs() + r.u.abs() + a_l + a_r,
    };

    if let Some(sol) = &sol {
        *report
            .patterns
            .entry((sol.left_wave.name(), sol.right_wave.name()))
            .or_insert(0) += 1;
        oracle_checks(cfg, case, &problem, sol, &sc, report);
    }

    for (j, &eps) in cfg.eps.iter().enumerate() {
        let est_cfg = EstimatorConfig {
            eps,
            update_scheme: cfg.update_scheme,
            ..EstimatorConfig::default()
        };
        let (history, est) = bracket_history(l, r, gas, &est_cfg)?;
        let upper = est.lambda_max_upper();

        let m = (upper - exact) / sc.speed;
        report.margin("upper_bound", m / ROUND + 1.0);
        if upper < exact - ROUND * sc.speed {
            report.fail(
                keep,
                i,
                "upper_bound",
                format!("eps={eps} bound {upper} < exact {exact}"),
            );
        }

        if est.termination.is_accurate() && sol.is_some() {
            let slack = eps * exact + 1e-12 - (upper - exact).abs();
            report.margin("accuracy", slack / (eps * exact + 1e-12));
            if slack < 0.0 {
                report.fail(
                    keep,
                    i,
                    "accuracy",
                    format!(
                        "eps={eps} bound {upper} exact {exact} ({:?})",
                        est.termination
                    ),
                );
            }
        }

        if let Some(sol) = &sol {
            if let Some(detail) = nesting_problem(&problem, &history, sol.p_star, est.termination) {
                report.fail(keep, i, "nesting", format!("eps={eps} {detail}"));
            }
        }

        if j + 1 == cfg.eps.len() {
            *report.terminations.entry(est.termination).or_insert(0) += 1;
            *report.iterations.entry(est.iterations).or_insert(0) += 1;
            if case.stratum == Stratum::MovingSlowShock {
                *report
                    .moving_slow_shock_k
                    .entry(est.iterations)
                    .or_insert(0) += 1;
            }
            if case.stratum == Stratum::EqualStates && est.iterations != 0 {
                report.fail(keep, i, "equal_states_k0", format!("k={}", est.iterations));
            }
        }
    }
    Ok(())
}

fn nesting_problem(
    problem: &RiemannProblem<f64>,
    history: &[PressureBracket<f64>],
    p_star: f64,
    termination: Termination,
) -> Option<String> {
    // The root is only defined to within the rounding of phi over its slope.
    let slope = problem.phi_prime(p_star);
    let mut tol = 8.0 * f64::EPSILON * p_star;
    if slope.is_finite() && slope > 0.0 {
        tol += problem.phi_rounding(p_star) / slope;
    }
    for (k, b) in history.iter().enumerate() {
        if !(b.p1 <= b.p2) {
            return Some(format!("bracket {k} inverted [{}, {}]", b.p1, b.p2));
        }
        if k > 0 && !b.nested_in(&history[k - 1]) {
            return Some(format!(
                "bracket {k} [{}, {}] escapes its predecessor",
                b.p1, b.p2
            ));
        }
        // Exact short-circuits report a bracket that need not enclose p*
        // beyond rounding; all others must.
        let enclosed = b.p1 <= p_star + tol && p_star <= b.p2 + tol;
        if !enclosed && termination != Termination::ExactRootHit {
            return Some(format!(
                "bracket {k} [{}, {}] misses p* = {p_star}",
                b.p1, b.p2
            ));
        }
    }
    None
}

fn oracle_checks(
    cfg: &FuzzConfig,
    case: &FuzzCase,
    problem: &RiemannProblem<f64>,
    sol: &ExactSolution<f64>,
    sc: &Scales,
    report: &mut FuzzReport,
) {
    let (keep, i) = (cfg.keep_violations, case.index);
    let (l, r) = (&problem.left, &problem.right);
    let (a_l, a_r) = (l.coeffs.sound_speed, r.coeffs.sound_speed);
    let p_min = problem.p_min();
    let p_max = problem.p_max();
    let p_star = sol.p_star;

    // phi(p*) = 0 up to rounding of the velocity jump.
    if p_star > 0.0 {
        let scale = a_l + a_r + case.left.u.abs() + case.right.u.abs();
        let res = problem.phi(p_star).abs();
        report.margin("oracle_residual", 1.0 - res / (ROUND * scale));
        if res > ROUND * scale {
            report.fail(keep, i, "oracle_residual", format!("|phi(p*)| = {res}"));
        }
    }

    // phi_R = phi up to p_min, phi_R < phi beyond.
    let mut probes = vec![0.0, 0.25 * p_min, 0.5 * p_min, p_min];
    for t in [1.0 + 1e-6, 1.5, 3.0, 10.0] {
        probes.push(p_min * t);
    }
    for t in [0.5, 1.0, 2.0, 100.0] {
        probes.push(p_min + t * (p_max - p_min).max(p_min));
    }
    probes.push(p_star);
    let du = (case.right.u - case.left.u).abs();
    for p in probes {
        let (f, fr) = (problem.phi(p), problem.phi_two_rarefaction(p));
        let scale = l.f_magnitude(p)
            + r.f_magnitude(p)
            + l.rarefaction_magnitude(p)
            + r.rarefaction_magnitude(p)
            + du;
        let diff = f - fr;
        let bad = if p <= p_min {
            diff.abs() > ROUND * scale
        } else {
            report.margin("phi_above_phi_r", diff / (ROUND * scale) + 1.0);
            diff < -ROUND * scale
        };
        if bad {
            report.fail(keep, i, "phi_above_phi_r", format!("p={p} phi={f} phi_R={fr}"));
        }
    }

    // Shock branch above rarefaction branch beyond each side pressure.
    for curve in [l, r] {
        let pz = curve.state.p;
        if pz <= 0.0 {
            continue;
        }
        for t in [1.01, 1.5, 2.0, 50.0, 1e4] {
            let p = pz * t;
            let (fs, fr) = (curve.f_shock(p), curve.f_rarefaction(p));
            let tol = ROUND * (curve.shock_magnitude(p) + curve.rarefaction_magnitude(p));
            let diff = fs - fr;
            report.margin("shock_above_rarefaction", diff / tol + 1.0);
            if diff < -tol {
                report.fail(keep, i, "shock_above_rarefaction", format!("p={p} f_S={fs} f_R={fr}"));
            }
        }
    }

    // p* below the two-rarefaction pressure.
    if p_star > p_min {
        match problem.p_tilde_star() {
            Ok(pt) => {
                report.margin("p_star_below_p_tilde", (pt - p_star) / (ROUND * pt) + 1.0);
                if !(p_star <= pt * (1.0 + ROUND)) {
                    report.fail(keep, i, "p_star_below_p_tilde", format!("p*={p_star} p~*={pt}"));
                }
            }
            Err(e) => report.fail(keep, i, "p_star_below_p_tilde", format!("p~* unavailable: {e}")),
        }
    }

    let spread = sol.lambda_3_plus - sol.lambda_1_minus;
    let need = gap_lower_bound(case.gas.gamma) * (a_l + a_r);
    report.margin("gap", (spread - need) / (ROUND * sc.speed) + 1.0);
    if spread < need - ROUND * sc.speed {
        report.fail(keep, i, "gap", format!("spread {spread} < {need}"));
    }

    let adm = check_admissibility(sol, &case.left, &case.right, &case.gas, 32);
    report.margin("admissibility", adm.worst_margin);
    if !adm.pass {
        report.fail(keep, i, "admissibility", format!("{adm:?}"));
    }

    if !sol.waves_ordered(ROUND) {
        report.fail(keep, i, "wave_order", format!("{sol:?}"));
    }
    if sol.left_wave == WaveKind::Shock && sol.lambda_1_plus != sol.lambda_1_minus {
        report.fail(keep, i, "wave_order", "left shock with a fan".into());
    }
}

pub fn fuzz(cfg: &FuzzConfig) -> FuzzReport {
    let mut report = FuzzReport::new(cfg);
    for index in 0..cfg.n {
        let case = sample_case(cfg, index);
        if let Err(e) = check_case(cfg, &case, &mut report) {
            report.fail(cfg.keep_violations, index, "error", e.to_string());
        }
    }
    report
}
