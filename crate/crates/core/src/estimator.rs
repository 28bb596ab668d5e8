//! Certified upper bound on the maximum wave speed.
//!
//! The star pressure `p*` is enclosed in a bracket `[p1, p2]` whose endpoints
//! are pushed together by the roots of two quadratic interpolants of `phi`
//! (one Hermite at `p1`, one Hermite at `p2`). Because `phi` is increasing,
//! concave and has a non-negative third derivative, the interpolant roots
//! stay on their side of `p*`, so every iterate yields guaranteed enclosures
//!
//! ```text
//! v11 <= lambda_1^- <= v12        v31 <= lambda_3^+ <= v32
//! ```
//!
//! and hence `lambda_min <= lambda_max <= lambda_max_upper`. The iteration
//! stops as soon as the ratio of the two bounds is within `1 + eps`; in
//! practice three steps reach `1e-15`.
//!
//! Initialization uses the two-rarefaction pressure as upper endpoint. It is
//! a certified upper bound only for `gamma <= 5/3`; above that the endpoint
//! is checked and, when needed, expanded geometrically.

use crate::eos::{GasParams, Phase, PrimitiveState, RiemannProblem, Side};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Enclosure `p1 <= p* <= p2` after `k` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureBracket<T> {
    pub p1: T,
    pub p2: T,
    pub k: usize,
}

impl<T: Real> PressureBracket<T> {
    pub fn new(p1: T, p2: T, k: usize) -> Self {
        Self { p1, p2, k }
    }

    pub fn width(&self) -> T {
        self.p2 - self.p1
    }

    /// `self` lies inside `outer`.
    pub fn nested_in(&self, outer: &Self) -> bool {
        outer.p1 <= self.p1 && self.p1 <= self.p2 && self.p2 <= outer.p2
    }
}

/// Bounds on the extreme wave speeds derived from a pressure bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBounds<T> {
    /// Lower bound on `lambda_1^-` (uses `p2`).
    pub v11: T,
    /// Upper bound on `lambda_1^-` (uses `p1`).
    pub v12: T,
    /// Lower bound on `lambda_3^+` (uses `p1`).
    pub v31: T,
    /// Upper bound on `lambda_3^+` (uses `p2`).
    pub v32: T,
    /// `(max((v31)_+, (v12)_-))_+`
    pub lambda_min: T,
    /// `max((v32)_+, (v11)_-)`
    pub lambda_max: T,
}

impl<T: Real> SpeedBounds<T> {
    pub fn from_extremes(v11: T, v12: T, v31: T, v32: T) -> Self {
        Self {
            v11,
            v12,
            v31,
            v32,
            lambda_min: v31.pos().max(v12.neg_part()).pos(),
            lambda_max: v32.pos().max(v11.neg_part()),
        }
    }

    fn exact(lambda_1: T, lambda_3: T) -> Self {
        Self::from_extremes(lambda_1, lambda_1, lambda_3, lambda_3)
    }
}

/// How an estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Termination {
    /// `phi(p_min) >= 0`: both extreme waves are rarefactions and the speeds
    /// are exact without locating `p*`.
    TwoRarefactionFastPath,
    /// `phi(p_max) = 0` exactly.
    ExactRootHit,
    /// The initial bracket already met the tolerance.
    InitAccurate,
    /// Tolerance met after at least one update.
    Converged,
    /// A sign check on `phi` at a bracket endpoint failed; that endpoint is
    /// `p*` up to rounding.
    RoundoffExit,
    /// Iteration budget exhausted; bounds remain guaranteed, accuracy is not.
    IterationCap,
    /// One of the input states is vacuum.
    VacuumData,
    /// `phi(0) >= 0`: a vacuum opens between two rarefactions, `p* = 0`.
    VacuumFormation,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::TwoRarefactionFastPath => "TwoRarefactionFastPath",
            Termination::ExactRootHit => "ExactRootHit",
            Termination::InitAccurate => "InitAccurate",
            Termination::Converged => "Converged",
            Termination::RoundoffExit => "RoundoffExit",
            Termination::IterationCap => "IterationCap",
            Termination::VacuumData => "VacuumData",
            Termination::VacuumFormation => "VacuumFormation",
        }
    }

    /// Whether the estimate carries the requested relative accuracy.
    pub fn is_accurate(self) -> bool {
        !matches!(self, Termination::IterationCap)
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate<T> {
    pub bounds: SpeedBounds<T>,
    /// Final bracket. Exact paths report a degenerate or trivially valid one.
    pub bracket: PressureBracket<T>,
    /// Number of bracket updates performed.
    pub iterations: usize,
    pub termination: Termination,
    /// The two-rarefaction pressure was not usable as a certified upper
    /// endpoint (`gamma > 5/3` or both side pressures zero) and the bracket
    /// was obtained by doubling instead.
    pub expanded_bracket: bool,
}

impl<T: Real> SpeedEstimate<T> {
    /// Guaranteed upper bound on the maximum wave speed.
    pub fn lambda_max_upper(&self) -> T {
        self.bounds.lambda_max
    }

    /// Guaranteed lower bound on the maximum wave speed (may be 0).
    pub fn lambda_min(&self) -> T {
        self.bounds.lambda_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateScheme {
    /// Both endpoints updated from the previous bracket.
    Jacobi,
    /// The upper endpoint uses the freshly updated lower endpoint.
    Seidel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig<T> {
    /// Relative tolerance on the maximum wave speed.
    pub eps: T,
    pub iteration_cap: usize,
    pub update_scheme: UpdateScheme,
    /// Skip the Newton refinement of the initial lower endpoint.
    pub skip_newton_init: bool,
    /// Reject `gamma > 5/3` instead of falling back to bracket expansion.
    pub require_guaranteed_gamma: bool,
}

impl<T: Real> Default for EstimatorConfig<T> {
    fn default() -> Self {
        Self {
            eps: T::lit(1e-10),
            iteration_cap: 64,
            update_scheme: UpdateScheme::Jacobi,
            skip_newton_init: false,
            require_guaranteed_gamma: false,
        }
    }
}

impl<T: Real> EstimatorConfig<T> {
    pub fn with_eps(eps: T) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.iteration_cap == 0 {
            return Err(Error::InvalidArgument(
                "iteration_cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Stopping rule of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// `lambda_max / lambda_min - 1 <= eps`.
    MaxSpeed,
    /// `(v12 - v11) / lambda_min <= eps` and `(v32 - v31) / lambda_min <= eps`.
    ExtremeSpeeds,
}

impl StopRule {
    fn satisfied<T: Real>(self, b: &SpeedBounds<T>, eps: T) -> bool {
        if b.lambda_min <= T::zero() {
            return false;
        }
        match self {
            StopRule::MaxSpeed => b.lambda_max / b.lambda_min - T::one() <= eps,
            StopRule::ExtremeSpeeds => {
                (b.v12 - b.v11) / b.lambda_min <= eps && (b.v32 - b.v31) / b.lambda_min <= eps
            }
        }
    }
}

/// Result of the initialization stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init<T> {
    /// Exact speeds or an initial bracket that already meets the tolerance.
    ShortCircuit(SpeedEstimate<T>),
    /// Iteration is required, starting from this bracket; the estimate holds
    /// the bounds of the initial bracket.
    Bracket(PressureBracket<T>, SpeedEstimate<T>),
}

impl<T: Real> Init<T> {
    pub fn estimate(&self) -> &SpeedEstimate<T> {
        match self {
            Init::ShortCircuit(e) | Init::Bracket(_, e) => e,
        }
    }
}

/// Exact speeds when exactly one side is vacuum. Both sides vacuum yields a
/// zero estimate.
///
/// `vacuum_side` names the side that is vacuum; `state` is the other one.
pub fn vacuum_side_speeds<T: Real>(
    state: &PrimitiveState<T>,
    vacuum_side: Side,
    gas: &GasParams<T>,
) -> Result<SpeedEstimate<T>> {
    let bounds = match state.classify(gas, opposite(vacuum_side))? {
        Phase::Vacuum => SpeedBounds::exact(T::zero(), T::zero()),
        Phase::NonVacuum => {
            let covol = state.covolume_factor(gas);
            let a = (gas.gamma * state.p / (state.rho * covol)).sqrt();
            let front = T::lit(2.0) * a * covol / (gas.gamma - T::one());
            match vacuum_side {
                Side::Right => SpeedBounds::exact(state.u - a, state.u + front),
                Side::Left => SpeedBounds::exact(state.u - front, state.u + a),
            }
        }
    };
    Ok(SpeedEstimate {
        bounds,
        bracket: PressureBracket::new(T::zero(), T::zero(), 0),
        iterations: 0,
        termination: Termination::VacuumData,
        expanded_bracket: false,
    })
}

fn opposite(side: Side) -> Side {
    match side {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    }
}

/// Speed bounds from a bracket assumed to enclose `p*`.
pub fn lambda_bounds<T: Real>(
    bracket: &PressureBracket<T>,
    problem: &RiemannProblem<T>,
) -> SpeedBounds<T> {
    let (l, r) = (&problem.left, &problem.right);
    let (ul, ur) = (l.state.u, r.state.u);
    SpeedBounds::from_extremes(
        ul - l.speed_magnitude(bracket.p2),
        ul - l.speed_magnitude(bracket.p1),
        ur + r.speed_magnitude(bracket.p1),
        ur + r.speed_magnitude(bracket.p2),
    )
}

fn exact_estimate<T: Real>(
    problem: &RiemannProblem<T>,
    p1: T,
    p2: T,
    termination: Termination,
) -> SpeedEstimate<T> {
    let bracket = PressureBracket::new(p1, p2, 0);
    SpeedEstimate {
        bounds: lambda_bounds(&bracket, problem),
        bracket,
        iterations: 0,
        termination,
        expanded_bracket: false,
    }
}

/// Doubles `p` until `phi(p) >= 0`; returns the certified upper endpoint and
/// the largest pressure seen with `phi < 0` (a lower endpoint).
fn expand_upper<T: Real>(problem: &RiemannProblem<T>, start: T, lower: T) -> Result<(T, T)> {
    const MAX_DOUBLINGS: usize = 200;
    let mut p = start;
    if !(p.is_finite() && p > T::zero()) {
        let (l, r) = (&problem.left.state, &problem.right.state);
        let du = l.u - r.u;
        p = problem.p_max().max(l.rho.max(r.rho) * du * du);
        if !(p.is_finite() && p > T::zero()) {
            p = T::one();
        }
    }
    let mut lower = lower;
    for _ in 0..MAX_DOUBLINGS {
        if problem.phi(p) >= T::zero() {
            return Ok((p, lower));
        }
        lower = lower.max(p);
        p = p + p;
    }
    Err(Error::BracketExpansion(MAX_DOUBLINGS))
}

fn initialize_with<T: Real>(
    problem: &RiemannProblem<T>,
    cfg: &EstimatorConfig<T>,
    rule: StopRule,
) -> Result<Init<T>> {
    let zero = T::zero();
    let p_min = problem.p_min();
    let p_max = problem.p_max();

    if problem.phi(p_min) >= zero {
        // p* <= p_min: the speeds do not depend on p* at all.
        let est = if problem.forms_vacuum() {
            exact_estimate(problem, zero, zero, Termination::VacuumFormation)
        } else {
            exact_estimate(problem, zero, p_min, Termination::TwoRarefactionFastPath)
        };
        return Ok(Init::ShortCircuit(est));
    }

    let phi_max = problem.phi(p_max);
    if phi_max == zero {
        return Ok(Init::ShortCircuit(exact_estimate(
            problem,
            p_max,
            p_max,
            Termination::ExactRootHit,
        )));
    }

    let guaranteed = problem.gas.is_guaranteed();
    if !guaranteed && cfg.require_guaranteed_gamma {
        return Err(Error::UncertifiedGamma(problem.gas.gamma.as_f64()));
    }
    let p_tilde = problem.p_tilde_star()?;
    let certified = guaranteed && p_tilde.is_finite();

    let mut expanded = false;
    let (mut p1, mut p2, phi_p2) = if phi_max < zero {
        if certified {
            (p_max, p_tilde, None)
        } else {
            expanded = true;
            let (hi, lo) = expand_upper(problem, p_tilde, p_max)?;
            (lo, hi, None)
        }
    } else if p_tilde < p_max {
        if certified {
            (p_min, p_tilde, None)
        } else {
            // Uncertified candidate: keep it only if phi confirms it.
            let f = problem.phi(p_tilde);
            if f >= zero {
                (p_min, p_tilde, Some(f))
            } else {
                (p_tilde.max(p_min), p_max, Some(phi_max))
            }
        }
    } else {
        (p_min, p_max, Some(phi_max))
    };

    if !cfg.skip_newton_init {
        // The tangent of a concave increasing function lies above it, so
        // its root from the right is a lower bound on p*.
        let f2 = phi_p2.unwrap_or_else(|| problem.phi(p2));
        let d2 = problem.phi_prime(p2);
        if d2.is_finite() && d2 > zero {
            let newton = p2 - f2 / d2;
            if newton > p1 && newton < p2 {
                // Rounding in the step itself can land past p*; the sign
                // of phi decides which end it improves.
                if problem.phi(newton) <= problem.phi_rounding(newton) {
                    p1 = newton;
                } else {
                    p2 = newton;
                }
            }
        }
    }

    let bracket = PressureBracket::new(p1, p2, 0);
    let bounds = lambda_bounds(&bracket, problem);
    let mut est = SpeedEstimate {
        bounds,
        bracket,
        iterations: 0,
        termination: Termination::InitAccurate,
        expanded_bracket: expanded,
    };
    if rule.satisfied(&bounds, cfg.eps) {
        Ok(Init::ShortCircuit(est))
    } else {
        est.termination = Termination::Converged;
        Ok(Init::Bracket(bracket, est))
    }
}

/// Builds the initial bracket, short-circuiting when the speeds are already
/// known exactly or to within `cfg.eps`.
///
/// The Newton refinement of `p1` (unless `cfg.skip_newton_init`) is applied
/// before the accuracy test, so a short-circuited estimate reports the
/// refined bracket.
pub fn initialize<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<Init<T>> {
    cfg.validate()?;
    let problem = RiemannProblem::new(left, right, gas)?;
    initialize_with(&problem, cfg, StopRule::MaxSpeed)
}

/// `phi` and `phi'` at both endpoints of a bracket.
#[derive(Debug, Clone, Copy)]
struct Samples<T> {
    f1: T,
    d1: T,
    f2: T,
    d2: T,
}

/// Root of the quadratic matching `phi`, `phi'` at `p1` and `phi` at `p2`.
fn lower_root<T: Real>(p1: T, p2: T, s: &Samples<T>) -> T {
    if p2 <= p1 || s.f1 == T::zero() {
        return p1;
    }
    let h = p2 - p1;
    let slope = (s.f2 - s.f1) / h;
    let curv = (slope - s.d1) / h;
    let disc = (s.d1 * s.d1 - T::lit(4.0) * s.f1 * curv).max(T::zero());
    p1 - T::lit(2.0) * s.f1 / (s.d1 + disc.sqrt())
}

/// Root of the quadratic matching `phi` at `p1` and `phi`, `phi'` at `p2`.
fn upper_root<T: Real>(p1: T, p2: T, s: &Samples<T>) -> T {
    if p2 <= p1 || s.f2 == T::zero() {
        return p2;
    }
    let h = p2 - p1;
    let slope = (s.f2 - s.f1) / h;
    let curv = (s.d2 - slope) / h;
    let disc = (s.d2 * s.d2 - T::lit(4.0) * s.f2 * curv).max(T::zero());
    p2 - T::lit(2.0) * s.f2 / (s.d2 + disc.sqrt())
}

/// Lower-endpoint update. Falls back to a Newton step from `p2` when
/// `phi'(p1)` is unbounded (a side pressure of zero sitting at `p1`).
fn lower_update<T: Real>(p1: T, p2: T, s: &Samples<T>) -> T {
    if s.d1.is_finite() {
        lower_root(p1, p2, s)
    } else if s.d2.is_finite() && s.d2 > T::zero() {
        p1.max(p2 - s.f2 / s.d2)
    } else {
        p1
    }
}

fn sample<T: Real>(problem: &RiemannProblem<T>, p1: T, p2: T) -> Samples<T> {
    Samples {
        f1: problem.phi(p1),
        d1: problem.phi_prime(p1),
        f2: problem.phi(p2),
        d2: problem.phi_prime(p2),
    }
}

/// `p_d(p1, p2)`: root of the quadratic interpolating `phi` at
/// `p1, p1, p2`. Requires `phi(p1) <= 0 <= phi(p2)`; the result lies in
/// `[p1, p*]`.
pub fn quad_root_lower<T: Real>(bracket: &PressureBracket<T>, problem: &RiemannProblem<T>) -> T {
    let s = sample(problem, bracket.p1, bracket.p2);
    lower_update(bracket.p1, bracket.p2, &s)
}

/// `p_u(p1, p2)`: root of the quadratic interpolating `phi` at
/// `p1, p2, p2`. Requires `phi(p1) <= 0 <= phi(p2)`; the result lies in
/// `[p*, p2]`.
pub fn quad_root_upper<T: Real>(bracket: &PressureBracket<T>, problem: &RiemannProblem<T>) -> T {
    let s = sample(problem, bracket.p1, bracket.p2);
    upper_root(bracket.p1, bracket.p2, &s)
}

fn iterate<T, F>(
    problem: &RiemannProblem<T>,
    start: PressureBracket<T>,
    start_est: SpeedEstimate<T>,
    cfg: &EstimatorConfig<T>,
    rule: StopRule,
    observe: &mut F,
) -> SpeedEstimate<T>
where
    T: Real,
    F: FnMut(&PressureBracket<T>),
{
    let zero = T::zero();
    let mut bracket = start;
    let mut bounds = start_est.bounds;
    let finish = |bracket: PressureBracket<T>, bounds: SpeedBounds<T>, termination| SpeedEstimate {
        bounds,
        bracket,
        iterations: bracket.k,
        termination,
        expanded_bracket: start_est.expanded_bracket,
    };
    let mut s = sample(problem, bracket.p1, bracket.p2);
    loop {
        if bracket.k > 0 {
            bounds = lambda_bounds(&bracket, problem);
            if rule.satisfied(&bounds, cfg.eps) {
                return finish(bracket, bounds, Termination::Converged);
            }
        }
        if bracket.k >= cfg.iteration_cap {
            return finish(bracket, bounds, Termination::IterationCap);
        }
        if s.f1 > zero || s.f2 < zero {
            // An endpoint on the wrong side of p* got there by rounding and
            // is p* to working precision.
            let p = if s.f1 > zero { bracket.p1 } else { bracket.p2 };
            let b = PressureBracket::new(p, p, bracket.k);
            return finish(b, lambda_bounds(&b, problem), Termination::RoundoffExit);
        }
        let (p1, p2) = (bracket.p1, bracket.p2);

        let n1 = lower_update(p1, p2, &s);
        let f_n1 = problem.phi(n1);
        let n2 = match cfg.update_scheme {
            UpdateScheme::Jacobi => upper_root(p1, p2, &s),
            UpdateScheme::Seidel if n1 > p1 && n1 < p2 && f_n1 <= zero => {
                let s2 = Samples { f1: f_n1, ..s };
                upper_root(n1, p2, &s2)
            }
            UpdateScheme::Seidel => upper_root(p1, p2, &s),
        };
        let f_n2 = problem.phi(n2);

        // The interpolation roots keep their nominal side unless phi
        // contradicts it by more than rounding; that happens when
        // cancellation spoils a root (for instance against a huge
        // two-rarefaction pressure), and the sign of phi then decides.
        let mut next = Sided::new(p1, s.f1, p2, s.f2);
        next.offer(n1, f_n1, Some(Nominal::Lower), problem.phi_rounding(n1));
        next.offer(n2, f_n2, Some(Nominal::Upper), problem.phi_rounding(n2));
        if next.lo == p1 && s.d1.is_finite() && s.d1 > zero {
            // Newton from the left: a lower bound for concave phi.
            let newton = p1 - s.f1 / s.d1;
            next.offer(newton, problem.phi(newton), None, zero);
        }
        if next.hi == p2 && s.f2 > s.f1 {
            // Chord root: an upper bound for concave phi.
            let chord = p1 - s.f1 * ((p2 - p1) / (s.f2 - s.f1));
            next.offer(chord, problem.phi(chord), None, zero);
        }
        if next.lo == p1 && next.hi == p2 {
            return finish(bracket, bounds, Termination::RoundoffExit);
        }
        if next.lo > next.hi {
            next.lo = next.hi;
            next.f_lo = next.f_hi;
        }
        bracket = PressureBracket::new(next.lo, next.hi, bracket.k + 1);
        observe(&bracket);
        s = Samples {
            f1: next.f_lo,
            d1: problem.phi_prime(next.lo),
            f2: next.f_hi,
            d2: problem.phi_prime(next.hi),
        };
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Nominal {
    Lower,
    Upper,
}

/// Bracket under construction with the values of `phi` at its ends.
struct Sided<T> {
    lo: T,
    f_lo: T,
    hi: T,
    f_hi: T,
}

impl<T: Real> Sided<T> {
    fn new(lo: T, f_lo: T, hi: T, f_hi: T) -> Self {
        Self { lo, f_lo, hi, f_hi }
    }

    /// Tightens the bracket with `p`. Without a nominal side, or when `f`
    /// contradicts it by more than `noise`, the sign of `f` picks the side.
    fn offer(&mut self, p: T, f: T, nominal: Option<Nominal>, noise: T) {
        if f.is_nan() || !(p >= self.lo && p <= self.hi) {
            return;
        }
        let zero = T::zero();
        let side = match nominal {
            Some(Nominal::Lower) if f <= noise => Some(Nominal::Lower),
            Some(Nominal::Upper) if f >= -noise => Some(Nominal::Upper),
            _ if f < zero => Some(Nominal::Lower),
            _ if f > zero => Some(Nominal::Upper),
            _ => None,
        };
        match side {
            Some(Nominal::Lower) if p > self.lo => {
                self.lo = p;
                self.f_lo = f;
            }
            Some(Nominal::Upper) if p < self.hi => {
                self.hi = p;
                self.f_hi = f;
            }
            Some(_) => {}
            None => {
                self.lo = p;
                self.f_lo = f;
                self.hi = p;
                self.f_hi = f;
            }
        }
    }
}

fn validate_pair<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<(Phase, Phase)> {
    GasParams::new(gas.gamma, gas.b)?;
    Ok((
        left.classify(gas, Side::Left)?,
        right.classify(gas, Side::Right)?,
    ))
}

/// Runs initialization and iteration, calling `observe` on every bracket
/// (the initial one included) in order.
pub fn estimate_observed<T, F>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
    cfg: &EstimatorConfig<T>,
    rule: StopRule,
    mut observe: F,
) -> Result<SpeedEstimate<T>>
where
    T: Real,
    F: FnMut(&PressureBracket<T>),
{
    cfg.validate()?;
    match validate_pair(left, right, gas)? {
        (Phase::Vacuum, Phase::Vacuum) => return vacuum_side_speeds(right, Side::Left, gas),
        (Phase::Vacuum, Phase::NonVacuum) => return vacuum_side_speeds(right, Side::Left, gas),
        (Phase::NonVacuum, Phase::Vacuum) => return vacuum_side_speeds(left, Side::Right, gas),
        (Phase::NonVacuum, Phase::NonVacuum) => {}
    }
    let problem = RiemannProblem::new(left, right, gas)?;
    match initialize_with(&problem, cfg, rule)? {
        Init::ShortCircuit(est) => {
            observe(&est.bracket);
            Ok(est)
        }
        Init::Bracket(bracket, est) => {
            observe(&bracket);
            Ok(iterate(&problem, bracket, est, cfg, rule, &mut observe))
        }
    }
}

/// Guaranteed upper bound on the maximum wave speed, accurate to relative
/// tolerance `cfg.eps` unless the iteration cap is hit.
pub fn estimate_lambda_max<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<SpeedEstimate<T>> {
    estimate_observed(left, right, gas, cfg, StopRule::MaxSpeed, |_| {})
}

/// Cheap guaranteed bound `max((v11)_-, (v32)_+)` from the initial bracket,
/// without iterating.
pub fn noniterative_upper_bound<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<T> {
    let cfg = EstimatorConfig {
        skip_newton_init: true,
        ..EstimatorConfig::default()
    };
    match validate_pair(left, right, gas)? {
        (Phase::NonVacuum, Phase::NonVacuum) => {
            let problem = RiemannProblem::new(left, right, gas)?;
            Ok(initialize_with(&problem, &cfg, StopRule::MaxSpeed)?
                .estimate()
                .lambda_max_upper())
        }
        _ => estimate_lambda_max(left, right, gas, &cfg).map(|e| e.lambda_max_upper()),
    }
}

/// Extreme speeds of the Riemann fan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremeSpeeds<T> {
    /// `v11 <= lambda_1^-`.
    pub lambda_1_lower: T,
    /// `v32 >= lambda_3^+`.
    pub lambda_3_upper: T,
    pub estimate: SpeedEstimate<T>,
}

/// Outer bounds on both extreme speeds, each within `eps * lambda_max` of
/// the exact value on convergence. The cone `v11 t <= x <= v32 t` always
/// contains the Riemann fan.
pub fn estimate_extreme_speeds<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<ExtremeSpeeds<T>> {
    let estimate = estimate_observed(left, right, gas, cfg, StopRule::ExtremeSpeeds, |_| {})?;
    Ok(ExtremeSpeeds {
        lambda_1_lower: estimate.bounds.v11,
        lambda_3_upper: estimate.bounds.v32,
        estimate,
    })
}

/// Every bracket visited by the estimator for the given configuration.
pub fn bracket_history<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<(Vec<PressureBracket<T>>, SpeedEstimate<T>)> {
    let mut seen = Vec::new();
    let est = estimate_observed(left, right, gas, cfg, StopRule::MaxSpeed, |b| seen.push(*b))?;
    Ok((seen, est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn st(rho: f64, u: f64, p: f64) -> PrimitiveState<f64> {
        PrimitiveState::new(rho, u, p)
    }

    fn air() -> GasParams<f64> {
        GasParams::ideal(1.4).unwrap()
    }

    fn eps(e: f64) -> EstimatorConfig<f64> {
        EstimatorConfig::with_eps(e)
    }

    #[test]
    fn right_vacuum_speeds() {
        let est = estimate_lambda_max(
            &st(1.0, 0.0, 1.0),
            &PrimitiveState::vacuum(0.0),
            &air(),
            &eps(1e-10),
        )
        .unwrap();
        assert_eq!(est.termination, Termination::VacuumData);
        assert_eq!(est.iterations, 0);
        assert_relative_eq!(est.bounds.v11, -1.1832159566199232, max_relative = 1e-15);
        assert_relative_eq!(est.bounds.v32, 5.9160797830996161, max_relative = 1e-15);
        assert_relative_eq!(
            est.lambda_max_upper(),
            5.9160797830996161,
            max_relative = 1e-15
        );
        assert_eq!(est.bounds.v11, est.bounds.v12);
        assert_eq!(est.bounds.v31, est.bounds.v32);
    }

    #[test]
    fn left_vacuum_speeds() {
        let est = estimate_lambda_max(
            &PrimitiveState::vacuum(0.0),
            &st(1.0, 0.0, 1.0),
            &air(),
            &eps(1e-10),
        )
        .unwrap();
        assert_eq!(est.termination, Termination::VacuumData);
        assert_relative_eq!(est.bounds.v11, -5.9160797830996161, max_relative = 1e-15);
        assert_relative_eq!(est.bounds.v32, 1.1832159566199232, max_relative = 1e-15);
        assert_relative_eq!(
            est.lambda_max_upper(),
            5.9160797830996161,
            max_relative = 1e-15
        );
    }

    #[test]
    fn vacuum_with_covolume() {
        let gas = GasParams::new(5.0 / 3.0, 0.1).unwrap();
        let est = vacuum_side_speeds(&st(1.0, 0.0, 1.0), Side::Right, &gas).unwrap();
        // 40-digit evaluation of u - a and u + 2 a (1 - b rho) / (gamma - 1)
        assert_relative_eq!(est.bounds.v11, -1.3608276348795434, max_relative = 1e-15);
        assert_relative_eq!(est.bounds.v32, 3.6742346141747671, max_relative = 1e-15);
    }

    #[test]
    fn both_vacuum_is_zero() {
        let v = PrimitiveState::vacuum(3.0);
        let est = estimate_lambda_max(&v, &v, &air(), &eps(1e-10)).unwrap();
        assert_eq!(est.lambda_max_upper(), 0.0);
        assert_eq!(est.termination, Termination::VacuumData);
    }

    #[test]
    fn bounds_at_star_pressure() {
        let prob = RiemannProblem::new(&st(1.0, 0.0, 0.01), &st(1.0, 0.0, 100.0), &air()).unwrap();
        let p = 46.09504424886797;
        let b = lambda_bounds(&PressureBracket::new(p, p, 0), &prob);
        assert_relative_eq!(b.lambda_max, 11.83215956619923, max_relative = 1e-11);

        let prob = RiemannProblem::new(
            &st(5.99924, 19.5975, 460.894),
            &st(5.99242, -6.19633, 46.0950),
            &air(),
        )
        .unwrap();
        let p = 1691.646955399126;
        let b = lambda_bounds(&PressureBracket::new(p, p, 0), &prob);
        assert_relative_eq!(b.lambda_max, 12.25077812308434, max_relative = 1e-11);
    }

    #[test]
    fn bounds_below_p_min_are_sound_speeds() {
        let (l, r) = (st(1.0, 0.5, 2.0), st(0.5, -0.5, 3.0));
        let prob = RiemannProblem::new(&l, &r, &air()).unwrap();
        let b = lambda_bounds(&PressureBracket::new(1.0, 1.0, 0), &prob);
        assert_relative_eq!(
            b.v11,
            0.5 - prob.left.coeffs.sound_speed,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            b.v32,
            -0.5 + prob.right.coeffs.sound_speed,
            max_relative = 1e-15
        );
    }

    #[test]
    fn initialize_slow_shock_short_circuits_with_refined_bracket() {
        let init = initialize(
            &st(1.0, 0.0, 0.01),
            &st(1.0, 0.0, 100.0),
            &air(),
            &eps(1e-15),
        )
        .unwrap();
        let Init::ShortCircuit(est) = init else {
            panic!("expected short circuit, got {init:?}");
        };
        assert_eq!(est.termination, Termination::InitAccurate);
        assert_relative_eq!(
            est.lambda_max_upper(),
            11.83215956619923,
            max_relative = 1e-11
        );
        assert_relative_eq!(est.bracket.p1, 37.70559999364363, max_relative = 1e-11);
        assert_relative_eq!(est.bracket.p2, 82.98306927558072, max_relative = 1e-11);
    }

    #[test]
    fn initialize_equal_states() {
        let s = st(1.0, -2.0, 1.0);
        let init = initialize(&s, &s, &air(), &eps(1e-15)).unwrap();
        let Init::ShortCircuit(est) = init else {
            panic!()
        };
        assert_eq!(est.termination, Termination::TwoRarefactionFastPath);
        assert_relative_eq!(
            est.lambda_max_upper(),
            2.0 + 1.4f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn initialize_fast_shock_needs_iteration() {
        let (l, r) = (st(1.0, 10.0, 1000.0), st(1.0, 10.0, 0.01));
        let init = initialize(&l, &r, &air(), &eps(0.1)).unwrap();
        assert!(matches!(init, Init::Bracket(..)));
        let est = estimate_lambda_max(&l, &r, &air(), &eps(0.1)).unwrap();
        assert_eq!(est.iterations, 1);
        assert_relative_eq!(est.bracket.p1, 455.2466713625296, max_relative = 1e-11);
        assert_relative_eq!(est.bracket.p2, 472.7977828960125, max_relative = 1e-11);
    }

    #[test]
    fn quadratic_roots_reproduce_reference_iterates() {
        let (l, r) = (st(1.0, 10.0, 1000.0), st(1.0, 10.0, 0.01));
        let prob = RiemannProblem::new(&l, &r, &air()).unwrap();
        let b1 = PressureBracket::new(455.2466713625296, 472.7977828960125, 1);
        assert_relative_eq!(
            quad_root_lower(&b1, &prob),
            460.8933865271423,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            quad_root_upper(&b1, &prob),
            460.8946107187795,
            max_relative = 1e-11
        );

        let s = st(1.0, -2.18, 0.01);
        let t = st(1.0, -2.18, 100.0);
        let (hist, est) = bracket_history(&s, &t, &air(), &eps(1e-15)).unwrap();
        assert_eq!(est.iterations, 2);
        assert_relative_eq!(hist[2].p1, 46.09504109404150, max_relative = 1e-11);

        let s = st(1.0, -1.0, 0.01);
        let t = st(1.0, -1.0, 100.0);
        let (hist, _) = bracket_history(&s, &t, &air(), &eps(1e-15)).unwrap();
        assert_relative_eq!(hist[1].p2, 46.70007404915459, max_relative = 1e-11);
    }

    #[test]
    fn quadratic_roots_fixed_at_zero_residual() {
        let prob = RiemannProblem::new(&st(1.0, 0.0, 0.01), &st(1.0, 0.0, 100.0), &air()).unwrap();
        let p = 46.09504424886797;
        let s = Samples {
            f1: 0.0,
            d1: prob.phi_prime(p),
            f2: prob.phi(80.0),
            d2: prob.phi_prime(80.0),
        };
        assert_eq!(lower_root(p, 80.0, &s), p);
        let s = Samples {
            f1: prob.phi(10.0),
            d1: prob.phi_prime(10.0),
            f2: 0.0,
            d2: prob.phi_prime(p),
        };
        assert_eq!(upper_root(10.0, p, &s), p);
        assert_eq!(
            quad_root_lower(&PressureBracket::new(30.0, 30.0, 0), &prob),
            30.0
        );
    }

    #[test]
    fn full_estimates_match_reference_tables() {
        let (l, r) = (st(1.0, 10.0, 1000.0), st(1.0, 10.0, 0.01));
        let est = estimate_lambda_max(&l, &r, &air(), &eps(1e-15)).unwrap();
        assert_eq!(est.iterations, 3);
        assert_relative_eq!(
            est.lambda_max_upper(),
            33.51753696690324,
            max_relative = 1e-11
        );
        assert_relative_eq!(est.bracket.p1, 460.8937874913834, max_relative = 1e-11);
        assert_relative_eq!(est.bracket.p2, 460.8937874913835, max_relative = 1e-11);

        let (l, r) = (st(1.0, -1.0, 0.01), st(1.0, -1.0, 100.0));
        let est = estimate_lambda_max(&l, &r, &air(), &eps(1e-15)).unwrap();
        assert_eq!(est.iterations, 1);
        assert_relative_eq!(
            est.lambda_max_upper(),
            10.83215956619923,
            max_relative = 1e-11
        );

        let (l, r) = (
            st(5.99924, 19.5975, 460.894),
            st(5.99242, -6.19633, 46.0950),
        );
        let est = estimate_lambda_max(&l, &r, &air(), &eps(1e-4)).unwrap();
        assert_eq!(est.iterations, 2);
        assert_relative_eq!(
            est.lambda_max_upper(),
            12.25077812313116,
            max_relative = 1e-11
        );
    }

    #[test]
    fn noniterative_bound() {
        let (l, r) = (st(1.0, 0.0, 0.01), st(1.0, 0.0, 100.0));
        assert_relative_eq!(
            noniterative_upper_bound(&l, &r, &air()).unwrap(),
            11.83215956619923,
            max_relative = 1e-11
        );
        let (l, r) = (st(1.0, -1.0, 1.0), st(1.0, 1.0, 1.0));
        let exact = 1.0 + 1.4f64.sqrt();
        assert_relative_eq!(
            noniterative_upper_bound(&l, &r, &air()).unwrap(),
            exact,
            max_relative = 1e-15
        );
        let (l, r) = (
            st(5.99924, 19.5975, 460.894),
            st(5.99242, -6.19633, 46.0950),
        );
        assert!(noniterative_upper_bound(&l, &r, &air()).unwrap() >= 12.25077812308434);
    }

    #[test]
    fn extreme_speeds_two_rarefaction() {
        let (l, r) = (st(1.0, -1.0, 1.0), st(0.5, 1.0, 2.0));
        let out = estimate_extreme_speeds(&l, &r, &air(), &eps(1e-12)).unwrap();
        let prob = RiemannProblem::new(&l, &r, &air()).unwrap();
        assert_eq!(out.estimate.iterations, 0);
        assert_eq!(out.lambda_1_lower, -1.0 - prob.left.coeffs.sound_speed);
        assert_eq!(out.lambda_3_upper, 1.0 + prob.right.coeffs.sound_speed);
    }

    #[test]
    fn seidel_reproduces_bound() {
        let (l, r) = (
            st(5.99924, 19.5975, 460.894),
            st(5.99242, -6.19633, 46.0950),
        );
        let mut cfg = eps(1e-15);
        let jac = estimate_lambda_max(&l, &r, &air(), &cfg).unwrap();
        cfg.update_scheme = UpdateScheme::Seidel;
        let sei = estimate_lambda_max(&l, &r, &air(), &cfg).unwrap();
        assert!(sei.iterations <= jac.iterations);
        assert_relative_eq!(
            sei.lambda_max_upper(),
            jac.lambda_max_upper(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn iteration_cap_keeps_bound() {
        let (l, r) = (
            st(5.99924, 19.5975, 460.894),
            st(5.99242, -6.19633, 46.0950),
        );
        let cfg = EstimatorConfig {
            eps: 1e-15,
            iteration_cap: 1,
            ..EstimatorConfig::default()
        };
        let est = estimate_lambda_max(&l, &r, &air(), &cfg).unwrap();
        assert_eq!(est.termination, Termination::IterationCap);
        assert_eq!(est.iterations, 1);
        assert!(est.lambda_max_upper() >= 12.25077812308434);
    }

    #[test]
    fn rejects_bad_input() {
        let good = st(1.0, 0.0, 1.0);
        let cfg = eps(1e-10);
        assert!(matches!(
            estimate_lambda_max(&st(f64::NAN, 0.0, 1.0), &good, &air(), &cfg),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            estimate_lambda_max(&good, &st(1.0, 0.0, -1.0), &air(), &cfg),
            Err(Error::NegativePressure { .. })
        ));
        let gas = GasParams { gamma: 1.4, b: 2.0 };
        assert!(matches!(
            estimate_lambda_max(&good, &good, &gas, &cfg),
            Err(Error::Inadmissible { .. })
        ));
        assert!(estimate_lambda_max(&good, &good, &air(), &eps(0.0)).is_err());
    }

    #[test]
    fn uncertified_gamma_is_rejected_on_request() {
        let gas = GasParams::ideal(3.0).unwrap();
        let (l, r) = (st(1.0, 10.0, 1000.0), st(1.0, 10.0, 0.01));
        let cfg = EstimatorConfig {
            require_guaranteed_gamma: true,
            ..eps(1e-12)
        };
        assert!(matches!(
            estimate_lambda_max(&l, &r, &gas, &cfg),
            Err(Error::UncertifiedGamma(_))
        ));
        let est = estimate_lambda_max(&l, &r, &gas, &eps(1e-12)).unwrap();
        assert!(est.termination.is_accurate());
    }

    #[test]
    fn zero_pressure_sides() {
        // Two cold streams colliding: p* has a closed form.
        let (l, r) = (st(1.0, 1.0, 0.0), st(2.0, -1.0, 0.0));
        let est = estimate_lambda_max(&l, &r, &air(), &eps(1e-12)).unwrap();
        assert!(est.expanded_bracket);
        let a_l = 2.0 / 2.4;
        let a_r = 2.0 / (2.4 * 2.0);
        let p_star = (2.0 / (f64::sqrt(a_l) + f64::sqrt(a_r))).powi(2);
        assert!(
            est.bracket.p1 <= p_star * (1.0 + 1e-14) && p_star <= est.bracket.p2 * (1.0 + 1e-14)
        );
        assert!(est.termination.is_accurate());

        // One cold side against a warm one.
        let (l, r) = (st(1.0, 0.0, 0.1), st(0.001, 0.0, 0.0));
        let est = estimate_lambda_max(&l, &r, &air(), &eps(1e-12)).unwrap();
        assert!(est.lambda_max_upper().is_finite());
        assert!(est.termination.is_accurate());
    }
}
