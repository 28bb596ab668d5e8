//! Exact Riemann solution used as ground truth.
//!
//! The star pressure is found by a root finder that shares nothing with the
//! estimator beyond `phi` itself: Newton steps raise the lower end of the
//! bracket, chord (regula falsi) steps lower the upper end, and bisection
//! takes over whenever a step fails a sign check or the bracket stalls. The
//! loop runs until the bracket cannot shrink any further in the working
//! precision.

use crate::eos::{GasParams, Phase, PrimitiveState, RiemannProblem, Side, WaveCurve};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_ITERATIONS: usize = 200;
const MAX_DOUBLINGS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

impl WaveKind {
    pub fn name(self) -> &'static str {
        match self {
            WaveKind::Shock => "Shock",
            WaveKind::Rarefaction => "Rarefaction",
        }
    }
}

/// Wave pattern and intermediate states of the exact solution.
///
/// Speeds satisfy `lambda_1_minus <= lambda_1_plus <= u_star <=
/// lambda_3_minus <= lambda_3_plus`. When a vacuum opens in the middle
/// (`p_star = 0`), `lambda_1_plus` and `lambda_3_minus` are the two vacuum
/// fronts, both star densities are zero and `u_star` is reported as the
/// midpoint of the fronts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution<T> {
    pub p_star: T,
    pub u_star: T,
    pub lambda_1_minus: T,
    pub lambda_1_plus: T,
    pub lambda_3_minus: T,
    pub lambda_3_plus: T,
    pub rho_star_l: T,
    pub rho_star_r: T,
    pub left_wave: WaveKind,
    pub right_wave: WaveKind,
    pub lambda_max: T,
}

impl<T: Real> ExactSolution<T> {
    pub fn vacuum_in_middle(&self) -> bool {
        self.p_star == T::zero()
    }

    /// Speeds are ordered, up to a relative slack `tol` of the largest one.
    pub fn waves_ordered(&self, tol: T) -> bool {
        let s = [
            self.lambda_1_minus,
            self.lambda_1_plus,
            self.u_star,
            self.lambda_3_minus,
            self.lambda_3_plus,
        ];
        let scale = s.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        s.windows(2).all(|w| w[0] <= w[1] + tol * scale)
    }
}

/// Density behind a shock reaching pressure `p` from `state`.
///
/// Written in terms of `p` and `p_Z` rather than their ratio so that a
/// zero-pressure upstream state gives the strong-shock limit
/// `rho_Z (gamma + 1) / (gamma - 1 + 2 b rho_Z)`.
pub fn shock_density<T: Real>(state: &PrimitiveState<T>, p: T, gas: &GasParams<T>) -> T {
    let g = gas.gamma;
    let one = T::one();
    let two = T::lit(2.0);
    let gp1 = g + one;
    let brho = gas.b * state.rho;
    let num = p + (g - one) / gp1 * state.p;
    let den = (g - one + two * brho) / gp1 * p + (gp1 - two * brho) / gp1 * state.p;
    state.rho * num / den
}

/// Density on the isentrope through `state` at pressure `p`:
/// `1/rho - b = (1/rho_Z - b) (p_Z/p)^{1/gamma}`.
pub fn rarefaction_density<T: Real>(state: &PrimitiveState<T>, p: T, gas: &GasParams<T>) -> T {
    if p == T::zero() {
        return T::zero();
    }
    let specific = gas.b + (state.rho.recip() - gas.b) * (state.p / p).powf(gas.gamma.recip());
    specific.recip()
}

fn star_sound_speed<T: Real>(rho: T, p: T, gas: &GasParams<T>) -> T {
    (gas.gamma * p / (rho * (T::one() - gas.b * rho))).sqrt()
}

/// Exact root of `phi`, or 0 when a vacuum forms (`phi(0) >= 0`).
pub fn p_star_exact<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<T> {
    let problem = RiemannProblem::new(left, right, gas)?;
    star_pressure(&problem)
}

pub(crate) fn star_pressure<T: Real>(problem: &RiemannProblem<T>) -> Result<T> {
    let zero = T::zero();
    if problem.phi_at_zero() >= zero {
        return Ok(zero);
    }
    let p_min = problem.p_min();
    let f_min = problem.phi(p_min);
    if f_min == zero {
        return Ok(p_min);
    }
    let (mut lo, mut hi) = if f_min > zero {
        (zero, p_min)
    } else {
        let mut hi = problem.p_max().max(T::min_positive_value());
        let mut n = 0;
        while problem.phi(hi) < zero {
            hi = hi + hi;
            n += 1;
            if n > MAX_DOUBLINGS || !hi.is_finite() {
                return Err(Error::OracleNoConvergence(n));
            }
        }
        (p_min, hi)
    };
    let mut f_lo = problem.phi(lo);
    let mut f_hi = problem.phi(hi);
    if f_hi == zero {
        return Ok(hi);
    }

    let half = T::lit(0.5);
    for _ in 0..MAX_ITERATIONS {
        let width = hi - lo;
        // Newton from either end lands left of the root (phi is concave).
        let mut cand_lo = lo;
        for (p, f) in [(lo, f_lo), (hi, f_hi)] {
            let d = problem.phi_prime(p);
            if d.is_finite() && d > zero {
                let x = p - f / d;
                if x > cand_lo && x < hi {
                    cand_lo = x;
                }
            }
        }
        // The chord lies below a concave function: its root is right of p*.
        let chord = hi - f_hi * width / (f_hi - f_lo);
        let cand_hi = if chord > lo && chord < hi { chord } else { hi };

        let mut progressed = false;
        if cand_lo > lo {
            let f = problem.phi(cand_lo);
            if f == zero {
                return Ok(cand_lo);
            }
            if f < zero {
                lo = cand_lo;
                f_lo = f;
                progressed = true;
            } else if cand_lo < hi {
                hi = cand_lo;
                f_hi = f;
                progressed = true;
            }
        }
        if cand_hi < hi && cand_hi > lo {
            let f = problem.phi(cand_hi);
            if f == zero {
                return Ok(cand_hi);
            }
            if f > zero {
                hi = cand_hi;
                f_hi = f;
                progressed = true;
            } else {
                lo = cand_hi;
                f_lo = f;
                progressed = true;
            }
        }
        if !progressed || hi - lo > half * width || lo == zero {
            // Split in log scale when the bracket spans decades; the root can
            // sit far below p_min when gamma is close to one.
            let mid = if lo > zero && hi > T::lit(4.0) * lo {
                lo.sqrt() * hi.sqrt()
            } else if lo == zero {
                hi * T::lit(f64::EPSILON)
            } else {
                lo + half * (hi - lo)
            };
            if mid <= lo || mid >= hi {
                break;
            }
            let f = problem.phi(mid);
            if f == zero {
                return Ok(mid);
            }
            if f < zero {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
                f_hi = f;
            }
        }
        if hi - lo <= T::lit(2.0) * T::epsilon() * hi {
            break;
        }
    }
    if hi < T::min_positive_value() {
        return Err(Error::StarPressureUnderflow { upper: hi.as_f64() });
    }
    if hi - lo > T::lit(4.0) * T::epsilon() * hi {
        return Err(Error::OracleNoConvergence(MAX_ITERATIONS));
    }
    Ok(if -f_lo < f_hi { lo } else { hi })
}

fn side_curves<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<RiemannProblem<T>> {
    let gas = GasParams::new(gas.gamma, gas.b)?;
    for (s, side) in [(left, Side::Left), (right, Side::Right)] {
        if s.classify(&gas, side)? == Phase::Vacuum {
            return Err(Error::VacuumState);
        }
    }
    RiemannProblem::new(left, right, &gas)
}

/// Full exact solution for two non-vacuum states.
pub fn solve_exact<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<ExactSolution<T>> {
    let problem = side_curves(left, right, gas)?;
    let p_star = star_pressure(&problem)?;
    let (l, r) = (&problem.left, &problem.right);
    let lambda_1_minus = left.u - l.speed_magnitude(p_star);
    let lambda_3_plus = right.u + r.speed_magnitude(p_star);
    let lambda_max = lambda_1_minus.neg_part().max(lambda_3_plus.pos());
    let left_wave = if p_star >= left.p {
        WaveKind::Shock
    } else {
        WaveKind::Rarefaction
    };
    let right_wave = if p_star >= right.p {
        WaveKind::Shock
    } else {
        WaveKind::Rarefaction
    };

    if p_star == T::zero() {
        let gm1 = gas.gamma - T::one();
        let two = T::lit(2.0);
        let front_l = left.u + two * l.coeffs.sound_speed * l.coeffs.covol / gm1;
        let front_r = right.u - two * r.coeffs.sound_speed * r.coeffs.covol / gm1;
        return Ok(ExactSolution {
            p_star,
            u_star: T::lit(0.5) * (front_l + front_r),
            lambda_1_minus,
            lambda_1_plus: front_l,
            lambda_3_minus: front_r,
            lambda_3_plus,
            rho_star_l: T::zero(),
            rho_star_r: T::zero(),
            left_wave,
            right_wave,
            lambda_max,
        });
    }

    let u_star = left.u - l.f(p_star);
    let u_check = right.u + r.f(p_star);
    let scale = left.u.abs() + right.u.abs() + l.coeffs.sound_speed + r.coeffs.sound_speed;
    if (u_star - u_check).abs() > T::lit(1e-10) * scale.max(u_star.abs()) {
        return Err(Error::OracleInconsistent(format!(
            "contact speed {} from the left curve, {} from the right",
            u_star, u_check
        )));
    }

    let star_density = |curve: &WaveCurve<T>, kind| match kind {
        WaveKind::Shock => shock_density(&curve.state, p_star, gas),
        WaveKind::Rarefaction => rarefaction_density(&curve.state, p_star, gas),
    };
    let rho_star_l = star_density(l, left_wave);
    let rho_star_r = star_density(r, right_wave);
    let lambda_1_plus = match left_wave {
        WaveKind::Shock => lambda_1_minus,
        WaveKind::Rarefaction => u_star - star_sound_speed(rho_star_l, p_star, gas),
    };
    let lambda_3_minus = match right_wave {
        WaveKind::Shock => lambda_3_plus,
        WaveKind::Rarefaction => u_star + star_sound_speed(rho_star_r, p_star, gas),
    };

    Ok(ExactSolution {
        p_star,
        u_star,
        lambda_1_minus,
        lambda_1_plus,
        lambda_3_minus,
        lambda_3_plus,
        rho_star_l,
        rho_star_r,
        left_wave,
        right_wave,
        lambda_max,
    })
}

/// `max(|u_L| + a_L, |u_R| + a_R)`. Neither an upper nor a lower bound on
/// the maximum wave speed in general.
pub fn naive_estimate<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<T> {
    let problem = side_curves(left, right, gas)?;
    Ok((left.u.abs() + problem.left.coeffs.sound_speed)
        .max(right.u.abs() + problem.right.coeffs.sound_speed))
}

/// `c(gamma)` in `lambda_3^+ - lambda_1^- >= c(gamma) (a_L + a_R)`.
pub fn gap_lower_bound<T: Real>(gamma: T) -> T {
    let one = T::one();
    let three = T::lit(3.0);
    if gamma > three {
        return one;
    }
    T::lit(2.0) * (T::lit(2.0) * (gamma - one)).sqrt() / (gamma + one)
}

/// Outcome of [`check_admissibility`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport<T> {
    pub pass: bool,
    /// Smallest `1 - b rho` seen. 1 for an ideal gas.
    pub worst_margin: T,
    /// Largest `1 - b rho` seen; must not exceed 1.
    pub max_covolume: T,
    pub points_checked: usize,
}

/// Checks `0 < 1 - b rho <= 1` at both star densities and at `samples`
/// points inside each rarefaction fan.
pub fn check_admissibility<T: Real>(
    sol: &ExactSolution<T>,
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
    samples: usize,
) -> AdmissibilityReport<T> {
    let one = T::one();
    let mut worst = one;
    let mut max_cv = T::zero();
    let mut n = 0;
    let mut visit = |rho: T| {
        let cv = one - gas.b * rho;
        worst = worst.min(cv);
        max_cv = max_cv.max(cv);
        n += 1;
    };
    visit(sol.rho_star_l);
    visit(sol.rho_star_r);
    for (state, kind) in [(left, sol.left_wave), (right, sol.right_wave)] {
        if kind != WaveKind::Rarefaction || samples == 0 {
            continue;
        }
        for i in 1..=samples {
            let t = T::from_usize(i).unwrap() / T::from_usize(samples + 1).unwrap();
            let p = if sol.p_star > T::zero() {
                state.p * (sol.p_star / state.p).powf(t)
            } else {
                state.p * (one - t)
            };
            visit(rarefaction_density(state, p, gas));
        }
    }
    AdmissibilityReport {
        pass: worst > T::zero() && max_cv <= one,
        worst_margin: worst,
        max_covolume: max_cv,
        points_checked: n,
    }
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

    #[test]
    fn slow_shock_star_pressure() {
        for u in [0.0, -1.0, -2.18] {
            let p = p_star_exact(&st(1.0, u, 0.01), &st(1.0, u, 100.0), &air()).unwrap();
            assert_relative_eq!(p, 46.09504424886797, max_relative = 1e-13);
        }
    }

    #[test]
    fn fast_shock_star_pressure() {
        let p = p_star_exact(
            &st(5.99924, 19.5975, 460.894),
            &st(5.99242, -6.19633, 46.0950),
            &air(),
        )
        .unwrap();
        assert_relative_eq!(p, 1691.646955399126, max_relative = 1e-13);
    }

    #[test]
    fn root_residual_is_tiny() {
        let (l, r) = (st(1.0, 0.0, 1.0), st(0.125, 0.0, 0.1));
        let prob = RiemannProblem::new(&l, &r, &air()).unwrap();
        let p = star_pressure(&prob).unwrap();
        let scale = prob.left.coeffs.sound_speed + prob.right.coeffs.sound_speed;
        assert!(prob.phi(p).abs() <= 1e-14 * scale);
        assert!(prob.phi(p * (1.0 - 1e-13)) < 0.0);
        assert!(prob.phi(p * (1.0 + 1e-13)) > 0.0);
    }

    #[test]
    fn equal_states() {
        let s = st(0.7, 1.5, 2.0);
        let gas = GasParams::new(1.4, 0.2).unwrap();
        let sol = solve_exact(&s, &s, &gas).unwrap();
        let a = (1.4f64 * 2.0 / (0.7 * 0.86)).sqrt();
        assert_eq!(sol.p_star, 2.0);
        assert_eq!(sol.u_star, 1.5);
        assert_relative_eq!(sol.lambda_1_minus, 1.5 - a, max_relative = 1e-15);
        assert_relative_eq!(sol.lambda_3_plus, 1.5 + a, max_relative = 1e-15);
        assert_relative_eq!(sol.rho_star_l, 0.7, max_relative = 1e-15);
        assert_relative_eq!(sol.rho_star_r, 0.7, max_relative = 1e-15);
    }

    #[test]
    fn fast_shock_speeds() {
        let sol = solve_exact(
            &st(5.99924, 19.5975, 460.894),
            &st(5.99242, -6.19633, 46.0950),
            &air(),
        )
        .unwrap();
        assert_eq!(sol.left_wave, WaveKind::Shock);
        assert_eq!(sol.right_wave, WaveKind::Shock);
        assert_relative_eq!(sol.lambda_max, 12.25077812308434, max_relative = 1e-12);
        assert!(sol.waves_ordered(0.0));
    }

    #[test]
    fn counter_example_speeds() {
        let (l, r) = (st(0.01, 0.0, 0.01), st(1000.0, 0.0, 1000.0));
        let sol = solve_exact(&l, &r, &air()).unwrap();
        let naive = naive_estimate(&l, &r, &air()).unwrap();
        assert_relative_eq!(sol.lambda_max, 5.227270670473105, max_relative = 1e-12);
        assert_relative_eq!(naive, 1.1832159566199232, max_relative = 1e-15);
    }

    #[test]
    fn sod_solution() {
        let sol = solve_exact(&st(1.0, 0.0, 1.0), &st(0.125, 0.0, 0.1), &air()).unwrap();
        assert_eq!(sol.left_wave, WaveKind::Rarefaction);
        assert_eq!(sol.right_wave, WaveKind::Shock);
        // Well-known Sod star state, to the digits commonly tabulated.
        assert_relative_eq!(sol.p_star, 0.30313, max_relative = 1e-4);
        assert_relative_eq!(sol.u_star, 0.92745, max_relative = 1e-4);
        assert_relative_eq!(sol.rho_star_l, 0.42632, max_relative = 1e-4);
        assert_relative_eq!(sol.rho_star_r, 0.26557, max_relative = 1e-4);
        assert!(sol.waves_ordered(0.0));
    }

    #[test]
    fn vacuum_formation() {
        let (l, r) = (st(1.0, -7.0, 1.0), st(1.0, 7.0, 1.0));
        let sol = solve_exact(&l, &r, &air()).unwrap();
        assert_eq!(sol.p_star, 0.0);
        assert!(sol.vacuum_in_middle());
        let a = 1.4f64.sqrt();
        assert_relative_eq!(sol.lambda_1_plus, -7.0 + 5.0 * a, max_relative = 1e-15);
        assert_relative_eq!(sol.lambda_3_minus, 7.0 - 5.0 * a, max_relative = 1e-15);
        assert_eq!(sol.u_star, 0.0);
        assert!(sol.waves_ordered(0.0));
        let rep = check_admissibility(&sol, &l, &r, &air(), 8);
        assert!(rep.pass);
    }

    #[test]
    fn shock_density_identity() {
        // With y = b rho: 1 - y = (1 - y_L) / (1 + 2 y_L (beta - 1) / ((gamma-1) beta + gamma + 1)).
        let gas = GasParams::new(1.4, 0.5).unwrap();
        let s = st(1.0, 0.0, 1.0);
        let beta = 10.0;
        let rho = shock_density(&s, beta, &gas);
        let expected = 0.5 / (1.0 + 2.0 * 0.5 * (beta - 1.0) / (0.4 * beta + 2.4));
        assert_relative_eq!(1.0 - 0.5 * rho, expected, max_relative = 1e-15);
    }

    #[test]
    fn shock_density_limits() {
        let gas = GasParams::new(1.4, 0.3).unwrap();
        let s = st(2.0, 0.0, 0.0);
        assert_relative_eq!(
            shock_density(&s, 5.0, &gas),
            2.0 * 2.4 / (0.4 + 1.2),
            max_relative = 1e-15
        );
        let s = st(2.0, 0.0, 3.0);
        assert_relative_eq!(shock_density(&s, 3.0, &gas), 2.0, max_relative = 1e-15);
        assert_relative_eq!(
            rarefaction_density(&s, 3.0, &gas),
            2.0,
            max_relative = 1e-15
        );
        assert_eq!(rarefaction_density(&s, 0.0, &gas), 0.0);
    }

    #[test]
    fn admissibility_ideal_gas_margin_is_one() {
        let (l, r) = (st(1.0, 0.0, 1.0), st(0.125, 0.0, 0.1));
        let sol = solve_exact(&l, &r, &air()).unwrap();
        let rep = check_admissibility(&sol, &l, &r, &air(), 32);
        assert!(rep.pass);
        assert_eq!(rep.worst_margin, 1.0);
        assert_eq!(rep.points_checked, 34);
    }

    #[test]
    fn admissibility_dense_gas() {
        let gas = GasParams::new(1.4, 0.9).unwrap();
        let (l, r) = (st(1.0, 3.0, 5.0), st(0.5, -3.0, 0.1));
        let sol = solve_exact(&l, &r, &gas).unwrap();
        let rep = check_admissibility(&sol, &l, &r, &gas, 32);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.worst_margin < 0.1);
    }

    #[test]
    fn gap_constant() {
        assert_eq!(gap_lower_bound(3.0), 1.0);
        assert_eq!(gap_lower_bound(5.0), 1.0);
        // 40-digit evaluation of 2 sqrt(0.8) / 2.4
        assert_relative_eq!(
            gap_lower_bound(1.4),
            0.74535599249992990,
            max_relative = 1e-15
        );
        assert!(gap_lower_bound(1.0001f64) < gap_lower_bound(2.0));
    }

    #[test]
    fn rejects_vacuum_input() {
        assert!(matches!(
            solve_exact(&st(0.0, 0.0, 0.0), &st(1.0, 0.0, 1.0), &air()),
            Err(Error::VacuumState)
        ));
    }

    #[test]
    fn resolves_roots_many_decades_below_p_min() {
        // gamma near one makes phi rise steeply off p = 0.
        let gas = GasParams::new(1.0046015497851433, 0.0003661529185391008).unwrap();
        let l = st(337.43010081420573, 29.446012097520452, 6.090028272614555);
        let r = st(492.06161857239294, 51.62448820408315, 1.7653200790835286e-6);
        let sol = solve_exact(&l, &r, &gas).unwrap();
        assert!(sol.p_star > 1e-99 && sol.p_star < 1e-97, "{}", sol.p_star);
        let problem = RiemannProblem::new(&l, &r, &gas).unwrap();
        assert!(problem.phi(sol.p_star).abs() < 1e-12);
    }

    #[test]
    fn reports_star_pressure_underflow() {
        let gas = GasParams::new(1.001526893234467, 0.02753494425166671).unwrap();
        let l = st(
            0.055485052004988156,
            -60.59493703488082,
            0.00011980289586919686,
        );
        let r = st(
            28.53351670672561,
            -1.722963047617398,
            0.00010627256142813592,
        );
        match solve_exact(&l, &r, &gas) {
            Err(Error::StarPressureUnderflow { upper }) => assert!(upper < f64::MIN_POSITIVE),
            other => panic!("expected underflow, got {other:?}"),
        }
    }
}
