use proptest::prelude::*;
use wavebound::*;

fn gas() -> impl Strategy<Value = (f64, f64)> {
    // (gamma, b * rho_max)
    (1.01f64..=5.0 / 3.0, 0.0f64..0.9)
}

fn state() -> impl Strategy<Value = (f64, f64, f64)> {
    (-3.0f64..3.0, -50.0f64..50.0, -4.0f64..4.0)
        .prop_map(|(lr, u, lp)| (10f64.powf(lr), u, 10f64.powf(lp)))
}

#[derive(Debug)]
struct Case {
    left: PrimitiveState64,
    right: PrimitiveState64,
    gas: GasParams64,
}

fn case() -> impl Strategy<Value = Case> {
    (gas(), state(), state()).prop_map(|((gamma, y), l, r)| {
        let b = y / l.0.max(r.0);
        Case {
            left: PrimitiveState::new(l.0, l.1, l.2),
            right: PrimitiveState::new(r.0, r.1, r.2),
            gas: GasParams::new(gamma, b).unwrap(),
        }
    })
}

/// Fourth-order central difference of `phi`. The stencil stays on one side
/// of both side pressures, where the higher derivatives jump.
fn central_difference(pr: &RiemannProblem64, p: f64) -> f64 {
    let gap = (p - pr.left.state.p)
        .abs()
        .min((p - pr.right.state.p).abs());
    let h = (1e-3 * p).min(gap / 3.0).max(1e-7 * p);
    let d1 = pr.phi(p + h) - pr.phi(p - h);
    let d2 = pr.phi(p + 2.0 * h) - pr.phi(p - 2.0 * h);
    (8.0 * d1 - d2) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn wave_curve_is_increasing_and_concave(c in case(), t in 1e-3f64..1e3, s in 1.001f64..4.0) {
        let w = WaveCurve::new(&c.left, &c.gas).unwrap();
        let p0 = c.left.p * t;
        let (p1, p2) = (p0 * s, p0 * s * s);
        let (f0, f1, f2) = (w.f(p0), w.f(p1), w.f(p2));
        prop_assert!(f0 < f1 && f1 < f2);
        prop_assert!(w.df(p0) > 0.0 && w.df(p1) > 0.0);
        // Slopes of consecutive secants decrease, up to rounding of f.
        let s01 = (f1 - f0) / (p1 - p0);
        let s12 = (f2 - f1) / (p2 - p1);
        let noise = 1e-12 * (w.f_magnitude(p2) + w.f_magnitude(p0)) / (p1 - p0);
        prop_assert!(s12 <= s01 + noise, "{s01} {s12}");
    }

    #[test]
    fn branches_meet_smoothly_at_side_pressure(c in case()) {
        let w = WaveCurve::new(&c.left, &c.gas).unwrap();
        let pz = c.left.p;
        prop_assert_eq!(w.f_shock(pz), 0.0);
        prop_assert_eq!(w.f_rarefaction(pz), 0.0);
        let h = 1e-7 * pz;
        let below = w.df(pz - h);
        let above = w.df(pz + h);
        prop_assert!((below - above).abs() <= 1e-5 * above, "{below} {above}");
    }

    #[test]
    fn shock_branch_dominates_above_side_pressure(c in case(), t in 1.01f64..1e4) {
        let w = WaveCurve::new(&c.right, &c.gas).unwrap();
        let p = c.right.p * t;
        let tol = 1e-13 * (w.shock_magnitude(p) + w.rarefaction_magnitude(p));
        prop_assert!(w.f_shock(p) >= w.f_rarefaction(p) - tol);
    }

    #[test]
    fn two_rarefaction_curve_bounds_phi(c in case(), t in 0.0f64..50.0) {
        let pr = RiemannProblem::new(&c.left, &c.right, &c.gas).unwrap();
        let p = t * pr.p_max();
        let diff = pr.phi(p) - pr.phi_two_rarefaction(p);
        let tol = 1e-13 * (pr.phi_rounding(p) / f64::EPSILON);
        if p <= pr.p_min() {
            prop_assert!(diff.abs() <= tol);
        } else {
            prop_assert!(diff >= -tol, "p={p} diff={diff}");
        }
    }

    #[test]
    fn covolume_curve_is_ideal_curve_at_shifted_density(c in case(), t in 1e-3f64..1e3) {
        let ideal = GasParams::ideal(c.gas.gamma).unwrap();
        let shift = |s: &PrimitiveState64| PrimitiveState::new(s.rho / s.covolume_factor(&c.gas), s.u, s.p);
        let w = WaveCurve::new(&c.left, &c.gas).unwrap();
        let v = WaveCurve::new(&shift(&c.left), &ideal).unwrap();
        let p = c.left.p * t;
        prop_assert!((w.f(p) - v.f(p)).abs() <= 1e-13 * w.f_magnitude(p));

        let a = solve_exact(&c.left, &c.right, &c.gas);
        let b = solve_exact(&shift(&c.left), &shift(&c.right), &ideal);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a.p_star - b.p_star).abs() <= 1e-10 * a.p_star.max(b.p_star), "{} {}", a.p_star, b.p_star);
        }
    }

    #[test]
    fn estimate_bounds_exact_speed(c in case(), seidel in any::<bool>(), e in 1usize..13) {
        let cfg = EstimatorConfig {
            eps: 10f64.powi(-(e as i32)),
            update_scheme: if seidel { UpdateScheme::Seidel } else { UpdateScheme::Jacobi },
            ..EstimatorConfig::default()
        };
        let est = estimate_lambda_max(&c.left, &c.right, &c.gas, &cfg).unwrap();
        if let Ok(sol) = solve_exact(&c.left, &c.right, &c.gas) {
            let scale = sol.lambda_max + c.left.u.abs() + c.right.u.abs();
            prop_assert!(est.lambda_max_upper() >= sol.lambda_max - 1e-13 * scale);
            if est.termination.is_accurate() {
                prop_assert!(est.lambda_max_upper() - sol.lambda_max <= cfg.eps * sol.lambda_max + 1e-12);
            }
            prop_assert!(est.lambda_min() <= sol.lambda_max + 1e-13 * scale);
        }
    }

    #[test]
    fn noniterative_bound_is_weaker(c in case()) {
        let full = estimate_lambda_max(&c.left, &c.right, &c.gas, &EstimatorConfig::with_eps(1e-12)).unwrap();
        let quick = noniterative_upper_bound(&c.left, &c.right, &c.gas).unwrap();
        let scale = full.lambda_max_upper() + c.left.u.abs() + c.right.u.abs();
        prop_assert!(quick >= full.lambda_max_upper() - 1e-13 * scale);
    }

    #[test]
    fn phi_prime_matches_central_differences(c in case(), t in -3.0f64..3.0) {
        let pr = RiemannProblem::new(&c.left, &c.right, &c.gas).unwrap();
        let p = pr.p_min() * 10f64.powf(t);
        let fd = central_difference(&pr, p);
        let d = pr.phi_prime(p);
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs(), "p={p} fd={fd} d={d}");
    }
}
