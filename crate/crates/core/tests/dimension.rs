use fracdim::construction::{Address, Realization, Semantics, Truncation};
use fracdim::dimension::{
    antichain_moment_test, estimate_box_dimension, estimate_orbit_dimension, estimate_set_dimension, eval_mink,
    eval_packsim, scale_grid, solve_alpha, x_independence_check, AntichainRule, CountType, DimensionError,
    EnvelopeMode, ExpectedSumCurve, FitWindow, SetFit, SumValue,
};
use fracdim::geometry::CompactSet;
use fracdim::models::{self, orbit_set, orbit_set_hull, vn_example1, vn_example2, PMode, RatioLaw};
use proptest::prelude::*;

#[test]
fn alpha_of_deterministic_cantor_sets() {
    for &(r, m) in &[(1.0 / 3.0, 2u32), (0.25, 2), (0.2, 4), (0.1, 3), (0.45, 2)] {
        let model = models::cantor(r, m).unwrap();
        let sol = solve_alpha(&model.expected_sum_curve().unwrap(), 1e-10).unwrap();
        let exact = f64::from(m).ln() / (1.0 / r).ln();
        assert!((sol.alpha - exact).abs() < 1e-9, "r = {r}, m = {m}: {} vs {exact}", sol.alpha);
        assert!(sol.bracket[0] <= exact + 1e-12 && exact <= sol.bracket[1] + 1e-12);
    }
}

#[test]
fn alpha_of_a_random_homogeneous_set() {
    // 2 E[U^a] = 1 with U uniform on [0.2, 0.3], solved independently by bisection.
    let f = |a: f64| 2.0 * (0.3f64.powf(a + 1.0) - 0.2f64.powf(a + 1.0)) / ((a + 1.0) * 0.1) - 1.0;
    let (mut lo, mut hi) = (0.1, 0.9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let model = models::homogeneous_random(RatioLaw::Uniform { lo: 0.2, hi: 0.3 }, 2, 1.0).unwrap();
    let exact = solve_alpha(&model.expected_sum_curve().unwrap(), 1e-10).unwrap();
    assert!((exact.alpha - lo).abs() < 1e-9);
    let mc = ExpectedSumCurve::monte_carlo(&model, 20_000, 3, Truncation::none());
    let est = solve_alpha(&mc, 1e-4).unwrap();
    assert!(est.bracket[0] <= lo && lo <= est.bracket[1], "{:?} vs {lo}", est.bracket);
}

#[test]
fn solver_rejects_degenerate_curves() {
    let single = ExpectedSumCurve::from_ratios(&[0.5]);
    assert!(matches!(solve_alpha(&single, 1e-9), Err(DimensionError::Subcritical(_))));
    let heavy = ExpectedSumCurve::from_ratios(&[0.6, 0.6]);
    assert!(matches!(solve_alpha(&heavy, 1e-9), Err(DimensionError::NoBracket(_))));
    assert!(solve_alpha(&ExpectedSumCurve::from_ratios(&[0.3, 0.3]), 0.0).is_err());
}

#[test]
fn certified_sums_for_the_infinite_examples() {
    let c1 = models::example1(PMode::Random).unwrap().expected_sum_curve().unwrap();
    let c2 = models::example2().expected_sum_curve().unwrap();
    // Direct partial sums over the representable terms; the tails are below 1e-300.
    let direct1: f64 = (1..300).map(|n| vn_example1(n).powf(0.25)).sum();
    let direct2: f64 = (1..300).map(|n| vn_example2(n).powf(0.125)).sum();
    let (v1, v2) = (c1.evaluate(0.25), c2.evaluate(0.125));
    assert!(v1.lo() <= direct1 + 1e-12 && direct1 <= v1.hi() + 1e-12);
    assert!(v2.lo() <= direct2 + 1e-12 && direct2 <= v2.hi() + 1e-12);
    assert!(v1.hi() < 1.0 && v2.hi() < 1.0);
    let a1 = solve_alpha(&c1, 1e-9).unwrap();
    let a2 = solve_alpha(&c2, 1e-9).unwrap();
    assert!(a1.bracket[1] < 0.25 && a2.bracket[1] < 0.125);
    assert!(matches!(c1.evaluate(0.5), SumValue::Bounded { .. }));
}

#[test]
fn power_law_counts_give_their_exponent() {
    let table: Vec<(f64, u64)> = scale_grid(1e-1, 1e-7, 8)
        .unwrap()
        .into_iter()
        .map(|r| (r, (3.0 * r.powf(-0.37)).round() as u64))
        .collect();
    let est = estimate_box_dimension(&table, &FitWindow::new(1e-7, 1e-1), EnvelopeMode::Upper, CountType::Covering).unwrap();
    assert!((est.slope - 0.37).abs() < 0.005);
    assert!(est.r_squared > 0.999);
}

#[test]
fn orbit_sets_have_dimension_one_over_p_plus_one() {
    for p in [0.5, 1.0, 2.0, 3.0] {
        let set = orbit_set(p, 1e-9).unwrap();
        let fit = SetFit::over(1e-6, 1e-2).unwrap();
        let est = estimate_set_dimension(&set, &orbit_set_hull(&set), set.len(), &fit).unwrap();
        assert!((est.slope - 1.0 / (p + 1.0)).abs() < 0.03, "p = {p}: {}", est.slope);
    }
}

#[test]
fn window_too_narrow_is_an_error() {
    let set = orbit_set(1.0, 1e-9).unwrap();
    let fit = SetFit::over(1e-3, 2e-3).unwrap();
    assert!(matches!(
        estimate_set_dimension(&set, &CompactSet::empty(), set.len(), &fit),
        Err(DimensionError::TooFewRows(_))
    ));
    assert!(SetFit::over(1e-2, 1e-3).is_err());
}

#[test]
fn complete_finite_orbits_have_dimension_zero() {
    let rz = Realization::sample(&models::cantor(1.0 / 3.0, 2).unwrap(), 0, 3, Truncation::none(), Semantics::Recursive);
    let est = estimate_orbit_dimension(&rz, &Address::root(), 1.0, &SetFit::over(1e-6, 1e-1).unwrap()).unwrap();
    assert!(est.finite_set);
    assert_eq!(est.slope, 0.0);
}

#[test]
fn orbit_dimension_of_the_first_example() {
    let m = models::example1(PMode::Fixed(1.0)).unwrap();
    let rz = Realization::sample(&m, 1, 1, Truncation::from_log10(-1800.0).unwrap(), Semantics::Recursive);
    let fit = SetFit::over(1e-6, 1e-2).unwrap();
    let est = estimate_orbit_dimension(&rz, &Address::root(), 1.0, &fit).unwrap();
    assert!((est.slope - 0.5).abs() < 0.03, "{}", est.slope);
    let check = x_independence_check(&rz, &Address::root(), 1.0, 0.3, &fit).unwrap();
    assert!(check.consistent, "{check:?}");
}

#[test]
fn dimension_formula_evaluators() {
    assert_eq!(eval_mink(0.19, 0.5).unwrap(), 0.5);
    assert_eq!(eval_mink(0.6, 0.3).unwrap(), 0.6);
    assert!(eval_mink(1.2, 0.3).is_err());
    assert_eq!(eval_packsim(0.08, 0.2, true), Some(0.2));
    assert_eq!(eval_packsim(0.08, 0.2, false), None);
}

#[test]
fn moment_bound_holds_for_a_random_cantor_set() {
    let m = models::homogeneous_random(RatioLaw::Uniform { lo: 0.2, hi: 0.3 }, 2, 1.0).unwrap();
    let rep = antichain_moment_test(&m, 0.6, 2, 500, 1, AntichainRule::default(), Truncation::from_eps(1e-30).unwrap())
        .unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(antichain_moment_test(&m, 0.45, 2, 10, 1, AntichainRule::default(), Truncation::none()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alpha_grows_with_the_ratio(r in 0.05..0.45f64, dr in 0.001..0.04f64, m in 2u32..=2) {
        let a = solve_alpha(&ExpectedSumCurve::from_ratios(&vec![r; m as usize]), 1e-10).unwrap().alpha;
        let b = solve_alpha(&ExpectedSumCurve::from_ratios(&vec![r + dr; m as usize]), 1e-10).unwrap().alpha;
        prop_assert!(b > a);
    }

    #[test]
    fn curve_bounds_enclose_the_estimate(beta in 0.05..1.0f64) {
        let c = models::example1(PMode::Random).unwrap().expected_sum_curve().unwrap();
        if let SumValue::Bounded { estimate, lo, hi } = c.evaluate(beta) {
            prop_assert!(lo <= estimate && estimate <= hi);
        } else {
            prop_assert!(false, "diverged at {}", beta);
        }
    }
}
