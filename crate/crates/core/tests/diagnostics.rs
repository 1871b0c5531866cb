use proptest::prelude::*;
use shiftknn::distributions::{
    check_dre_numeric, check_mass_properties, check_pseudo_moment, dre_threshold,
    family_mass_constants, tail_functional, DistributionSpec, QuadratureBudget, TailFunctional,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exponential_dre_brackets_threshold(lp in 0.5f64..3.0, lq in 0.5f64..3.0) {
        let (s, t) = (DistributionSpec::exponential(lp), DistributionSpec::exponential(lq));
        let th = dre_threshold(&s, &t).unwrap();
        let b = QuadratureBudget::default();
        prop_assert!(check_dre_numeric(&s, &t, 0.9 * th, &b).unwrap().is_satisfied());
        prop_assert!(check_dre_numeric(&s, &t, 1.1 * th, &b).unwrap().is_violated());
    }

    #[test]
    fn pareto_dre_brackets_threshold(ap in 0.5f64..3.0, aq in 1.0f64..4.0) {
        let (s, t) = (DistributionSpec::pareto(ap), DistributionSpec::pareto(aq));
        let th = dre_threshold(&s, &t).unwrap();
        let b = QuadratureBudget::default();
        prop_assert!(check_dre_numeric(&s, &t, 0.9 * th, &b).unwrap().is_satisfied());
        prop_assert!(check_dre_numeric(&s, &t, 1.1 * th, &b).unwrap().is_violated());
    }

    #[test]
    fn exponential_tail_functionals_match_closed_forms(lp in 0.5f64..3.0, lq in 0.5f64..3.0, frac in 0.05f64..0.95) {
        let (s, t) = (DistributionSpec::exponential(lp), DistributionSpec::exponential(lq));
        let b = QuadratureBudget::default().with_rel_tol(1e-12);
        let th = lq / lp;
        let u = frac * th;
        // ∫ λ_Q e^{−λ_Q x} / (λ_P e^{−λ_P x})^u = λ_Q λ_P^{−u} / (λ_Q − u λ_P)
        let tp = tail_functional(&s, &t, u, TailFunctional::Source, &b).unwrap();
        let exact = lq * lp.powf(-u) / (lq - u * lp);
        prop_assert!(((tp - exact) / exact).abs() < 1e-8);
        // ∫ q^{1−u} for u < 1: λ^{1−u} / (λ (1−u))
        let v = frac;
        let tq = tail_functional(&s, &t, v, TailFunctional::Target, &b).unwrap();
        let exact_q = lq.powf(1.0 - v) / (lq * (1.0 - v));
        prop_assert!(((tq - exact_q) / exact_q).abs() < 1e-8);
    }
}

#[test]
fn tail_functional_diverges_past_threshold() {
    let (s, t) = (
        DistributionSpec::exponential(1.0),
        DistributionSpec::exponential(2.0),
    );
    let b = QuadratureBudget::default();
    assert_eq!(
        tail_functional(&s, &t, 2.5, TailFunctional::Source, &b).unwrap(),
        f64::INFINITY
    );
    assert_eq!(
        tail_functional(&s, &t, 1.5, TailFunctional::Target, &b).unwrap(),
        f64::INFINITY
    );
}

#[test]
fn uniform_pair_has_infinite_threshold() {
    let u = DistributionSpec::uniform(0.0, 1.0, 1);
    assert_eq!(dre_threshold(&u, &u).unwrap(), f64::INFINITY);
    let b = QuadratureBudget::default();
    assert!(check_dre_numeric(&u, &u, 50.0, &b).unwrap().is_satisfied());
    assert!(check_pseudo_moment(&u, 50.0, &b).unwrap().is_satisfied());
    let c = family_mass_constants(&u).unwrap();
    let xs: Vec<f64> = (0..=100).map(|i| -0.5 + 0.02 * i as f64).collect();
    let rs: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
    assert!(check_mass_properties(&u, &c, &xs, &rs)
        .unwrap()
        .is_satisfied());
}

#[test]
fn multivariate_designs_are_rejected_by_integral_checks() {
    let u2 = DistributionSpec::uniform(0.0, 1.0, 2);
    let b = QuadratureBudget::default();
    assert!(check_dre_numeric(&u2, &u2, 1.0, &b).is_err());
    assert!(check_pseudo_moment(&u2, 1.0, &b).is_err());
}
