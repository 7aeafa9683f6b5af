mod common;

use detector_placement::objective::{expected_casualties, paper_objective, Placement};
use detector_placement::scenario::parse_scenario;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_round_trips(seed in any::<u64>()) {
        let s = common::random_scenario(&mut common::rng(seed), 8);
        prop_assert_eq!(parse_scenario(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn adding_a_detector_never_hurts(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 6, 20);
        let (s, cov) = (&inst.scenario, &inst.coverage);
        let (x, y) = common::random_placement(&mut rng, &inst);
        let base = Placement { primary: x.clone(), secondary: y.clone() };
        let before = expected_casualties(s, cov, &base).unwrap().expected_casualties;
        for &c in cov.candidates_primary.difference(&y) {
            let mut more = base.clone();
            more.primary.insert(c);
            let after = expected_casualties(s, cov, &more).unwrap().expected_casualties;
            prop_assert!(after <= before + 1e-12);
        }
        if !x.is_empty() {
            for &c in cov.candidates_secondary.difference(&x) {
                let mut more = base.clone();
                more.secondary.insert(c);
                let after = expected_casualties(s, cov, &more).unwrap().expected_casualties;
                prop_assert!(after <= before + 1e-12);
            }
        }
    }

    #[test]
    fn breakdown_is_consistent(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 6, 20);
        let (s, cov) = (&inst.scenario, &inst.coverage);
        let (x, y) = common::random_placement(&mut rng, &inst);
        let pl = Placement { primary: x, secondary: y };
        let b = expected_casualties(s, cov, &pl).unwrap();
        let total: f64 = b.pairs.iter().map(|t| t.expected_casualties_term).sum();
        prop_assert!((total - b.expected_casualties).abs() < 1e-12);
        prop_assert!(b.expected_casualties <= s.undefended_casualties() + 1e-12);
        prop_assert!(b.expected_casualties >= (1.0 - s.theta1) * s.undefended_casualties() - 1e-12);
        let shift = (1.0 - s.theta1) * s.undefended_casualties();
        let minimized = paper_objective(s, cov, &pl).unwrap();
        prop_assert!((minimized - (b.expected_casualties - shift)).abs() <= 1e-9 * b.expected_casualties.abs().max(1.0));
        prop_assert!((b.paper_objective_value - minimized).abs() <= 1e-12 * minimized.abs().max(1.0));
        for t in &b.pairs {
            prop_assert!((0.0..=1.0).contains(&t.miss_primary));
            prop_assert!((0.0..=1.0).contains(&t.miss_secondary));
        }
    }
}

#[test]
fn monte_carlo_agrees() {
    let mut rng = common::rng(17);
    for _ in 0..3 {
        let inst = common::random_instance(&mut rng, 6, 16);
        let (x, y) = common::random_placement(&mut rng, &inst);
        let pl = Placement { primary: x, secondary: y };
        let exact = expected_casualties(&inst.scenario, &inst.coverage, &pl).unwrap().expected_casualties;
        let (mean, se) = common::monte_carlo(&inst.scenario, &inst.coverage, &pl, 200_000, &mut rng);
        assert!((mean - exact).abs() <= 4.0 * se + 1e-9 * exact, "{mean} ± {se} vs {exact}");
    }
}
