//! Expected casualties of a hand-picked placement, route by route.
//!
//!     cargo run --example event_tree_objective

use detector_placement::coverage::build_coverage;
use detector_placement::objective::{expected_casualties, paper_objective, Placement};
use detector_placement::pathing::all_paths;
use detector_placement::scenario::parse_scenario;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/base_case.json");
    let s = parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap();
    let cov = build_coverage(&s, &all_paths(&s).unwrap());

    // The two lowest-numbered primary candidates and the highest secondary one.
    let primary = cov.candidates_primary.iter().copied().take(2);
    let secondary = cov.candidates_secondary.iter().rev().copied().take(1);
    let placements = [
        ("nothing", Placement::default()),
        ("primary only", Placement::new(primary.clone(), [])),
        ("both layers", Placement::new(primary, secondary)),
    ];

    for (name, pl) in placements {
        let b = expected_casualties(&s, &cov, &pl).unwrap();
        println!("{name}: {pl}");
        for t in &b.pairs {
            println!(
                "  ({}, {}): Q_p {:.4}  Q_s {:.4}  success {:.4}  casualties {:.4}",
                t.entrance,
                t.target,
                t.miss_primary,
                t.miss_secondary,
                t.success_factor,
                t.expected_casualties_term
            );
        }
        let shifted = paper_objective(&s, &cov, &pl).unwrap();
        println!(
            "  total {:.6}; minimization form {:.6} (differs by (1 - theta1) * sum = {:.6})\n",
            b.expected_casualties,
            shifted,
            b.expected_casualties - shifted
        );
    }
}
