//! Enumeration and branch-and-bound on the same small instances.
//!
//!     cargo run --example exhaustive_oracle

use detector_placement::coverage::build_coverage;
use detector_placement::pathing::all_paths;
use detector_placement::scenario::parse_scenario;
use detector_placement::solver::{enumerate_optimal, solve_bnb, Budgets, SolveOptions};

fn main() {
    for name in ["tiny", "corridor", "blocked_center"] {
        let path = format!("{}/examples/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let s = parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap();
        let cov = build_coverage(&s, &all_paths(&s).unwrap());
        let budgets = Budgets::from_scenario(&s);

        let exact = enumerate_optimal(&s, &cov, budgets).unwrap();
        let bnb = solve_bnb(&s, &cov, budgets, &SolveOptions::default()).unwrap();
        println!("{name}: |P| = {}, |S| = {}", cov.candidates_primary.len(), cov.candidates_secondary.len());
        println!(
            "  enumeration  {:.9} over {} placements, {}",
            exact.objective, exact.nodes_explored, exact.placement
        );
        println!(
            "  branch&bound {:.9} in {} nodes, {}",
            bnb.objective, bnb.nodes_explored, bnb.placement
        );
    }
}
