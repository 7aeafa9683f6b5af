//! Branch-and-bound on the base case, with a node log summary.
//!
//!     cargo run --release --example branch_and_bound [scenario.json] [threads]

use std::collections::BTreeMap;
use std::time::Instant;

use detector_placement::coverage::build_coverage;
use detector_placement::pathing::all_paths;
use detector_placement::scenario::parse_scenario;
use detector_placement::solver::{solve_bnb_traced, Budgets, SolveOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/base_case.json").into());
    let threads = args.next().and_then(|t| t.parse().ok()).unwrap_or(1);
    let s = parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap();
    let cov = build_coverage(&s, &all_paths(&s).unwrap());
    println!(
        "{} primary and {} secondary candidates",
        cov.candidates_primary.len(),
        cov.candidates_secondary.len()
    );

    let opts = SolveOptions { parallel_nodes: threads, ..SolveOptions::default() };
    let mut outcomes: BTreeMap<&str, u64> = BTreeMap::new();
    let mut root = None;
    let mut deepest = 0;
    let start = Instant::now();
    let r = solve_bnb_traced(&s, &cov, Budgets::from_scenario(&s), &opts, &mut |ev| {
        *outcomes.entry(ev.outcome.as_str()).or_default() += 1;
        root.get_or_insert(ev.bound);
        deepest = deepest.max(ev.node.depth);
    })
    .unwrap();

    println!("status {:?} after {:.2?}", r.status, start.elapsed());
    println!("objective {:.9}, lower bound {:.9}", r.objective, r.lower_bound);
    println!("root bound {:.9}", root.unwrap_or(f64::NAN));
    println!("nodes {} (deepest {deepest}): {outcomes:?}", r.nodes_explored);
    println!("{}", r.placement);
}
