//! Detection-radius sweep comparing two layers with a primary layer alone.
//!
//!     cargo run --release --example layer_sweep

use detector_placement::cli::{run_sweep, sweep_csv_line, sweep_violations, SolverArgs, SweepMode, SweepParam, SWEEP_HEADER};
use detector_placement::scenario::parse_scenario;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/blocked_center.json");
    let s = parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap();
    let args = SolverArgs {
        gap: 1e-9,
        node_limit: 1_000_000,
        time_limit: None,
        partitions: 4,
        tangents: 4,
        trace: false,
        threads: 1,
    };
    let values = [0.3, 0.5, 0.7, 0.9, 1.2, 1.5];
    for param in [SweepParam::AlphaP, SweepParam::AlphaS] {
        let rows = run_sweep(&s, param, &values, SweepMode::Both, &args, &mut std::io::sink());
        println!("{SWEEP_HEADER}");
        for row in &rows {
            println!("{}", sweep_csv_line(param, row));
        }
        let problems = sweep_violations(&rows, args.gap);
        println!("monotonicity violations: {}\n", problems.len());
    }
}
