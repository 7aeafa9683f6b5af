//! Parse a scenario document, validate it, and show what a broken one reports.
//!
//!     cargo run --example scenario_validation [scenario.json]

use detector_placement::scenario::{parse_scenario, validate_scenario};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/base_case.json").into());
    let text = std::fs::read_to_string(&path).expect("readable scenario");
    let s = parse_scenario(&text).expect("well-formed scenario");

    println!(
        "{path}: {}x{} grid, {} blocked, {} entrances, {} targets",
        s.rows,
        s.cols,
        s.blocked.len(),
        s.entrances.len(),
        s.targets.len()
    );
    println!("undefended expected casualties: {:.4}", s.undefended_casualties());
    println!("primary detectors affordable:   {}", s.primary.max_count());
    println!("secondary detectors affordable: {}", s.secondary.max_count());
    println!("violations: {}", validate_scenario(&s).violations.len());

    // Break it: attack probabilities no longer sum to one, and a target is walled in.
    let mut bad = s.clone();
    bad.gamma[0].p -= 0.02;
    let target = bad.targets[0].cell;
    let (r, c) = bad.row_col(target).unwrap();
    for (dr, dc) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
        let (nr, nc) = (r as isize + dr, c as isize + dc);
        if nr >= 0 && nc >= 0 && (nr as usize) < bad.rows && (nc as usize) < bad.cols {
            let cell = bad.cell_at(nr as usize, nc as usize);
            if !bad.entrances.contains(&cell) && !bad.targets.iter().any(|t| t.cell == cell) {
                bad.blocked.push(cell);
            }
        }
    }
    bad.blocked.sort();
    bad.blocked.dedup();
    println!("\nafter walling in target {target} and skewing gamma:");
    for v in validate_scenario(&bad).violations {
        println!("  {:?}: {}", v.kind, v.message);
    }

    // Index errors are caught while parsing.
    let oob = text.replacen("\"blocked\": [", "\"blocked\": [0, ", 1);
    if let Err(e) = parse_scenario(&oob) {
        println!("\nparse error: {e}");
    }
}
