//! Shortest attacker routes and their timely prefixes.
//!
//!     cargo run --example threat_paths [scenario.json]

use detector_placement::pathing::all_paths;
use detector_placement::scenario::{parse_scenario, CellId};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/base_case.json").into());
    let s = parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap();
    let paths = all_paths(&s).unwrap();

    println!(
        "response buffer k*chi = {:.2} m (speed {} m/s, response {} s)\n",
        s.timeliness_buffer(),
        s.speed_k_mps,
        s.response_time_chi_s
    );
    for p in paths.values() {
        let cells: Vec<String> = p.cells.iter().map(|c| c.to_string()).collect();
        println!("{}: {}", p.pair(), cells.join(" -> "));
        println!(
            "    length {:.3} m, primary alarms useful on the first {:.3} m",
            p.total_length, p.truncated_length
        );
    }

    // Render the grid with the routes drawn in.
    let on_path: std::collections::BTreeSet<CellId> =
        paths.values().flat_map(|p| p.cells.iter().copied()).collect();
    println!();
    for r in 0..s.rows {
        let line: String = (0..s.cols)
            .map(|c| {
                let cell = s.cell_at(r, c);
                if s.is_blocked(cell) {
                    '#'
                } else if s.entrances.contains(&cell) {
                    'E'
                } else if s.zeta(cell).is_some() {
                    'T'
                } else if on_path.contains(&cell) {
                    '*'
                } else {
                    '.'
                }
            })
            .collect();
        println!("{line}");
    }
}
