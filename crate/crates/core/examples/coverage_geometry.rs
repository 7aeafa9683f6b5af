//! Chord lengths of path segments through detection disks, and the
//! detection probabilities they produce.
//!
//!     cargo run --example coverage_geometry

use detector_placement::coverage::{build_coverage, detection_prob, segment_circle_chord};
use detector_placement::geometry::Point;
use detector_placement::pathing::all_paths;
use detector_placement::scenario::parse_scenario;

fn main() {
    let c = Point::new(0.0, 0.0);
    let cases = [
        ("through the center", Point::new(-2.0, 0.0), Point::new(2.0, 0.0)),
        ("offset by 0.6", Point::new(-2.0, 0.6), Point::new(2.0, 0.6)),
        ("tangent", Point::new(-2.0, 1.0), Point::new(2.0, 1.0)),
        ("starts inside", Point::new(0.0, 0.0), Point::new(3.0, 0.0)),
        ("ends on the circle", Point::new(-3.0, 0.0), Point::new(-1.0, 0.0)),
        ("misses", Point::new(-2.0, 1.5), Point::new(2.0, 1.5)),
    ];
    println!("unit disk at the origin:");
    for (name, a, b) in cases {
        println!("  {name:<20} chord {:.6}", segment_circle_chord(a, b, c, 1.0));
    }

    println!("\nrho = 1 - exp(-beta * l):");
    for l in [0.0, 0.5, 1.0, 2.0, 3.0] {
        println!("  l = {l:.1} m, beta = 1/m -> {:.6}", detection_prob(1.0, l));
    }

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/corridor.json");
    let s = parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap();
    let cov = build_coverage(&s, &all_paths(&s).unwrap());
    println!("\ncorridor, radius {} m:", s.primary.alpha_m);
    for (pair, row) in &cov.pairs {
        for (cell, rho) in &row.primary {
            println!("  {pair} detector at {cell}: rho_p = {rho:.9}");
        }
    }
}
