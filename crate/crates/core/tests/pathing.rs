mod common;

use detector_placement::geometry::{Point, Polyline};
use detector_placement::pathing::{all_paths, shortest_path, truncate_path, PathError};
use detector_placement::scenario::{CellId, GridScenario};
use proptest::prelude::*;

/// Single-source distances by repeated edge relaxation.
fn bellman_ford(s: &GridScenario, src: CellId) -> Vec<f64> {
    let n = s.num_cells();
    let open = |r: isize, c: isize| {
        r >= 0
            && c >= 0
            && (r as usize) < s.rows
            && (c as usize) < s.cols
            && !s.is_blocked(s.cell_at(r as usize, c as usize))
    };
    let mut edges = Vec::new();
    for r in 0..s.rows as isize {
        for c in 0..s.cols as isize {
            if !open(r, c) {
                continue;
            }
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if (dr, dc) == (0, 0) || !open(r + dr, c + dc) {
                        continue;
                    }
                    let diag = dr != 0 && dc != 0;
                    if diag && (!open(r + dr, c) || !open(r, c + dc)) {
                        continue;
                    }
                    let w = if diag { s.cell_size_m * 2f64.sqrt() } else { s.cell_size_m };
                    let a = (r as usize) * s.cols + c as usize;
                    let b = ((r + dr) as usize) * s.cols + (c + dc) as usize;
                    edges.push((a, b, w));
                }
            }
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[src.0 - 1] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(a, b, w) in &edges {
            if dist[a] + w < dist[b] - 1e-12 {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

#[test]
fn lengths_match_bellman_ford() {
    let mut rng = common::rng(11);
    for _ in 0..200 {
        let s = common::random_scenario(&mut rng, 8);
        for e in &s.entrances {
            let dist = bellman_ford(&s, *e);
            for t in &s.targets {
                let p = shortest_path(&s, *e, t.cell).unwrap();
                assert!((p.total_length - dist[t.cell.0 - 1]).abs() < 1e-9);

                // The returned route is a legal walk whose steps add up.
                assert_eq!(p.cells.first(), Some(e));
                assert_eq!(p.cells.last(), Some(&t.cell));
                let mut walked = 0.0;
                for w in p.cells.windows(2) {
                    let (r0, c0) = s.row_col(w[0]).unwrap();
                    let (r1, c1) = s.row_col(w[1]).unwrap();
                    let (dr, dc) = (r1 as isize - r0 as isize, c1 as isize - c0 as isize);
                    assert!(dr.abs() <= 1 && dc.abs() <= 1 && (dr, dc) != (0, 0));
                    assert!(!s.is_blocked(w[1]));
                    if dr != 0 && dc != 0 {
                        assert!(!s.is_blocked(s.cell_at(r1, c0)));
                        assert!(!s.is_blocked(s.cell_at(r0, c1)));
                    }
                    walked += s.cell_center(w[0]).unwrap().distance(s.cell_center(w[1]).unwrap());
                }
                assert!((walked - p.total_length).abs() < 1e-9);
                assert!((p.truncated_length - (p.total_length - s.timeliness_buffer()).max(0.0)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn unreachable_and_blocked_endpoints() {
    let mut rng = common::rng(3);
    let mut s = common::random_scenario(&mut rng, 4);
    s.rows = 3;
    s.cols = 3;
    s.entrances = vec![CellId(1)];
    s.targets.truncate(1);
    s.targets[0].cell = CellId(9);
    s.gamma.truncate(1);
    s.gamma[0].entrance = CellId(1);
    s.gamma[0].target = CellId(9);
    s.gamma[0].p = 1.0;
    s.blocked = vec![CellId(6), CellId(8)];
    assert!(matches!(shortest_path(&s, CellId(1), CellId(9)), Err(PathError::NoPath(_))));
    assert!(all_paths(&s).is_err());
    s.blocked = vec![CellId(9)];
    assert!(matches!(
        shortest_path(&s, CellId(1), CellId(9)),
        Err(PathError::BlockedEndpoint(_))
    ));
}

#[test]
fn deterministic_tie_breaking() {
    let mut rng = common::rng(5);
    for _ in 0..50 {
        let s = common::random_scenario(&mut rng, 8);
        assert_eq!(all_paths(&s).unwrap(), all_paths(&s).unwrap());
    }
}

proptest! {
    #[test]
    fn truncation_removes_buffer(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..6),
        buffer in 0.0f64..30.0,
    ) {
        let poly = Polyline::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect());
        let cut = truncate_path(&poly, buffer);
        let kept = (poly.length() - buffer).max(0.0);
        prop_assert!((cut.length() - kept).abs() < 1e-9);
        if kept > 0.0 {
            prop_assert_eq!(cut.points[0], poly.points[0]);
        }
        prop_assert!((truncate_path(&poly, 0.0).length() - poly.length()).abs() < 1e-12);
    }
}
