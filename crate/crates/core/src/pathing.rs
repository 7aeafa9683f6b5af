//! Attacker routes: one shortest grid path per active entrance/target pair.
//!
//! Moves are 8-connected between cell centers. A diagonal move is allowed only
//! when both orthogonal cells it passes between are unblocked. Path lengths
//! are tracked exactly as `orth + diag·√2` step counts, so equal-length routes
//! tie exactly and the tie rule (expansion order N, NE, E, SE, S, SW, W, NW,
//! heap order by `(length, cell index)`, predecessor replaced only on strict
//! improvement) is reproducible on every platform.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::Polyline;
use crate::scenario::{CellId, GridScenario, Pair, ScenarioError};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("no path for pair {0}")]
    NoPath(Pair),
    #[error("pair {0} has a blocked endpoint")]
    BlockedEndpoint(Pair),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Exact path length in units of `cell_size`: `orth + diag·√2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCount {
    pub orth: u32,
    pub diag: u32,
}

impl StepCount {
    fn step(self, diagonal: bool) -> Self {
        if diagonal {
            Self { diag: self.diag + 1, ..self }
        } else {
            Self { orth: self.orth + 1, ..self }
        }
    }

    pub fn meters(self, cell_size: f64) -> f64 {
        (self.orth as f64 + self.diag as f64 * std::f64::consts::SQRT_2) * cell_size
    }
}

impl Ord for StepCount {
    fn cmp(&self, other: &Self) -> Ordering {
        // Sign of da + db·√2 with integer arithmetic only.
        let da = self.orth as i64 - other.orth as i64;
        let db = self.diag as i64 - other.diag as i64;
        match (da.signum(), db.signum()) {
            (0, 0) => Ordering::Equal,
            (a, b) if a >= 0 && b >= 0 => Ordering::Greater,
            (a, b) if a <= 0 && b <= 0 => Ordering::Less,
            (1, _) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for StepCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The shortest route the attacker takes for one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreatPath {
    pub entrance: CellId,
    pub target: CellId,
    pub cells: Vec<CellId>,
    #[serde(skip)]
    pub polyline: Polyline,
    pub total_length: f64,
    /// `max(0, total_length - k·χ*)`.
    pub truncated_length: f64,
    #[serde(skip)]
    buffer: f64,
}

impl ThreatPath {
    pub fn pair(&self) -> Pair {
        Pair::new(self.entrance, self.target)
    }

    /// Prefix on which primary detection still leaves the response buffer.
    pub fn timely_prefix(&self) -> Polyline {
        truncate_path(&self.polyline, self.buffer)
    }
}

// (drow, dcol) in expansion order N, NE, E, SE, S, SW, W, NW.
const NEIGHBORS: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Minimum-length route from `entrance` to `target` over unblocked cells.
pub fn shortest_path(
    s: &GridScenario,
    entrance: CellId,
    target: CellId,
) -> Result<ThreatPath, PathError> {
    let pair = Pair::new(entrance, target);
    s.row_col(entrance)?;
    s.row_col(target)?;
    let n = s.num_cells();
    let mut blocked = vec![false; n];
    for c in &s.blocked {
        if let Some(slot) = blocked.get_mut(c.0.wrapping_sub(1)) {
            *slot = true;
        }
    }
    let (src, dst) = (entrance.0 - 1, target.0 - 1);
    if blocked[src] || blocked[dst] {
        return Err(PathError::BlockedEndpoint(pair));
    }

    let (rows, cols) = (s.rows as isize, s.cols as isize);
    let open = |r: isize, c: isize| {
        r >= 0 && r < rows && c >= 0 && c < cols && !blocked[(r * cols + c) as usize]
    };

    let mut dist: Vec<Option<StepCount>> = vec![None; n];
    let mut pred: Vec<usize> = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(StepCount::default());
    heap.push(Reverse((StepCount::default(), src)));

    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == dst {
            break;
        }
        let (r, c) = ((u / s.cols) as isize, (u % s.cols) as isize);
        for (dr, dc) in NEIGHBORS {
            let (nr, nc) = (r + dr, c + dc);
            if !open(nr, nc) {
                continue;
            }
            let diagonal = dr != 0 && dc != 0;
            if diagonal && !(open(r + dr, c) && open(r, c + dc)) {
                continue;
            }
            let v = (nr * cols + nc) as usize;
            if done[v] {
                continue;
            }
            let nd = d.step(diagonal);
            if dist[v].map_or(true, |old| nd < old) {
                dist[v] = Some(nd);
                pred[v] = u;
                heap.push(Reverse((nd, v)));
            }
        }
    }

    let length = dist[dst].filter(|_| done[dst]).ok_or(PathError::NoPath(pair))?;
    let mut idx = vec![dst];
    while *idx.last().unwrap() != src {
        idx.push(pred[*idx.last().unwrap()]);
    }
    idx.reverse();
    let cells: Vec<CellId> = idx.into_iter().map(|k| CellId(k + 1)).collect();
    let points = cells
        .iter()
        .map(|&c| s.cell_center(c))
        .collect::<Result<Vec<_>, _>>()?;
    let total_length = length.meters(s.cell_size_m);
    let buffer = s.timeliness_buffer();
    Ok(ThreatPath {
        entrance,
        target,
        cells,
        polyline: Polyline::new(points),
        total_length,
        truncated_length: (total_length - buffer).max(0.0),
        buffer,
    })
}

/// Prefix of `path` ending `buffer` meters of arc length before its end.
pub fn truncate_path(path: &Polyline, buffer: f64) -> Polyline {
    path.truncate_from_end(buffer)
}

/// Shortest paths for every pair with positive attack probability.
pub fn all_paths(s: &GridScenario) -> Result<BTreeMap<Pair, ThreatPath>, PathError> {
    s.active_pairs()
        .into_par_iter()
        .map(|pair| shortest_path(s, pair.entrance, pair.target).map(|p| (pair, p)))
        .collect::<Result<Vec<_>, _>>()
        .map(|v| v.into_iter().collect())
}
