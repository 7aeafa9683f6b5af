//! Detector coverage of attacker routes.
//!
//! A detector at cell `i` sees the portion of a route inside the closed disk of
//! its effective radius around the cell center. With detection rate `β` per
//! meter and exposure `l`, it detects with probability `1 - exp(-β·l)`.
//! Primary detectors only count exposure on the timely prefix of the route;
//! secondary detectors count the whole route.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::geometry::{Point, Polyline};
use crate::pathing::ThreatPath;
use crate::scenario::{CellId, DetectorSpec, GridScenario, Pair};

/// Exposure at or below this many meters is treated as no coverage.
pub const EXPOSURE_EPSILON: f64 = 1e-9;

/// Length of the part of segment `p0 -> p1` inside the closed disk.
///
/// Solves the line/circle quadratic and clamps the two roots to the segment
/// parameter range `[0, 1]`. Tangent and degenerate segments give 0.
pub fn segment_circle_chord(p0: Point, p1: Point, center: Point, radius: f64) -> f64 {
    let (dx, dy) = (p1.x - p0.x, p1.y - p0.y);
    let (fx, fy) = (p0.x - center.x, p0.y - center.y);
    let a = dx * dx + dy * dy;
    if !(a > 0.0) || !(radius > 0.0) {
        return 0.0;
    }
    let half_b = fx * dx + fy * dy;
    let c = fx * fx + fy * fy - radius * radius;
    let disc = half_b * half_b - a * c;
    if !(disc > 0.0) {
        return 0.0;
    }
    let root = disc.sqrt();
    let t0 = ((-half_b - root) / a).clamp(0.0, 1.0);
    let t1 = ((-half_b + root) / a).clamp(0.0, 1.0);
    ((t1 - t0) * a.sqrt()).max(0.0)
}

/// Total length of `polyline` inside the detector disk.
pub fn path_exposure(polyline: &Polyline, center: Point, radius: f64) -> f64 {
    polyline
        .segments()
        .map(|(a, b)| segment_circle_chord(a, b, center, radius))
        .sum()
}

/// `1 - exp(-beta·l)`, computed without cancellation for small products.
pub fn detection_prob(beta: f64, exposure: f64) -> f64 {
    -(-beta * exposure).exp_m1()
}

/// Detection probabilities of both layers for one route.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairCoverage {
    /// `ρ_iej` keyed by cell; the keys form `N_e^p(j)`.
    pub primary: BTreeMap<CellId, f64>,
    /// `ρ_i'ej` keyed by cell; the keys form `N_e^s(j)`.
    pub secondary: BTreeMap<CellId, f64>,
}

/// Detection probabilities, eligibility sets and candidate sets.
///
/// Only strictly positive probabilities are stored; a missing key means 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverageTable {
    pub pairs: BTreeMap<Pair, PairCoverage>,
    /// `P`: union of the primary eligibility sets.
    pub candidates_primary: BTreeSet<CellId>,
    /// `S`: union of the secondary eligibility sets.
    pub candidates_secondary: BTreeSet<CellId>,
}

impl CoverageTable {
    pub fn rho_primary(&self, cell: CellId, pair: Pair) -> f64 {
        self.pairs
            .get(&pair)
            .and_then(|p| p.primary.get(&cell).copied())
            .unwrap_or(0.0)
    }

    pub fn rho_secondary(&self, cell: CellId, pair: Pair) -> f64 {
        self.pairs
            .get(&pair)
            .and_then(|p| p.secondary.get(&cell).copied())
            .unwrap_or(0.0)
    }

    pub fn eligible_primary(&self, pair: Pair) -> impl Iterator<Item = CellId> + '_ {
        self.pairs.get(&pair).into_iter().flat_map(|p| p.primary.keys().copied())
    }

    pub fn eligible_secondary(&self, pair: Pair) -> impl Iterator<Item = CellId> + '_ {
        self.pairs.get(&pair).into_iter().flat_map(|p| p.secondary.keys().copied())
    }

    /// Sorted-key JSON view, with cells as string keys.
    pub fn to_json_value(&self) -> serde_json::Value {
        use serde_json::{json, Map, Value};
        let layer = |m: &BTreeMap<CellId, f64>| {
            Value::Object(m.iter().map(|(c, r)| (c.to_string(), json!(r))).collect::<Map<_, _>>())
        };
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|(pair, cov)| {
                json!({
                    "entrance": pair.entrance,
                    "target": pair.target,
                    "rho_primary": layer(&cov.primary),
                    "rho_secondary": layer(&cov.secondary),
                })
            })
            .collect();
        json!({
            "pairs": pairs,
            "candidates_primary": self.candidates_primary,
            "candidates_secondary": self.candidates_secondary,
        })
    }
}

fn layer_rho(route: &Polyline, center: Point, spec: &DetectorSpec) -> Option<f64> {
    if route.is_empty() {
        return None;
    }
    let l = path_exposure(route, center, spec.alpha_m);
    if l <= EXPOSURE_EPSILON {
        return None;
    }
    let rho = detection_prob(spec.beta_per_m, l);
    (rho > 0.0).then_some(rho)
}

/// Evaluates every unblocked cell against every route.
pub fn build_coverage(s: &GridScenario, paths: &BTreeMap<Pair, ThreatPath>) -> CoverageTable {
    let cells: Vec<(CellId, Point)> = s
        .unblocked_cells()
        .into_iter()
        .map(|c| (c, s.cell_center(c).expect("cell in range")))
        .collect();

    let pairs: BTreeMap<Pair, PairCoverage> = paths
        .par_iter()
        .map(|(&pair, path)| {
            let prefix = path.timely_prefix();
            let mut cov = PairCoverage::default();
            for &(cell, center) in &cells {
                if let Some(rho) = layer_rho(&prefix, center, &s.primary) {
                    cov.primary.insert(cell, rho);
                }
                if let Some(rho) = layer_rho(&path.polyline, center, &s.secondary) {
                    cov.secondary.insert(cell, rho);
                }
            }
            (pair, cov)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();

    let candidates_primary = pairs.values().flat_map(|p| p.primary.keys().copied()).collect();
    let candidates_secondary = pairs.values().flat_map(|p| p.secondary.keys().copied()).collect();
    CoverageTable {
        pairs,
        candidates_primary,
        candidates_secondary,
    }
}
