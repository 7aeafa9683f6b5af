//! Problem instances: the gridded threat area, its cell classes, the attack
//! distribution over entrance/target pairs, and the two detector layers.
//!
//! Cells are numbered row-major starting at 1, so a grid with `rows × cols`
//! cells uses indices `1..=rows*cols`. Row 0 sits at the smallest `y`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::pathing;

/// Tolerance on the unit sum of the attack distribution.
pub const GAMMA_SUM_TOLERANCE: f64 = 1e-9;

/// 1-based, row-major cell index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub usize);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An entrance/target pair `(e, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub entrance: CellId,
    pub target: CellId,
}

impl Pair {
    pub fn new(entrance: CellId, target: CellId) -> Self {
        Self { entrance, target }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.entrance, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub cell: CellId,
    /// Expected casualties if an attack on this cell succeeds.
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaEntry {
    pub entrance: CellId,
    pub target: CellId,
    pub p: f64,
}

/// Effective radius, detection rate, unit cost and budget of one detector layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub alpha_m: f64,
    pub beta_per_m: f64,
    pub psi: f64,
    pub budget: f64,
}

impl DetectorSpec {
    /// Largest count `n` with `n * psi <= budget`, evaluated in `f64`.
    pub fn max_count(&self) -> usize {
        if !(self.psi > 0.0) || !(self.budget >= 0.0) {
            return 0;
        }
        let mut n = (self.budget / self.psi).floor().max(0.0) as usize;
        while n > 0 && n as f64 * self.psi > self.budget {
            n -= 1;
        }
        while ((n + 1) as f64) * self.psi <= self.budget {
            n += 1;
        }
        n
    }

    /// Whether `count` detectors fit in the budget.
    pub fn affords(&self, count: usize) -> bool {
        count as f64 * self.psi <= self.budget
    }
}

/// A complete problem instance.
///
/// The struct doubles as the on-disk JSON document; see [`parse_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridScenario {
    pub rows: usize,
    pub cols: usize,
    pub cell_size_m: f64,
    pub blocked: Vec<CellId>,
    pub entrances: Vec<CellId>,
    pub targets: Vec<Target>,
    pub gamma: Vec<GammaEntry>,
    pub speed_k_mps: f64,
    pub response_time_chi_s: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub primary: DetectorSpec,
    pub secondary: DetectorSpec,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: index {index} out of range 1..={max}")]
    IndexOutOfRange {
        field: &'static str,
        index: usize,
        max: usize,
    },
    #[error("cell index {0} out of range")]
    CellOutOfRange(usize),
}

/// Parses a scenario document.
///
/// Only syntax, schema and index ranges are checked here; semantic checks
/// live in [`validate_scenario`].
pub fn parse_scenario(text: &str) -> Result<GridScenario, ScenarioError> {
    let scenario: GridScenario =
        serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    scenario.check_indices()?;
    Ok(scenario)
}

impl GridScenario {
    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    fn check_indices(&self) -> Result<(), ScenarioError> {
        let max = self.num_cells();
        let check = |field: &'static str, c: CellId| {
            if c.0 == 0 || c.0 > max {
                Err(ScenarioError::IndexOutOfRange {
                    field,
                    index: c.0,
                    max,
                })
            } else {
                Ok(())
            }
        };
        self.blocked.iter().try_for_each(|&c| check("blocked", c))?;
        self.entrances
            .iter()
            .try_for_each(|&c| check("entrances", c))?;
        self.targets
            .iter()
            .try_for_each(|t| check("targets", t.cell))?;
        for g in &self.gamma {
            check("gamma.entrance", g.entrance)?;
            check("gamma.target", g.target)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// `(row, col)`, both 0-based.
    pub fn row_col(&self, cell: CellId) -> Result<(usize, usize), ScenarioError> {
        if cell.0 == 0 || cell.0 > self.num_cells() {
            return Err(ScenarioError::CellOutOfRange(cell.0));
        }
        let k = cell.0 - 1;
        Ok((k / self.cols, k % self.cols))
    }

    pub fn cell_at(&self, row: usize, col: usize) -> CellId {
        CellId(row * self.cols + col + 1)
    }

    /// Center of a cell in meters.
    pub fn cell_center(&self, cell: CellId) -> Result<Point, ScenarioError> {
        let (r, c) = self.row_col(cell)?;
        Ok(Point::new(
            (c as f64 + 0.5) * self.cell_size_m,
            (r as f64 + 0.5) * self.cell_size_m,
        ))
    }

    pub fn blocked_set(&self) -> BTreeSet<CellId> {
        self.blocked.iter().copied().collect()
    }

    pub fn is_blocked(&self, cell: CellId) -> bool {
        self.blocked.contains(&cell)
    }

    /// Unblocked cells (set U) in index order.
    pub fn unblocked_cells(&self) -> Vec<CellId> {
        let blocked = self.blocked_set();
        (1..=self.num_cells())
            .map(CellId)
            .filter(|c| !blocked.contains(c))
            .collect()
    }

    pub fn zeta(&self, target: CellId) -> Option<f64> {
        self.targets.iter().find(|t| t.cell == target).map(|t| t.zeta)
    }

    /// Attack probabilities keyed by pair. Duplicate entries are summed.
    pub fn gamma_map(&self) -> BTreeMap<Pair, f64> {
        let mut map = BTreeMap::new();
        for g in &self.gamma {
            *map.entry(Pair::new(g.entrance, g.target)).or_insert(0.0) += g.p;
        }
        map
    }

    /// Pairs with positive attack probability, in index order.
    pub fn active_pairs(&self) -> Vec<Pair> {
        self.gamma_map()
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .map(|(pair, _)| pair)
            .collect()
    }

    /// Distance buffer `k·χ*` that primary detection must leave before the target.
    pub fn timeliness_buffer(&self) -> f64 {
        self.speed_k_mps * self.response_time_chi_s
    }

    /// `Σ ζ_j·γ_ej` over all pairs: expected casualties with no detectors.
    pub fn undefended_casualties(&self) -> f64 {
        self.gamma_map()
            .into_iter()
            .map(|(pair, p)| p * self.zeta(pair.target).unwrap_or(0.0))
            .sum()
    }
}

/// One invariant violation found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    GridShape,
    CellSize,
    DuplicateCell,
    OverlappingClasses,
    Casualties,
    GammaEntry,
    GammaSum,
    Theta,
    Behavior,
    Detector,
    UnreachablePair,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            message: message.into(),
        });
    }
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Checks every semantic invariant of a parsed scenario.
pub fn validate_scenario(s: &GridScenario) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();

    if s.rows == 0 || s.cols == 0 {
        report.push(GridShape, format!("grid {}x{} has no cells", s.rows, s.cols));
    }
    if !(s.cell_size_m.is_finite() && s.cell_size_m > 0.0) {
        report.push(CellSize, format!("cell size {} must be > 0", s.cell_size_m));
    }

    // Each class is duplicate-free and the three classes are disjoint.
    let mut owner: BTreeMap<CellId, &'static str> = BTreeMap::new();
    let classes: [(&'static str, Vec<CellId>); 3] = [
        ("blocked", s.blocked.clone()),
        ("entrance", s.entrances.clone()),
        ("target", s.targets.iter().map(|t| t.cell).collect()),
    ];
    for (name, cells) in &classes {
        let mut seen = BTreeSet::new();
        for &c in cells {
            if !seen.insert(c) {
                report.push(DuplicateCell, format!("{name} cell {c} listed twice"));
                continue;
            }
            if let Some(prev) = owner.insert(c, name) {
                report.push(
                    OverlappingClasses,
                    format!("cell {c} is both {prev} and {name}"),
                );
            }
        }
    }

    for t in &s.targets {
        if !finite_nonneg(t.zeta) {
            report.push(Casualties, format!("target {} has zeta {} < 0", t.cell, t.zeta));
        }
    }

    let entrances: BTreeSet<CellId> = s.entrances.iter().copied().collect();
    let targets: BTreeSet<CellId> = s.targets.iter().map(|t| t.cell).collect();
    let mut seen_pairs = BTreeSet::new();
    let mut sum = 0.0;
    for g in &s.gamma {
        let pair = Pair::new(g.entrance, g.target);
        if !entrances.contains(&g.entrance) {
            report.push(GammaEntry, format!("gamma entry {pair}: {} is not an entrance", g.entrance));
        }
        if !targets.contains(&g.target) {
            report.push(GammaEntry, format!("gamma entry {pair}: {} is not a target", g.target));
        }
        if !finite_nonneg(g.p) {
            report.push(GammaEntry, format!("gamma entry {pair}: probability {} < 0", g.p));
        }
        if !seen_pairs.insert(pair) {
            report.push(GammaEntry, format!("gamma entry {pair} listed twice"));
        }
        sum += g.p;
    }
    if !((sum - 1.0).abs() <= GAMMA_SUM_TOLERANCE) {
        report.push(GammaSum, format!("gamma sum {sum} ≠ 1"));
    }

    let theta_ok = [s.theta1, s.theta2].iter().all(|t| (0.0..=1.0).contains(t));
    if !theta_ok || s.theta2 > s.theta1 {
        report.push(
            Theta,
            format!(
                "thetas must satisfy 0 <= theta2 <= theta1 <= 1 (theta1 = {}, theta2 = {})",
                s.theta1, s.theta2
            ),
        );
    }

    if !(s.speed_k_mps.is_finite() && s.speed_k_mps > 0.0) {
        report.push(Behavior, format!("speed {} must be > 0", s.speed_k_mps));
    }
    if !finite_nonneg(s.response_time_chi_s) {
        report.push(Behavior, format!("response time {} must be >= 0", s.response_time_chi_s));
    }

    for (layer, d) in [("primary", &s.primary), ("secondary", &s.secondary)] {
        if !(d.alpha_m.is_finite() && d.alpha_m > 0.0) {
            report.push(Detector, format!("{layer} radius {} must be > 0", d.alpha_m));
        }
        if !finite_nonneg(d.beta_per_m) {
            report.push(Detector, format!("{layer} rate {} must be >= 0", d.beta_per_m));
        }
        if !(d.psi.is_finite() && d.psi > 0.0) {
            report.push(Detector, format!("{layer} unit cost {} must be > 0", d.psi));
        }
        if !finite_nonneg(d.budget) {
            report.push(Detector, format!("{layer} budget {} must be >= 0", d.budget));
        }
    }

    // Reachability only makes sense on a well-formed grid.
    if s.rows > 0 && s.cols > 0 {
        let blocked = s.blocked_set();
        for (pair, p) in s.gamma_map() {
            if p <= 0.0 || blocked.contains(&pair.entrance) || blocked.contains(&pair.target) {
                if p > 0.0 {
                    report.push(UnreachablePair, format!("unreachable pair {pair}"));
                }
                continue;
            }
            if pathing::shortest_path(s, pair.entrance, pair.target).is_err() {
                report.push(UnreachablePair, format!("unreachable pair {pair}"));
            }
        }
    }

    report
}
