//! Optimal placement under the budget, exclusion and linking constraints.
//!
//! Two independent routes to the optimum:
//!
//! * [`enumerate_optimal`] walks every feasible placement and is the oracle for
//!   small instances.
//! * [`solve_bnb`] is a best-first branch-and-bound whose node bounds come from
//!   the linear relaxation in [`relaxation`]. Integer leaves are scored with the
//!   exact nonlinear objective.

mod bnb;
mod branch;
mod enumerate;
pub mod model;
pub mod relaxation;

use serde::Serialize;
use thiserror::Error;

use crate::coverage::CoverageTable;
use crate::objective::Placement;
use crate::scenario::GridScenario;

pub use bnb::{NodeEvent, NodeOutcome, NODE_BATCH};
pub use branch::{branch, select_branch, BranchVar};
pub use enumerate::ENUMERATION_LIMIT;
pub use model::{Budgets, PlacementModel};
pub use relaxation::{build_relaxation, interval_bound, Relaxation, RelaxationNode};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Relative optimality gap at which the search stops.
    pub gap_tolerance: f64,
    pub node_limit: u64,
    /// Segments of the piecewise McCormick envelope.
    pub mccormick_partitions: usize,
    /// Tangent cuts per exponential term.
    pub tangent_breakpoints: usize,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Worker threads for node relaxations. Results do not depend on it.
    pub parallel_nodes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-6,
            node_limit: 10_000_000,
            mccormick_partitions: 4,
            tangent_breakpoints: 4,
            time_limit: None,
            parallel_nodes: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    GapReached,
    NodeLimit,
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub placement: Placement,
    /// Expected casualties of `placement`.
    pub objective: f64,
    pub lower_bound: f64,
    pub relative_gap: f64,
    pub nodes_explored: u64,
    pub status: SolveStatus,
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("{candidates} candidate cells exceed the enumeration limit of {limit}")]
    InstanceTooLarge { candidates: usize, limit: usize },
    #[error("invalid solver options: {0}")]
    BadOptions(&'static str),
}

pub(crate) fn relative_gap(objective: f64, lower: f64) -> f64 {
    ((objective - lower) / objective.abs().max(1e-12)).max(0.0)
}

/// Best placement seen so far, with the lexicographic tie rule.
#[derive(Debug, Clone)]
pub(crate) struct Incumbent {
    pub value: f64,
    pub x: Vec<bool>,
    pub y: Vec<bool>,
}

impl Incumbent {
    pub fn empty(model: &PlacementModel) -> Self {
        let x = vec![false; model.num_primary()];
        let y = vec![false; model.num_secondary()];
        Self {
            value: model.evaluate(&x, &y),
            x,
            y,
        }
    }

    fn key(x: &[bool], y: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let ones = |v: &[bool]| v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        (ones(x), ones(y))
    }

    /// Replaces the incumbent if `value` is better, or equal with a smaller
    /// placement. Returns whether it changed.
    pub fn offer(&mut self, _model: &PlacementModel, x: &[bool], y: &[bool], value: f64) -> bool {
        let tol = 1e-12 * self.value.abs().max(1.0);
        let better = value < self.value - tol
            || (value <= self.value + tol && Self::key(x, y) < Self::key(&self.x, &self.y));
        if better {
            self.value = value;
            self.x.copy_from_slice(x);
            self.y.copy_from_slice(y);
        }
        better
    }
}

/// Exhaustive optimum for instances with at most [`ENUMERATION_LIMIT`] candidates.
pub fn enumerate_optimal(
    s: &GridScenario,
    cov: &CoverageTable,
    budgets: Budgets,
) -> Result<SolveResult, SolveError> {
    enumerate::enumerate(&PlacementModel::new(s, cov, budgets))
}

/// Branch-and-bound optimum.
pub fn solve_bnb(
    s: &GridScenario,
    cov: &CoverageTable,
    budgets: Budgets,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    bnb::solve(&PlacementModel::new(s, cov, budgets), opts, &mut |_| {})
}

/// [`solve_bnb`] reporting every processed node to `trace`, in a fixed order.
pub fn solve_bnb_traced(
    s: &GridScenario,
    cov: &CoverageTable,
    budgets: Budgets,
    opts: &SolveOptions,
    trace: &mut dyn FnMut(&NodeEvent),
) -> Result<SolveResult, SolveError> {
    bnb::solve(&PlacementModel::new(s, cov, budgets), opts, trace)
}

/// Lower bound on expected casualties over all completions of `node`.
pub fn node_lower_bound(model: &PlacementModel, node: &RelaxationNode, opts: &SolveOptions) -> f64 {
    bnb::evaluate_node(model, node, opts).bound
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::coverage::PairCoverage;
    use crate::scenario::{CellId, DetectorSpec, GammaEntry, Pair, Target};

    const RHO: f64 = 0.950212932;

    fn corridor(primary_count: f64, secondary_count: f64) -> (GridScenario, CoverageTable) {
        let spec = |budget| DetectorSpec { alpha_m: 1.5, beta_per_m: 1.0, psi: 1.0, budget };
        let s = GridScenario {
            rows: 1,
            cols: 5,
            cell_size_m: 1.0,
            blocked: vec![],
            entrances: vec![CellId(1)],
            targets: vec![Target { cell: CellId(5), zeta: 10.0 }],
            gamma: vec![GammaEntry { entrance: CellId(1), target: CellId(5), p: 1.0 }],
            speed_k_mps: 1.0,
            response_time_chi_s: 0.0,
            theta1: 0.9,
            theta2: 0.6,
            primary: spec(primary_count),
            secondary: spec(secondary_count),
        };
        let both: BTreeSet<CellId> = [CellId(2), CellId(3)].into();
        let row = PairCoverage {
            primary: both.iter().map(|&c| (c, RHO)).collect(),
            secondary: both.iter().map(|&c| (c, RHO)).collect(),
        };
        let mut cov = CoverageTable::default();
        cov.pairs.insert(Pair::new(CellId(1), CellId(5)), row);
        cov.candidates_primary = both.clone();
        cov.candidates_secondary = both;
        (s, cov)
    }

    #[test]
    fn corridor_optimum() {
        let (s, cov) = corridor(1.0, 1.0);
        let budgets = Budgets::from_scenario(&s);
        let expect = 10.0 * (1.0 - 0.9 * RHO * RHO - 0.6 * (1.0 - RHO) * RHO);
        let exact = enumerate_optimal(&s, &cov, budgets).unwrap();
        assert!((exact.objective - expect).abs() < 1e-12);
        assert_eq!(exact.placement, Placement::new([CellId(2)], [CellId(3)]));
        assert_eq!(exact.status, SolveStatus::Optimal);
        // 1 empty + 2 primary-only + 2 with a secondary on the other cell
        assert_eq!(exact.nodes_explored, 5);

        let bnb = solve_bnb(&s, &cov, budgets, &SolveOptions::default()).unwrap();
        assert!((bnb.objective - expect).abs() < 1e-12);
        assert_eq!(bnb.placement, exact.placement);
    }

    #[test]
    fn zero_primary_budget_places_nothing() {
        let (s, cov) = corridor(0.5, 3.0);
        let budgets = Budgets::from_scenario(&s);
        for r in [
            enumerate_optimal(&s, &cov, budgets).unwrap(),
            solve_bnb(&s, &cov, budgets, &SolveOptions::default()).unwrap(),
        ] {
            assert!(r.placement.is_empty());
            assert_eq!(r.objective, 10.0);
        }
    }

    #[test]
    fn empty_candidates() {
        let (s, mut cov) = corridor(1.0, 1.0);
        cov.candidates_primary.clear();
        cov.candidates_secondary.clear();
        cov.pairs.values_mut().for_each(|r| *r = PairCoverage::default());
        let budgets = Budgets::from_scenario(&s);
        let bnb = solve_bnb(&s, &cov, budgets, &SolveOptions::default()).unwrap();
        assert_eq!(bnb, enumerate_optimal(&s, &cov, budgets).unwrap());
        assert_eq!(bnb.objective, 10.0);
    }

    #[test]
    fn rejects_bad_options() {
        let (s, cov) = corridor(1.0, 1.0);
        let budgets = Budgets::from_scenario(&s);
        let opts = SolveOptions { gap_tolerance: 0.0, ..SolveOptions::default() };
        assert!(matches!(solve_bnb(&s, &cov, budgets, &opts), Err(SolveError::BadOptions(_))));
        let opts = SolveOptions { mccormick_partitions: 0, ..SolveOptions::default() };
        assert!(matches!(solve_bnb(&s, &cov, budgets, &opts), Err(SolveError::BadOptions(_))));
    }

    fn wide_model() -> PlacementModel {
        let (s, mut cov) = corridor(8.0, 8.0);
        let cells: BTreeSet<CellId> = (0..8).map(CellId).collect();
        let row = PairCoverage {
            primary: cells.iter().map(|&c| (c, 0.5)).collect(),
            secondary: Default::default(),
        };
        cov.pairs.insert(Pair::new(CellId(1), CellId(5)), row);
        cov.candidates_primary = cells;
        cov.candidates_secondary = BTreeSet::new();
        PlacementModel::new(&s, &cov, Budgets::from_scenario(&s))
    }

    #[test]
    fn most_fractional_branching() {
        let model = wide_model();
        let node = RelaxationNode::root(&model);
        let mut x = vec![0.0; 8];
        x[3] = 0.5;
        x[7] = 0.9;
        assert_eq!(select_branch(&model, &node, &x, &[]), Some(BranchVar::Primary(3)));
        let mut x = vec![1.0; 8];
        x[2] = 0.5;
        x[4] = 0.5;
        assert_eq!(select_branch(&model, &node, &x, &[]), Some(BranchVar::Primary(2)));
        assert_eq!(select_branch(&model, &node, &[0.0; 8], &[]), None);

        let kids = branch(&model, &node, BranchVar::Primary(2), 5);
        assert_eq!(kids.len(), 2);
        assert_eq!((kids[0].id, kids[0].fix_primary[2]), (5, Some(false)));
        assert_eq!((kids[1].id, kids[1].fix_primary[2]), (6, Some(true)));
    }

    #[test]
    fn fixed_relaxation_is_exact() {
        let (s, cov) = corridor(1.0, 1.0);
        let model = PlacementModel::new(&s, &cov, Budgets::from_scenario(&s));
        let opts = SolveOptions::default();
        for (x, y) in [
            (vec![false, false], vec![false, false]),
            (vec![true, false], vec![false, false]),
            (vec![true, false], vec![false, true]),
            (vec![false, true], vec![true, false]),
        ] {
            let mut node = RelaxationNode::root(&model);
            node.fix_primary = x.iter().map(|&b| Some(b)).collect();
            node.fix_secondary = y.iter().map(|&b| Some(b)).collect();
            let bound = node_lower_bound(&model, &node, &opts);
            assert!((bound - model.evaluate(&x, &y)).abs() < 1e-7, "{x:?} {y:?}");
        }
    }
}
