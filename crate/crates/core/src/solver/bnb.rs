use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;

use crate::lp::{lp_solve, LpError};

use super::branch::{branch, select_branch, select_free, BranchVar, INTEGRALITY_TOL};
use super::model::PlacementModel;
use super::relaxation::{build_relaxation, interval_bound, RelaxationNode};
use super::{relative_gap, Incumbent, SolveError, SolveOptions, SolveResult, SolveStatus};

/// Nodes whose relaxations are solved per round. Fixed so the search order,
/// and therefore the result, does not depend on the thread count.
pub const NODE_BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOutcome {
    /// Bound no better than the incumbent.
    Pruned,
    /// Fixings admit no feasible placement.
    Infeasible,
    /// LP point integral and tight; subtree closed.
    Integral,
    /// Split into children.
    Branched,
}

impl NodeOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeOutcome::Pruned => "pruned",
            NodeOutcome::Infeasible => "infeasible",
            NodeOutcome::Integral => "integral",
            NodeOutcome::Branched => "branched",
        }
    }
}

#[derive(Debug)]
pub struct NodeEvent<'a> {
    pub node: &'a RelaxationNode,
    pub bound: f64,
    pub outcome: NodeOutcome,
    /// Whether the LP failed and the interval bound was used.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct NodeSolve {
    pub bound: f64,
    /// LP values of the primary and secondary indicators; `None` on fallback
    /// or infeasibility.
    pub values: Option<(Vec<f64>, Vec<f64>)>,
    pub infeasible: bool,
}

pub(crate) fn evaluate_node(
    model: &PlacementModel,
    node: &RelaxationNode,
    opts: &SolveOptions,
) -> NodeSolve {
    let relax = build_relaxation(model, node, opts);
    match lp_solve(&relax.lp) {
        Ok(sol) => {
            let pick = |vars: &[usize]| vars.iter().map(|&j| sol.values[j]).collect::<Vec<_>>();
            NodeSolve {
                bound: node.bound.max(sol.dual_bound + relax.offset),
                values: Some((pick(&relax.primary_vars), pick(&relax.secondary_vars))),
                infeasible: false,
            }
        }
        Err(LpError::Infeasible) => NodeSolve {
            bound: f64::INFINITY,
            values: None,
            infeasible: true,
        },
        Err(_) => NodeSolve {
            bound: node.bound.max(interval_bound(model, node)),
            values: None,
            infeasible: false,
        },
    }
}

struct Queued(RelaxationNode);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // Max-heap: the smallest bound, then the smallest id, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

/// Greedy start: best primary/secondary pair, then single additions while
/// they improve the objective.
fn greedy(model: &PlacementModel, inc: &mut Incumbent) {
    let (np, ns) = (model.num_primary(), model.num_secondary());
    if model.max_primary == 0 || model.max_secondary == 0 {
        return;
    }
    let mut x = vec![false; np];
    let mut y = vec![false; ns];
    let mut value = model.evaluate(&x, &y);
    loop {
        let mut best: Option<(f64, Vec<bool>, Vec<bool>)> = None;
        let mut consider = |cx: Vec<bool>, cy: Vec<bool>| {
            if !model.is_feasible(&cx, &cy) {
                return;
            }
            let v = model.evaluate(&cx, &cy);
            if v < value - 1e-12 && best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, cx, cy));
            }
        };
        if !x.iter().any(|&b| b) {
            for i in 0..np {
                for k in 0..ns {
                    let (mut cx, mut cy) = (x.clone(), y.clone());
                    cx[i] = true;
                    cy[k] = true;
                    consider(cx, cy);
                }
            }
        } else {
            for i in (0..np).filter(|&i| !x[i]) {
                let mut cx = x.clone();
                cx[i] = true;
                consider(cx, y.clone());
            }
            for k in (0..ns).filter(|&k| !y[k]) {
                let mut cy = y.clone();
                cy[k] = true;
                consider(x.clone(), cy);
            }
        }
        match best {
            Some((v, bx, by)) => {
                value = v;
                x = bx;
                y = by;
            }
            None => break,
        }
    }
    inc.offer(model, &x, &y, value);
}

/// Indicator vectors of an integral LP point.
fn round(node: &RelaxationNode, primary: &[f64], secondary: &[f64]) -> (Vec<bool>, Vec<bool>) {
    let pick = |fix: &[Option<bool>], vals: &[f64]| {
        fix.iter()
            .zip(vals)
            .map(|(f, &v)| f.unwrap_or(v > 0.5))
            .collect::<Vec<_>>()
    };
    (pick(&node.fix_primary, primary), pick(&node.fix_secondary, secondary))
}

pub(crate) fn solve(
    model: &PlacementModel,
    opts: &SolveOptions,
    trace: &mut dyn FnMut(&super::NodeEvent),
) -> Result<SolveResult, SolveError> {
    if !(opts.gap_tolerance > 0.0) {
        return Err(SolveError::BadOptions("gap tolerance must be positive"));
    }
    if opts.mccormick_partitions == 0 || opts.tangent_breakpoints == 0 {
        return Err(SolveError::BadOptions("partitions and tangents must be at least 1"));
    }
    let start = Instant::now();
    let pool = if opts.parallel_nodes > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallel_nodes)
            .build()
            .ok()
    } else {
        None
    };

    let mut inc = Incumbent::empty(model);
    greedy(model, &mut inc);

    let mut heap = BinaryHeap::new();
    heap.push(Queued(RelaxationNode::root(model)));
    let mut next_id: u64 = 1;
    let mut explored: u64 = 0;
    let mut closed_lb = f64::INFINITY;

    let status = loop {
        // Nodes within a thousandth of the requested gap count as dominated.
        let prune_tol = 1e-3 * opts.gap_tolerance * inc.value.abs().max(1e-12);
        let threshold = inc.value - prune_tol;
        let Some(top) = heap.peek() else {
            break SolveStatus::Optimal;
        };
        if top.0.bound >= threshold {
            closed_lb = closed_lb.min(top.0.bound);
            heap.clear();
            break SolveStatus::Optimal;
        }
        if relative_gap(inc.value, top.0.bound) <= opts.gap_tolerance {
            break SolveStatus::GapReached;
        }
        if explored >= opts.node_limit {
            break SolveStatus::NodeLimit;
        }
        if opts.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t) {
            break SolveStatus::TimeLimit;
        }

        let take = NODE_BATCH.min((opts.node_limit - explored) as usize);
        let mut batch = Vec::with_capacity(take);
        while batch.len() < take {
            match heap.peek() {
                Some(q) if q.0.bound < threshold => batch.push(heap.pop().unwrap().0),
                _ => break,
            }
        }
        let solves: Vec<NodeSolve> = match &pool {
            Some(pool) => pool.install(|| {
                batch
                    .par_iter()
                    .map(|n| evaluate_node(model, n, opts))
                    .collect()
            }),
            None => batch.iter().map(|n| evaluate_node(model, n, opts)).collect(),
        };

        for (node, sol) in batch.into_iter().zip(solves) {
            explored += 1;
            let fallback = sol.values.is_none() && !sol.infeasible;
            let mut emit = |outcome, bound| {
                trace(&super::NodeEvent { node: &node, bound, outcome, fallback })
            };
            if sol.infeasible {
                emit(NodeOutcome::Infeasible, sol.bound);
                continue;
            }
            let prune_tol = 1e-3 * opts.gap_tolerance * inc.value.abs().max(1e-12);
            if sol.bound >= inc.value - prune_tol {
                closed_lb = closed_lb.min(sol.bound);
                emit(NodeOutcome::Pruned, sol.bound);
                continue;
            }

            let zeros = || (vec![0.0; model.num_primary()], vec![0.0; model.num_secondary()]);
            let (xv, yv) = sol.values.clone().unwrap_or_else(zeros);
            let mut split: Option<BranchVar> = None;
            if sol.values.is_none() || node.is_leaf() {
                if node.is_leaf() {
                    let (x, y) = round(&node, &xv, &yv);
                    if model.is_feasible(&x, &y) {
                        inc.offer(model, &x, &y, model.evaluate(&x, &y));
                    }
                } else {
                    split = select_free(model, &node, &xv, &yv);
                }
            } else if let Some(var) = select_branch(model, &node, &xv, &yv) {
                split = Some(var);
            } else {
                let (x, y) = round(&node, &xv, &yv);
                let tight = if model.is_feasible(&x, &y) {
                    let value = model.evaluate(&x, &y);
                    inc.offer(model, &x, &y, value);
                    value <= sol.bound + prune_tol.max(INTEGRALITY_TOL * 1e-3)
                } else {
                    false
                };
                if !tight {
                    split = select_free(model, &node, &xv, &yv);
                }
            }

            match split {
                None => {
                    closed_lb = closed_lb.min(sol.bound);
                    emit(NodeOutcome::Integral, sol.bound);
                }
                Some(var) => {
                    emit(NodeOutcome::Branched, sol.bound);
                    for mut child in branch(model, &node, var, next_id) {
                        child.bound = sol.bound;
                        heap.push(Queued(child));
                    }
                    next_id += 2;
                }
            }
        }
    };

    let open_lb = heap.peek().map_or(f64::INFINITY, |q| q.0.bound);
    let lower_bound = inc.value.min(closed_lb).min(open_lb);
    Ok(SolveResult {
        placement: model.placement(&inc.x, &inc.y),
        objective: inc.value,
        lower_bound,
        relative_gap: relative_gap(inc.value, lower_bound),
        nodes_explored: explored,
        status,
    })
}
