//! Linear relaxation of the casualty objective at a branch-and-bound node.
//!
//! For route `k` with weight `c_k`, write `w_k = Σ_i X_i·ln(1-ρ_ik)` and
//! `v_k = Σ_i Y_i·ln(1-ρ'_ik)`, so the miss products are `u_k = exp(w_k)` and
//! `z_k = exp(v_k)`. The minimization objective becomes
//!
//! ```text
//! Σ_k c_k·[(θ1-θ2)·u_k + θ1·z_k - (θ1-θ2)·p_k],   p_k = u_k·z_k
//! ```
//!
//! `u` and `z` are bounded below by tangent lines of `exp` (valid everywhere
//! since `exp` is convex) and `p` is bounded above by a piecewise McCormick
//! envelope over a partition of the `u` range. Every integer placement in the
//! node maps to a feasible LP point with the exact objective, so the LP value
//! is a lower bound on the node.

use crate::lp::{LinearProgram, Relation};

use super::model::PlacementModel;
use super::SolveOptions;

/// Subproblem of the search tree: variables fixed to 0/1, the rest free.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationNode {
    pub id: u64,
    pub depth: u32,
    /// Per primary candidate: `Some(v)` when fixed.
    pub fix_primary: Vec<Option<bool>>,
    /// Per secondary candidate: `Some(v)` when fixed.
    pub fix_secondary: Vec<Option<bool>>,
    /// Best known lower bound on expected casualties within the node.
    pub bound: f64,
}

impl RelaxationNode {
    pub fn root(model: &PlacementModel) -> Self {
        let mut node = Self {
            id: 0,
            depth: 0,
            fix_primary: vec![None; model.num_primary()],
            fix_secondary: vec![None; model.num_secondary()],
            bound: f64::NEG_INFINITY,
        };
        node.propagate(model);
        node
    }

    pub fn fixed_ones_primary(&self) -> usize {
        self.fix_primary.iter().filter(|f| **f == Some(true)).count()
    }

    pub fn fixed_ones_secondary(&self) -> usize {
        self.fix_secondary.iter().filter(|f| **f == Some(true)).count()
    }

    pub fn is_leaf(&self) -> bool {
        self.fix_primary.iter().chain(&self.fix_secondary).all(Option::is_some)
    }

    /// Fixings implied by the constraints: exclusion, exhausted budgets and
    /// the primary-before-secondary link. Returns `false` if the fixings
    /// already violate a constraint.
    pub fn propagate(&mut self, model: &PlacementModel) -> bool {
        loop {
            let mut changed = false;
            for &(i, k) in &model.shared {
                match (self.fix_primary[i], self.fix_secondary[k]) {
                    (Some(true), Some(true)) => return false,
                    (Some(true), None) => {
                        self.fix_secondary[k] = Some(false);
                        changed = true;
                    }
                    (None, Some(true)) => {
                        self.fix_primary[i] = Some(false);
                        changed = true;
                    }
                    _ => {}
                }
            }
            let ones_p = self.fixed_ones_primary();
            let ones_s = self.fixed_ones_secondary();
            if ones_p > model.max_primary || ones_s > model.max_secondary {
                return false;
            }
            if ones_p == model.max_primary {
                changed |= fix_free(&mut self.fix_primary, false);
            }
            if ones_s == model.max_secondary {
                changed |= fix_free(&mut self.fix_secondary, false);
            }
            if self.fix_primary.iter().all(|f| *f == Some(false)) {
                if ones_s > 0 {
                    return false;
                }
                changed |= fix_free(&mut self.fix_secondary, false);
            }
            if !changed {
                return true;
            }
        }
    }
}

fn fix_free(fix: &mut [Option<bool>], value: bool) -> bool {
    let mut changed = false;
    for f in fix.iter_mut().filter(|f| f.is_none()) {
        *f = Some(value);
        changed = true;
    }
    changed
}

/// Range of `Σ_i v_i·g_i` (`g_i <= 0`) over the node's completions, using
/// at most `remaining` further ones among the free entries.
fn log_range(entries: &[(usize, f64)], fix: &[Option<bool>], remaining: usize) -> (f64, f64) {
    let fixed: f64 = entries
        .iter()
        .filter(|(i, _)| fix[*i] == Some(true))
        .map(|(_, g)| g)
        .sum();
    let mut free: Vec<f64> = entries
        .iter()
        .filter(|(i, _)| fix[*i].is_none())
        .map(|(_, g)| *g)
        .collect();
    free.sort_by(|a, b| a.total_cmp(b));
    let reach: f64 = free.iter().take(remaining).sum();
    (fixed + reach, fixed)
}

/// Bounds on the per-route linearization variables at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteRanges {
    pub w_min: f64,
    pub w_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl RouteRanges {
    pub fn u(&self) -> (f64, f64) {
        (self.w_min.exp(), self.w_max.exp())
    }

    pub fn z(&self) -> (f64, f64) {
        (self.v_min.exp(), self.v_max.exp())
    }
}

pub fn route_ranges(model: &PlacementModel, node: &RelaxationNode) -> Vec<RouteRanges> {
    let rem_p = model.max_primary.saturating_sub(node.fixed_ones_primary());
    let rem_s = model.max_secondary.saturating_sub(node.fixed_ones_secondary());
    model
        .routes
        .iter()
        .map(|r| {
            let (w_min, w_max) = log_range(&r.primary, &node.fix_primary, rem_p);
            let (v_min, v_max) = log_range(&r.secondary, &node.fix_secondary, rem_s);
            RouteRanges { w_min, w_max, v_min, v_max }
        })
        .collect()
}

/// Bound from the variable boxes alone: each route term is bilinear in
/// `(u, z)`, so its minimum over the box sits at a corner.
pub fn interval_bound(model: &PlacementModel, node: &RelaxationNode) -> f64 {
    let (t1, spread) = (model.theta1, model.theta1 - model.theta2);
    let lp_part: f64 = model
        .routes
        .iter()
        .zip(route_ranges(model, node))
        .map(|(r, rg)| {
            let (ul, uu) = rg.u();
            let (zl, zu) = rg.z();
            let f = |u: f64, z: f64| spread * u + t1 * z - spread * u * z;
            r.weight * f(ul, zl).min(f(ul, zu)).min(f(uu, zl)).min(f(uu, zu))
        })
        .sum();
    lp_part + model.objective_offset()
}

/// The node LP together with the positions of the placement variables.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub lp: LinearProgram,
    pub primary_vars: Vec<usize>,
    pub secondary_vars: Vec<usize>,
    /// Add to the LP value to get a bound on expected casualties.
    pub offset: f64,
}

fn breakpoints(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if hi - lo <= 1e-12 || count <= 1 {
        return vec![if count == 1 { 0.5 * (lo + hi) } else { hi }];
    }
    (0..count)
        .map(|t| lo + (hi - lo) * t as f64 / (count - 1) as f64)
        .collect()
}

/// Adds `var >= exp(s)` tangent cuts for `s = base + Σ coeff·x` over `[lo, hi]`.
fn add_tangents(
    lp: &mut LinearProgram,
    var: usize,
    linear: &[(usize, f64)],
    fixed: f64,
    lo: f64,
    hi: f64,
    count: usize,
) {
    for wb in breakpoints(lo, hi, count) {
        let slope = wb.exp();
        let mut coeffs = vec![(var, 1.0)];
        coeffs.extend(linear.iter().map(|&(j, g)| (j, -slope * g)));
        lp.add_row(coeffs, Relation::Ge, slope * (1.0 + fixed - wb));
    }
}

/// Builds the node LP.
pub fn build_relaxation(
    model: &PlacementModel,
    node: &RelaxationNode,
    opts: &SolveOptions,
) -> Relaxation {
    let mut lp = LinearProgram::new();
    let bounds = |f: Option<bool>| match f {
        Some(true) => (1.0, 1.0),
        Some(false) => (0.0, 0.0),
        None => (0.0, 1.0),
    };
    let primary_vars: Vec<usize> = node
        .fix_primary
        .iter()
        .map(|&f| {
            let (lo, hi) = bounds(f);
            lp.add_var(lo, hi, 0.0)
        })
        .collect();
    let secondary_vars: Vec<usize> = node
        .fix_secondary
        .iter()
        .map(|&f| {
            let (lo, hi) = bounds(f);
            lp.add_var(lo, hi, 0.0)
        })
        .collect();

    // Budgets, as detector counts since unit costs are uniform.
    if !primary_vars.is_empty() {
        lp.add_row(
            primary_vars.iter().map(|&j| (j, 1.0)).collect(),
            Relation::Le,
            model.max_primary as f64,
        );
    }
    if !secondary_vars.is_empty() {
        lp.add_row(
            secondary_vars.iter().map(|&j| (j, 1.0)).collect(),
            Relation::Le,
            model.max_secondary as f64,
        );
    }
    // One detector per cell.
    for &(i, k) in &model.shared {
        lp.add_row(
            vec![(primary_vars[i], 1.0), (secondary_vars[k], 1.0)],
            Relation::Le,
            1.0,
        );
    }
    // Secondaries need some primary.
    for &yk in &secondary_vars {
        let mut coeffs = vec![(yk, 1.0)];
        coeffs.extend(primary_vars.iter().map(|&j| (j, -1.0)));
        lp.add_row(coeffs, Relation::Le, 0.0);
    }

    let (t1, spread) = (model.theta1, model.theta1 - model.theta2);
    let offset = model.objective_offset();
    for (route, rg) in model.routes.iter().zip(route_ranges(model, node)) {
        let c = route.weight;
        if c == 0.0 {
            continue;
        }
        let (ul, uu) = rg.u();
        let (zl, zu) = rg.z();

        let free_terms = |entries: &[(usize, f64)], fix: &[Option<bool>], vars: &[usize]| {
            entries
                .iter()
                .filter(|(i, _)| fix[*i].is_none())
                .map(|&(i, g)| (vars[i], g))
                .collect::<Vec<_>>()
        };
        let xw = free_terms(&route.primary, &node.fix_primary, &primary_vars);
        let yv = free_terms(&route.secondary, &node.fix_secondary, &secondary_vars);

        let u = lp.add_var(ul, uu.max(ul), c * spread);
        let z = lp.add_var(zl, zu.max(zl), c * t1);
        if !xw.is_empty() {
            add_tangents(&mut lp, u, &xw, rg.w_max, rg.w_min, rg.w_max, opts.tangent_breakpoints);
        }
        if !yv.is_empty() {
            add_tangents(&mut lp, z, &yv, rg.v_max, rg.v_min, rg.v_max, opts.tangent_breakpoints);
        }
        if spread == 0.0 {
            continue;
        }

        let p = lp.add_var(ul * zl, uu * zu, -c * spread);
        let parts = opts.mccormick_partitions.max(1);
        if parts == 1 || uu - ul <= 1e-12 {
            lp.add_row(vec![(p, 1.0), (u, -zu), (z, -ul)], Relation::Le, -ul * zu);
            lp.add_row(vec![(p, 1.0), (u, -zl), (z, -uu)], Relation::Le, -uu * zl);
            continue;
        }

        // Piecewise McCormick on the u range with relaxed segment selectors.
        let grid: Vec<f64> = (0..=parts)
            .map(|n| ul + (uu - ul) * n as f64 / parts as f64)
            .collect();
        let mut select = Vec::with_capacity(parts);
        let mut env_upper = vec![(p, 1.0)];
        let mut env_lower = vec![(p, 1.0)];
        let mut u_sum = vec![(u, 1.0)];
        let mut z_sum = vec![(z, 1.0)];
        for n in 0..parts {
            let (a, bnd) = (grid[n], grid[n + 1]);
            let lam = lp.add_var(0.0, 1.0, 0.0);
            let un = lp.add_var(0.0, bnd, 0.0);
            let zn = lp.add_var(0.0, zu, 0.0);
            select.push((lam, 1.0));
            u_sum.push((un, -1.0));
            z_sum.push((zn, -1.0));
            lp.add_row(vec![(un, 1.0), (lam, -a)], Relation::Ge, 0.0);
            lp.add_row(vec![(un, 1.0), (lam, -bnd)], Relation::Le, 0.0);
            lp.add_row(vec![(zn, 1.0), (lam, -zl)], Relation::Ge, 0.0);
            lp.add_row(vec![(zn, 1.0), (lam, -zu)], Relation::Le, 0.0);
            // p <= Σ (zU·û + a·ẑ - a·zU·λ)
            env_upper.extend([(un, -zu), (zn, -a), (lam, a * zu)]);
            // p <= Σ (zL·û + b·ẑ - b·zL·λ)
            env_lower.extend([(un, -zl), (zn, -bnd), (lam, bnd * zl)]);
        }
        lp.add_row(select, Relation::Eq, 1.0);
        lp.add_row(u_sum, Relation::Eq, 0.0);
        lp.add_row(z_sum, Relation::Eq, 0.0);
        lp.add_row(env_upper, Relation::Le, 0.0);
        lp.add_row(env_lower, Relation::Le, 0.0);
    }
    Relaxation {
        lp,
        primary_vars,
        secondary_vars,
        offset,
    }
}
