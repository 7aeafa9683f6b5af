//! Small dense linear programming solver for node relaxations.
//!
//! Bounded-variable primal simplex with a two-phase start. Pricing is
//! Dantzig's rule with lowest-index ties; after a run of degenerate pivots it
//! falls back to Bland's rule until progress resumes, so the pivot sequence is
//! fully determined by the input.
//!
//! Besides the primal solution, [`lp_solve`] returns a Lagrangian lower bound
//! recomputed from the original rows with the final duals. For boxed
//! variables that bound is valid for any multipliers, so it never exceeds the
//! true optimum even when the simplex stops within tolerance of it.

use thiserror::Error;

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const HARRIS_SLACK: f64 = 1e-9;
const DEGENERATE_RUN: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min c·x` subject to linear rows and finite variable boxes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let act: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let gap = match row.relation {
                Relation::Le => act - row.rhs,
                Relation::Ge => row.rhs - act,
                Relation::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    /// `c·x` at the returned primal point.
    pub objective: f64,
    /// Lagrangian bound; `dual_bound <= true optimum <= objective` up to rounding.
    pub dual_bound: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("variable {0} has an empty or unbounded box")]
    BadBounds(usize),
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

struct Tableau {
    m: usize,
    n: usize,
    /// Row-major `m × n`.
    a: Vec<f64>,
    /// Current value of each row's basic variable.
    beta: Vec<f64>,
    basis: Vec<usize>,
    /// Column width `h_j`; every column lives in `[0, h_j]`.
    width: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    /// Reduced costs for the active phase.
    d: Vec<f64>,
    iterations: usize,
}

enum Step {
    Optimal,
    Progress,
    Unbounded,
}

impl Tableau {
    fn col(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * self.n..(i + 1) * self.n];
                for (dj, &aij) in d.iter_mut().zip(row) {
                    *dj -= cb * aij;
                }
            }
        }
        for i in 0..self.m {
            d[self.basis[i]] = 0.0;
        }
        self.d = d;
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if self.is_basic[j] || self.width[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let gain = if self.at_upper[j] { dj } else { -dj };
            if gain > OPTIMALITY_TOL {
                if bland {
                    return Some((j, gain));
                }
                if best.map_or(true, |(_, g)| gain > g) {
                    best = Some((j, gain));
                }
            }
        }
        best
    }

    fn step(&mut self, bland: bool, degenerate: &mut usize) -> Step {
        let Some((j, _)) = self.entering(bland) else {
            return Step::Optimal;
        };
        let dir = if self.at_upper[j] { -1.0 } else { 1.0 };

        // Ratio test: x_B(i) moves by -alpha_i * dir * t. Outside Bland mode
        // this is Harris's two-pass test: find the longest step that keeps
        // every basic variable within HARRIS_SLACK of its box, then pivot on
        // the largest entry among rows blocking before that step.
        let ratio = |i: usize| -> Option<(f64, f64, bool)> {
            let rate = self.col(i, j) * dir;
            if rate.abs() <= PIVOT_TOL {
                return None;
            }
            let b = self.basis[i];
            if rate > 0.0 {
                Some((self.beta[i], rate, false))
            } else if self.width[b].is_finite() {
                Some((self.width[b] - self.beta[i], -rate, true))
            } else {
                None
            }
        };
        let mut limit = self.width[j];
        let mut leave: Option<(usize, bool)> = None;
        if bland {
            for i in 0..self.m {
                let Some((room, rate, to_upper)) = ratio(i) else { continue };
                let t = (room / rate).max(0.0);
                let take = match leave {
                    Some((r, _)) if (t - limit).abs() <= 1e-12 => self.basis[i] < self.basis[r],
                    _ => t < limit,
                };
                if take {
                    limit = t;
                    leave = Some((i, to_upper));
                }
            }
        } else {
            let mut reach = self.width[j];
            for i in 0..self.m {
                if let Some((room, rate, _)) = ratio(i) {
                    reach = reach.min((room.max(0.0) + HARRIS_SLACK) / rate);
                }
            }
            if self.width[j] > reach {
                let mut best = 0.0;
                for i in 0..self.m {
                    let Some((room, rate, to_upper)) = ratio(i) else { continue };
                    let t = (room / rate).max(0.0);
                    if t <= reach && rate > best {
                        best = rate;
                        limit = t;
                        leave = Some((i, to_upper));
                    }
                }
            }
        }
        if !limit.is_finite() {
            return Step::Unbounded;
        }
        self.iterations += 1;
        if limit <= 1e-12 {
            *degenerate += 1;
        } else {
            *degenerate = 0;
        }

        for i in 0..self.m {
            let aij = self.col(i, j);
            if aij != 0.0 {
                self.beta[i] -= aij * dir * limit;
            }
        }
        let entering_value = if self.at_upper[j] { self.width[j] } else { 0.0 } + dir * limit;

        let Some((r, to_upper)) = leave else {
            // Bound flip.
            self.at_upper[j] = !self.at_upper[j];
            return Step::Progress;
        };

        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.at_upper[leaving] = to_upper;
        self.is_basic[j] = true;
        self.at_upper[j] = false;
        self.basis[r] = j;
        self.beta[r] = entering_value;

        let n = self.n;
        let piv = self.a[r * n + j];
        for k in 0..n {
            self.a[r * n + k] /= piv;
        }
        let (before, rest) = self.a.split_at_mut(r * n);
        let (prow, after) = rest.split_at_mut(n);
        for row in before.chunks_exact_mut(n).chain(after.chunks_exact_mut(n)) {
            let f = row[j];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (x, &p) in self.d.iter_mut().zip(prow.iter()) {
                *x -= f * p;
            }
            self.d[j] = 0.0;
        }
        Step::Progress
    }

    fn run(&mut self, max_iter: usize) -> Result<(), LpError> {
        let mut degenerate = 0;
        loop {
            if self.iterations > max_iter {
                return Err(LpError::Numerical("iteration limit"));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            match self.step(bland, &mut degenerate) {
                Step::Optimal => return Ok(()),
                Step::Progress => {}
                Step::Unbounded => return Err(LpError::Numerical("unbounded ray in boxed program")),
            }
        }
    }

    fn column_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.n)
            .map(|j| if self.at_upper[j] { self.width[j] } else { 0.0 })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.beta[i];
        }
        x
    }
}

/// Equality form over shifted columns: `A'·x' = b'`, `0 <= x' <= width`.
struct StandardForm {
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    width: Vec<f64>,
    /// Column whose tableau reduced cost yields the row dual.
    dual_col: Vec<usize>,
    artificial: Vec<usize>,
}

fn standard_form(lp: &LinearProgram) -> Result<StandardForm, LpError> {
    let nv = lp.num_vars();
    for j in 0..nv {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(LpError::BadBounds(j));
        }
    }
    let mut width: Vec<f64> = (0..nv).map(|j| lp.upper[j] - lp.lower[j]).collect();
    let mut rows = Vec::with_capacity(lp.rows.len());
    let mut rhs = Vec::with_capacity(lp.rows.len());
    let mut dual_col = Vec::with_capacity(lp.rows.len());
    let mut pending_art = Vec::new();

    for (i, row) in lp.rows.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = row.coeffs.iter().copied().filter(|&(_, a)| a != 0.0).collect();
        let shift: f64 = coeffs.iter().map(|&(j, a)| a * lp.lower[j]).sum();
        let mut b = row.rhs - shift;
        let (act_min, act_max) = coeffs.iter().fold((0.0, 0.0), |(lo, hi), &(j, a)| {
            let w = a * width[j];
            (lo + w.min(0.0), hi + w.max(0.0))
        });
        let slack = match row.relation {
            Relation::Le => Some((1.0, (b - act_min).max(0.0))),
            Relation::Ge => Some((-1.0, (act_max - b).max(0.0))),
            Relation::Eq => None,
        };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut slack_basic = None;
        if let Some((coef, w)) = slack {
            let col = width.len();
            width.push(w);
            coeffs.push((col, coef));
            if coef * sign > 0.0 {
                slack_basic = Some(col);
            }
        }
        if sign < 0.0 {
            b = -b;
            for c in &mut coeffs {
                c.1 = -c.1;
            }
        }
        match slack_basic {
            Some(col) => dual_col.push(col),
            None => {
                pending_art.push(i);
                dual_col.push(usize::MAX);
            }
        }
        rows.push(coeffs);
        rhs.push(b);
    }

    let mut artificial = Vec::new();
    for i in pending_art {
        let col = width.len();
        width.push(f64::INFINITY);
        rows[i].push((col, 1.0));
        dual_col[i] = col;
        artificial.push(col);
    }
    Ok(StandardForm {
        rows,
        rhs,
        width,
        dual_col,
        artificial,
    })
}

/// Lagrangian bound `y·b' + Σ_j min(0, (c_j - y·A'_j)·h_j)`.
fn lagrangian_bound(sf: &StandardForm, cost: &[f64], y: &[f64]) -> f64 {
    let mut reduced = cost.to_vec();
    let mut value = 0.0;
    for (i, row) in sf.rows.iter().enumerate() {
        value += y[i] * sf.rhs[i];
        for &(j, a) in row {
            reduced[j] -= y[i] * a;
        }
    }
    for (j, &dj) in reduced.iter().enumerate() {
        if dj < 0.0 {
            value += dj * sf.width[j];
        }
    }
    value
}

/// Solves `lp` to optimality.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let sf = standard_form(lp)?;
    let m = sf.rows.len();
    let n = sf.width.len();
    let nv = lp.num_vars();
    let offset: f64 = lp.cost.iter().zip(&lp.lower).map(|(c, l)| c * l).sum();

    let mut a = vec![0.0; m * n];
    for (i, row) in sf.rows.iter().enumerate() {
        for &(j, v) in row {
            a[i * n + j] += v;
        }
    }
    let mut is_basic = vec![false; n];
    for &c in &sf.dual_col {
        is_basic[c] = true;
    }
    let mut t = Tableau {
        m,
        n,
        a,
        beta: sf.rhs.clone(),
        basis: sf.dual_col.clone(),
        width: sf.width.clone(),
        at_upper: vec![false; n],
        is_basic,
        d: vec![0.0; n],
        iterations: 0,
    };
    let max_iter = 50 * (m + n) + 1000;

    if !sf.artificial.is_empty() {
        let mut phase1 = vec![0.0; n];
        for &c in &sf.artificial {
            phase1[c] = 1.0;
        }
        t.set_costs(&phase1);
        t.run(max_iter)?;
        let infeasibility: f64 = sf.artificial.iter().map(|&c| t.column_values()[c]).sum();
        let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
        if infeasibility > FEASIBILITY_TOL * scale {
            return Err(LpError::Infeasible);
        }
        for &c in &sf.artificial {
            t.width[c] = 0.0;
            if !t.is_basic[c] {
                t.at_upper[c] = false;
            }
        }
    }

    let mut cost = vec![0.0; n];
    cost[..nv].copy_from_slice(&lp.cost);
    t.set_costs(&cost);
    t.run(max_iter)?;

    let cols = t.column_values();
    let values: Vec<f64> = (0..nv)
        .map(|j| (lp.lower[j] + cols[j]).clamp(lp.lower[j], lp.upper[j]))
        .collect();
    let y: Vec<f64> = sf.dual_col.iter().map(|&c| cost[c] - t.d[c]).collect();
    let mut final_form = sf;
    for &c in &final_form.artificial {
        final_form.width[c] = 0.0;
    }
    let dual_bound = lagrangian_bound(&final_form, &cost, &y) + offset;
    let objective = lp.objective_at(&values);
    if !(objective.is_finite() && dual_bound.is_finite()) {
        return Err(LpError::Numerical("non-finite objective"));
    }
    Ok(LpSolution {
        values,
        objective,
        dual_bound: dual_bound.min(objective),
        iterations: t.iterations,
    })
}
