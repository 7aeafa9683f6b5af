use crate::coverage::CoverageTable;
use crate::objective::{success_factor, Placement};
use crate::scenario::{CellId, GridScenario};

/// Unit costs and budgets of both layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    pub primary_psi: f64,
    pub primary_budget: f64,
    pub secondary_psi: f64,
    pub secondary_budget: f64,
}

impl Budgets {
    pub fn from_scenario(s: &GridScenario) -> Self {
        Self {
            primary_psi: s.primary.psi,
            primary_budget: s.primary.budget,
            secondary_psi: s.secondary.psi,
            secondary_budget: s.secondary.budget,
        }
    }

    /// Same budgets with the secondary layer removed.
    pub fn one_layer(self) -> Self {
        Self {
            secondary_budget: 0.0,
            ..self
        }
    }

    pub fn affords_primary(&self, count: usize) -> bool {
        count as f64 * self.primary_psi <= self.primary_budget
    }

    pub fn affords_secondary(&self, count: usize) -> bool {
        count as f64 * self.secondary_psi <= self.secondary_budget
    }

    pub fn max_primary(&self, cap: usize) -> usize {
        (0..=cap).take_while(|&n| self.affords_primary(n)).last().unwrap_or(0)
    }

    pub fn max_secondary(&self, cap: usize) -> usize {
        (0..=cap).take_while(|&n| self.affords_secondary(n)).last().unwrap_or(0)
    }
}

/// Coverage of one route in candidate-index space.
#[derive(Debug, Clone)]
pub struct Route {
    /// `ζ_j·γ_ej`.
    pub weight: f64,
    /// `(index into primary_cells, ln(1 - ρ))`.
    pub primary: Vec<(usize, f64)>,
    /// `(index into secondary_cells, ln(1 - ρ))`.
    pub secondary: Vec<(usize, f64)>,
}

/// The placement problem compiled to dense candidate indices.
#[derive(Debug, Clone)]
pub struct PlacementModel {
    /// Candidate set `P`, ascending.
    pub primary_cells: Vec<CellId>,
    /// Candidate set `S`, ascending.
    pub secondary_cells: Vec<CellId>,
    pub routes: Vec<Route>,
    pub theta1: f64,
    pub theta2: f64,
    /// `(primary index, secondary index)` for every cell in `P ∩ S`.
    pub shared: Vec<(usize, usize)>,
    pub budgets: Budgets,
    /// `Σ ζ_j·γ_ej` over all pairs.
    pub undefended: f64,
    /// Most primary / secondary detectors any feasible placement can hold.
    pub max_primary: usize,
    pub max_secondary: usize,
}

impl PlacementModel {
    pub fn new(s: &GridScenario, cov: &CoverageTable, budgets: Budgets) -> Self {
        let primary_cells: Vec<CellId> = cov.candidates_primary.iter().copied().collect();
        let secondary_cells: Vec<CellId> = cov.candidates_secondary.iter().copied().collect();
        let pos = |cells: &[CellId], c: &CellId| cells.binary_search(c).expect("candidate");
        let gamma = s.gamma_map();
        let routes = cov
            .pairs
            .iter()
            .map(|(pair, row)| Route {
                weight: gamma.get(pair).copied().unwrap_or(0.0)
                    * s.zeta(pair.target).unwrap_or(0.0),
                primary: row
                    .primary
                    .iter()
                    .map(|(c, &rho)| (pos(&primary_cells, c), (-rho).ln_1p()))
                    .collect(),
                secondary: row
                    .secondary
                    .iter()
                    .map(|(c, &rho)| (pos(&secondary_cells, c), (-rho).ln_1p()))
                    .collect(),
            })
            .collect();
        let shared = primary_cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| secondary_cells.binary_search(c).ok().map(|k| (i, k)))
            .collect();
        let max_primary = budgets.max_primary(primary_cells.len());
        let max_secondary = if max_primary == 0 {
            0
        } else {
            budgets.max_secondary(secondary_cells.len())
        };
        Self {
            primary_cells,
            secondary_cells,
            routes,
            theta1: s.theta1,
            theta2: s.theta2,
            shared,
            budgets,
            undefended: s.undefended_casualties(),
            max_primary,
            max_secondary,
        }
    }

    pub fn num_primary(&self) -> usize {
        self.primary_cells.len()
    }

    pub fn num_secondary(&self) -> usize {
        self.secondary_cells.len()
    }

    /// Constant `(1 - θ1)·Σ ζγ` separating expected casualties from the
    /// minimization form.
    pub fn objective_offset(&self) -> f64 {
        (1.0 - self.theta1) * self.undefended
    }

    /// Expected casualties of a placement given as indicator vectors.
    pub fn evaluate(&self, x: &[bool], y: &[bool]) -> f64 {
        let mut total = 0.0;
        for r in &self.routes {
            let w: f64 = r.primary.iter().filter(|(i, _)| x[*i]).map(|(_, g)| g).sum();
            let v: f64 = r.secondary.iter().filter(|(i, _)| y[*i]).map(|(_, g)| g).sum();
            let q_p = if w == 0.0 { 1.0 } else { w.exp() };
            let q_s = if v == 0.0 { 1.0 } else { v.exp() };
            total += r.weight * success_factor(q_p, q_s, self.theta1, self.theta2);
        }
        total
    }

    /// Budgets, exclusion and linking on indicator vectors.
    pub fn is_feasible(&self, x: &[bool], y: &[bool]) -> bool {
        let nx = x.iter().filter(|&&b| b).count();
        let ny = y.iter().filter(|&&b| b).count();
        self.budgets.affords_primary(nx)
            && self.budgets.affords_secondary(ny)
            && (ny == 0 || nx > 0)
            && self.shared.iter().all(|&(i, k)| !(x[i] && y[k]))
    }

    pub fn placement(&self, x: &[bool], y: &[bool]) -> Placement {
        Placement::new(
            self.primary_cells.iter().zip(x).filter(|(_, &b)| b).map(|(c, _)| *c),
            self.secondary_cells.iter().zip(y).filter(|(_, &b)| b).map(|(c, _)| *c),
        )
    }

    pub fn indicators(&self, pl: &Placement) -> (Vec<bool>, Vec<bool>) {
        (
            self.primary_cells.iter().map(|c| pl.primary.contains(c)).collect(),
            self.secondary_cells.iter().map(|c| pl.secondary.contains(c)).collect(),
        )
    }
}
