//! Exact casualty objective for a fixed placement.
//!
//! Per route, let `Q_p` and `Q_s` be the probabilities that the whole
//! primary and secondary layers miss the attacker. Neutralization starts only
//! once a secondary detector confirms, so the four detect/miss outcomes are:
//!
//! | primary | secondary | attack succeeds with |
//! |---------|-----------|----------------------|
//! | detect  | detect    | `1 - θ1`             |
//! | miss    | detect    | `1 - θ2`             |
//! | detect  | miss      | `1`                  |
//! | miss    | miss      | `1`                  |
//!
//! which sums to `1 - θ1·(1-Q_p)·(1-Q_s) - θ2·Q_p·(1-Q_s)`. The minimization
//! form used by the solver drops the placement-independent constant
//! `(1-θ1)·Σ ζ_j·γ_ej`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::coverage::CoverageTable;
use crate::scenario::{CellId, GridScenario};

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Placement {
    /// Cells hosting a primary detector (`X_j = 1`).
    pub primary: BTreeSet<CellId>,
    /// Cells hosting a secondary detector (`Y_j = 1`).
    pub secondary: BTreeSet<CellId>,
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let list = |cells: &BTreeSet<CellId>| {
            cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
        };
        write!(f, "primary [{}], secondary [{}]", list(&self.primary), list(&self.secondary))
    }
}

impl Placement {
    pub fn new(
        primary: impl IntoIterator<Item = CellId>,
        secondary: impl IntoIterator<Item = CellId>,
    ) -> Self {
        Self {
            primary: primary.into_iter().collect(),
            secondary: secondary.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.primary.is_empty() && self.secondary.is_empty()
    }

    /// Tie order: lexicographic on sorted primary cells, then secondary cells.
    pub fn tie_key(&self) -> (Vec<CellId>, Vec<CellId>) {
        (
            self.primary.iter().copied().collect(),
            self.secondary.iter().copied().collect(),
        )
    }

    /// Lists every violated model constraint; empty means feasible.
    pub fn constraint_violations(&self, s: &GridScenario, cov: &CoverageTable) -> Vec<String> {
        let mut out = Vec::new();
        if !s.primary.affords(self.primary.len()) {
            out.push(format!(
                "primary budget: {} x {} > {}",
                self.primary.len(),
                s.primary.psi,
                s.primary.budget
            ));
        }
        if !s.secondary.affords(self.secondary.len()) {
            out.push(format!(
                "secondary budget: {} x {} > {}",
                self.secondary.len(),
                s.secondary.psi,
                s.secondary.budget
            ));
        }
        for c in self.primary.intersection(&self.secondary) {
            out.push(format!("cell {c} hosts both layers"));
        }
        if self.primary.is_empty() && !self.secondary.is_empty() {
            out.push("secondary detectors without any primary detector".into());
        }
        for c in self.primary.difference(&cov.candidates_primary) {
            out.push(format!("cell {c} is not a primary candidate"));
        }
        for c in self.secondary.difference(&cov.candidates_secondary) {
            out.push(format!("cell {c} is not a secondary candidate"));
        }
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("ineligible cell {0} for the {1} layer")]
    IneligibleCell(CellId, &'static str),
    #[error("cell {0} hosts both a primary and a secondary detector")]
    CoLocated(CellId),
}

/// `Π (1 - ρ_i)` over chosen cells that appear in `rho_row`, in log space.
pub fn miss_product(rho_row: &BTreeMap<CellId, f64>, chosen: &BTreeSet<CellId>) -> f64 {
    let log_sum: f64 = chosen
        .iter()
        .filter_map(|c| rho_row.get(c))
        .map(|&rho| (-rho).ln_1p())
        .sum();
    if log_sum == 0.0 {
        1.0
    } else {
        log_sum.exp()
    }
}

/// Probability that the attack on one route succeeds.
pub fn success_factor(q_p: f64, q_s: f64, theta1: f64, theta2: f64) -> f64 {
    1.0 - theta1 * (1.0 - q_p) * (1.0 - q_s) - theta2 * q_p * (1.0 - q_s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTerm {
    pub entrance: CellId,
    pub target: CellId,
    pub miss_primary: f64,
    pub miss_secondary: f64,
    pub success_factor: f64,
    pub expected_casualties_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveBreakdown {
    pub pairs: Vec<PairTerm>,
    pub expected_casualties: f64,
    pub paper_objective_value: f64,
}

fn check_placement(cov: &CoverageTable, pl: &Placement) -> Result<(), ObjectiveError> {
    if let Some(&c) = pl.primary.difference(&cov.candidates_primary).next() {
        return Err(ObjectiveError::IneligibleCell(c, "primary"));
    }
    if let Some(&c) = pl.secondary.difference(&cov.candidates_secondary).next() {
        return Err(ObjectiveError::IneligibleCell(c, "secondary"));
    }
    if let Some(&c) = pl.primary.intersection(&pl.secondary).next() {
        return Err(ObjectiveError::CoLocated(c));
    }
    Ok(())
}

/// Per-route weights `ζ_j·γ_ej` with miss products for the placement.
fn route_terms<'a>(
    s: &'a GridScenario,
    cov: &'a CoverageTable,
    pl: &'a Placement,
) -> impl Iterator<Item = (crate::scenario::Pair, f64, f64, f64)> + 'a {
    let gamma = s.gamma_map();
    cov.pairs.iter().map(move |(pair, row)| {
        let weight = gamma.get(pair).copied().unwrap_or(0.0) * s.zeta(pair.target).unwrap_or(0.0);
        (
            *pair,
            weight,
            miss_product(&row.primary, &pl.primary),
            miss_product(&row.secondary, &pl.secondary),
        )
    })
}

/// Expected casualties with the per-route breakdown.
pub fn expected_casualties(
    s: &GridScenario,
    cov: &CoverageTable,
    pl: &Placement,
) -> Result<ObjectiveBreakdown, ObjectiveError> {
    check_placement(cov, pl)?;
    let mut pairs = Vec::with_capacity(cov.pairs.len());
    let mut total = 0.0;
    for (pair, weight, q_p, q_s) in route_terms(s, cov, pl) {
        let factor = success_factor(q_p, q_s, s.theta1, s.theta2);
        let term = weight * factor;
        total += term;
        pairs.push(PairTerm {
            entrance: pair.entrance,
            target: pair.target,
            miss_primary: q_p,
            miss_secondary: q_s,
            success_factor: factor,
            expected_casualties_term: term,
        });
    }
    Ok(ObjectiveBreakdown {
        pairs,
        expected_casualties: total,
        paper_objective_value: total - (1.0 - s.theta1) * s.undefended_casualties(),
    })
}

/// The minimization form `Σ ζγ·[(θ1-θ2)·Q_p + θ1·Q_s - (θ1-θ2)·Q_p·Q_s]`.
pub fn paper_objective(
    s: &GridScenario,
    cov: &CoverageTable,
    pl: &Placement,
) -> Result<f64, ObjectiveError> {
    check_placement(cov, pl)?;
    let spread = s.theta1 - s.theta2;
    Ok(route_terms(s, cov, pl)
        .map(|(_, w, q_p, q_s)| w * (spread * q_p + s.theta1 * q_s - spread * q_p * q_s))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::PairCoverage;
    use crate::scenario::{DetectorSpec, GammaEntry, Pair, Target};

    fn cells(v: &[usize]) -> BTreeSet<CellId> {
        v.iter().map(|&c| CellId(c)).collect()
    }

    /// Sums the four detect/miss branches explicitly.
    fn branch_oracle(q_p: f64, q_s: f64, t1: f64, t2: f64) -> f64 {
        let (dp, ds) = (1.0 - q_p, 1.0 - q_s);
        dp * ds * (1.0 - t1) + q_p * ds * (1.0 - t2) + dp * q_s * 1.0 + q_p * q_s * 1.0
    }

    #[test]
    fn miss_products() {
        let row: BTreeMap<CellId, f64> =
            [(CellId(1), 1.0 - (-1f64).exp()), (CellId(2), 0.5), (CellId(3), 0.5)].into();
        assert_eq!(miss_product(&row, &BTreeSet::new()), 1.0);
        assert!((miss_product(&row, &cells(&[1])) - 0.367879441).abs() < 1e-9);
        assert!((miss_product(&row, &cells(&[2, 3])) - 0.25).abs() < 1e-15);
        // cells outside the row do not contribute
        assert_eq!(miss_product(&row, &cells(&[7])), 1.0);
    }

    #[test]
    fn success_factor_matches_branches() {
        assert_eq!(success_factor(1.0, 1.0, 0.9, 0.6), 1.0);
        assert!((success_factor(0.0, 0.0, 0.9, 0.6) - 0.1).abs() < 1e-15);
        assert!((success_factor(0.5, 0.5, 0.9, 0.6) - 0.625).abs() < 1e-15);
        for &(qp, qs) in &[(0.5, 0.5), (0.1, 0.7), (0.9, 0.2), (0.0, 1.0), (1.0, 0.0)] {
            let oracle = branch_oracle(qp, qs, 0.8, 0.3);
            assert!((success_factor(qp, qs, 0.8, 0.3) - oracle).abs() < 1e-15);
        }
    }

    fn single_pair(rho_p: f64, rho_s: f64) -> (GridScenario, CoverageTable) {
        let spec = DetectorSpec { alpha_m: 1.0, beta_per_m: 1.0, psi: 1.0, budget: 1.0 };
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
            primary: spec,
            secondary: spec,
        };
        let mut cov = CoverageTable::default();
        let row = PairCoverage {
            primary: [(CellId(2), rho_p)].into(),
            secondary: [(CellId(3), rho_s)].into(),
        };
        cov.pairs.insert(Pair::new(CellId(1), CellId(5)), row);
        cov.candidates_primary = cells(&[2]);
        cov.candidates_secondary = cells(&[3]);
        (s, cov)
    }

    #[test]
    fn breakdown_examples() {
        let (s, cov) = single_pair(0.5, 0.5);
        let empty = expected_casualties(&s, &cov, &Placement::default()).unwrap();
        assert_eq!(empty.expected_casualties, 10.0);
        assert!((empty.paper_objective_value - 9.0).abs() < 1e-12);
        assert!((paper_objective(&s, &cov, &Placement::default()).unwrap() - 9.0).abs() < 1e-12);

        let both = Placement::new([CellId(2)], [CellId(3)]);
        let b = expected_casualties(&s, &cov, &both).unwrap();
        assert!((b.expected_casualties - 6.25).abs() < 1e-12);
        assert!((paper_objective(&s, &cov, &both).unwrap() - 5.25).abs() < 1e-12);

        // Primary only: nothing confirms, nothing is saved.
        let (s, cov) = single_pair(1.0 - (-1f64).exp(), 0.5);
        let b = expected_casualties(&s, &cov, &Placement::new([CellId(2)], [])).unwrap();
        assert_eq!(b.expected_casualties, 10.0);
        assert_eq!(b.pairs[0].success_factor, 1.0);
    }

    #[test]
    fn rejects_bad_placements() {
        let (s, cov) = single_pair(0.5, 0.5);
        assert_eq!(
            expected_casualties(&s, &cov, &Placement::new([CellId(4)], [])),
            Err(ObjectiveError::IneligibleCell(CellId(4), "primary"))
        );
        let mut cov2 = cov.clone();
        cov2.candidates_primary.insert(CellId(3));
        assert_eq!(
            paper_objective(&s, &cov2, &Placement::new([CellId(3)], [CellId(3)])),
            Err(ObjectiveError::CoLocated(CellId(3)))
        );
        let v = Placement::new([], [CellId(3)]).constraint_violations(&s, &cov);
        assert_eq!(v.len(), 1, "{v:?}");
    }

    #[test]
    fn secondary_only_uses_theta2() {
        let (s, cov) = single_pair(0.5, 0.5);
        let b = expected_casualties(&s, &cov, &Placement::new([], [CellId(3)])).unwrap();
        assert!((b.pairs[0].success_factor - (1.0 - 0.6 * 0.5)).abs() < 1e-15);
    }
}
