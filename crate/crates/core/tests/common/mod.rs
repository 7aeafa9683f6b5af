#![allow(dead_code)]

use std::collections::BTreeSet;

use detector_placement::coverage::{build_coverage, CoverageTable};
use detector_placement::objective::Placement;
use detector_placement::pathing::all_paths;
use detector_placement::solver::{PlacementModel, RelaxationNode};
use detector_placement::scenario::{
    validate_scenario, CellId, DetectorSpec, GammaEntry, GridScenario, Target,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub scenario: GridScenario,
    pub coverage: CoverageTable,
}

impl Instance {
    pub fn candidates(&self) -> usize {
        self.coverage.candidates_primary.len() + self.coverage.candidates_secondary.len()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn detector(rng: &mut ChaCha8Rng, cell: f64) -> DetectorSpec {
    let count = rng.gen_range(1..=3);
    DetectorSpec {
        alpha_m: cell * rng.gen_range(0.3..1.2),
        beta_per_m: rng.gen_range(0.1..2.0),
        psi: 1.0,
        budget: count as f64,
    }
}

/// Random valid scenario, not yet filtered by candidate count.
pub fn random_scenario(rng: &mut ChaCha8Rng, max_side: usize) -> GridScenario {
    loop {
        let rows = rng.gen_range(2..=max_side);
        let cols = rng.gen_range(2..=max_side);
        let n = rows * cols;
        let cell_size_m = rng.gen_range(1.0..3.0);
        let mut cells: Vec<usize> = (1..=n).collect();
        cells.shuffle(rng);
        let n_ent = rng.gen_range(1..=2);
        let n_tgt = rng.gen_range(1..=2);
        let entrances: Vec<CellId> = cells[..n_ent].iter().map(|&c| CellId(c)).collect();
        let targets: Vec<Target> = cells[n_ent..n_ent + n_tgt]
            .iter()
            .map(|&c| Target {
                cell: CellId(c),
                zeta: rng.gen_range(1.0..20.0),
            })
            .collect();
        let rest = &cells[n_ent + n_tgt..];
        let n_blocked = rng.gen_range(0..=rest.len() / 5);
        let mut blocked: Vec<CellId> = rest[..n_blocked].iter().map(|&c| CellId(c)).collect();
        blocked.sort();

        let mut weights = Vec::new();
        for e in &entrances {
            for t in &targets {
                weights.push((*e, t.cell, rng.gen_range(0.05..1.0)));
            }
        }
        let total: f64 = weights.iter().map(|w| w.2).sum();
        let mut gamma: Vec<GammaEntry> = weights
            .iter()
            .map(|&(entrance, target, w)| GammaEntry {
                entrance,
                target,
                p: w / total,
            })
            .collect();
        let drift = 1.0 - gamma.iter().map(|g| g.p).sum::<f64>();
        gamma[0].p += drift;

        let theta1 = rng.gen_range(0.0..=1.0);
        let theta2 = rng.gen_range(0.0..=theta1);
        let s = GridScenario {
            rows,
            cols,
            cell_size_m,
            blocked,
            entrances,
            targets,
            gamma,
            speed_k_mps: rng.gen_range(0.5..3.0),
            response_time_chi_s: rng.gen_range(0.0..2.0),
            theta1,
            theta2,
            primary: detector(rng, cell_size_m),
            secondary: detector(rng, cell_size_m),
        };
        if validate_scenario(&s).is_valid() {
            return s;
        }
    }
}

pub fn coverage_of(s: &GridScenario) -> CoverageTable {
    let paths = all_paths(s).expect("validated scenario has paths");
    build_coverage(s, &paths)
}

/// Random instance on a grid of at most `max_side`² cells with
/// `1 <= |P| + |S| <= max_candidates`.
pub fn random_instance(rng: &mut ChaCha8Rng, max_side: usize, max_candidates: usize) -> Instance {
    loop {
        let scenario = random_scenario(rng, max_side);
        let coverage = coverage_of(&scenario);
        let inst = Instance { scenario, coverage };
        let c = inst.candidates();
        if (1..=max_candidates).contains(&c) {
            return inst;
        }
    }
}

/// Random feasible placement: X within budget, Y only alongside some X and
/// never on an X cell.
pub fn random_placement(
    rng: &mut ChaCha8Rng,
    inst: &Instance,
) -> (BTreeSet<CellId>, BTreeSet<CellId>) {
    let s = &inst.scenario;
    let mut p: Vec<CellId> = inst.coverage.candidates_primary.iter().copied().collect();
    p.shuffle(rng);
    let kx = rng.gen_range(0..=s.primary.max_count().min(p.len()));
    let x: BTreeSet<CellId> = p[..kx].iter().copied().collect();
    if x.is_empty() {
        return (x, BTreeSet::new());
    }
    let mut q: Vec<CellId> = inst
        .coverage
        .candidates_secondary
        .iter()
        .copied()
        .filter(|c| !x.contains(c))
        .collect();
    q.shuffle(rng);
    let ky = rng.gen_range(0..=s.secondary.max_count().min(q.len()));
    (x, q[..ky].iter().copied().collect())
}

/// Independent check of the placement constraints: budgets, eligibility, no
/// co-located layers, secondaries only alongside a primary.
pub fn placement_problems(s: &GridScenario, cov: &CoverageTable, pl: &Placement) -> Vec<String> {
    let mut out = Vec::new();
    if pl.primary.len() as f64 * s.primary.psi > s.primary.budget {
        out.push(format!("primary budget exceeded by {:?}", pl.primary));
    }
    if pl.secondary.len() as f64 * s.secondary.psi > s.secondary.budget {
        out.push(format!("secondary budget exceeded by {:?}", pl.secondary));
    }
    if !pl.primary.is_subset(&cov.candidates_primary) {
        out.push("ineligible primary cell".into());
    }
    if !pl.secondary.is_subset(&cov.candidates_secondary) {
        out.push("ineligible secondary cell".into());
    }
    if !pl.primary.is_disjoint(&pl.secondary) {
        out.push("co-located detectors".into());
    }
    if pl.primary.is_empty() && !pl.secondary.is_empty() {
        out.push("secondary without primary".into());
    }
    out
}

/// Visits every feasible integer completion of `node` as indicator vectors.
pub fn completions(model: &PlacementModel, node: &RelaxationNode, mut visit: impl FnMut(&[bool], &[bool])) {
    let np = model.num_primary();
    let fixed: Vec<Option<bool>> = node.fix_primary.iter().chain(&node.fix_secondary).copied().collect();
    let b = model.budgets;
    let mut bits = vec![false; fixed.len()];
    fn rec(
        k: usize,
        np: usize,
        counts: (usize, usize),
        fixed: &[Option<bool>],
        bits: &mut Vec<bool>,
        b: &detector_placement::solver::Budgets,
        model: &PlacementModel,
        visit: &mut dyn FnMut(&[bool], &[bool]),
    ) {
        let over = counts.0 as f64 * b.primary_psi > b.primary_budget
            || counts.1 as f64 * b.secondary_psi > b.secondary_budget;
        if over {
            return;
        }
        if k == bits.len() {
            let (x, y) = bits.split_at(np);
            let linked = counts.1 == 0 || counts.0 > 0;
            let apart = model.shared.iter().all(|&(i, j)| !(x[i] && y[j]));
            if linked && apart {
                visit(x, y);
            }
            return;
        }
        for v in [false, true] {
            if fixed[k].is_some_and(|f| f != v) {
                continue;
            }
            bits[k] = v;
            let c = match (v, k < np) {
                (false, _) => counts,
                (true, true) => (counts.0 + 1, counts.1),
                (true, false) => (counts.0, counts.1 + 1),
            };
            rec(k + 1, np, c, fixed, bits, b, model, visit);
        }
        bits[k] = false;
    }
    rec(0, np, (0, 0), &fixed, &mut bits, &b, model, &mut visit);
}

/// Simulates attacks one by one: draw a route by its attack probability,
/// draw every detector on it independently, then the interdiction outcome.
/// Returns the sample mean of casualties and its standard error.
pub fn monte_carlo(
    s: &GridScenario,
    cov: &CoverageTable,
    pl: &Placement,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let routes: Vec<_> = s.gamma.iter().filter(|g| g.p > 0.0).collect();
    let mut cum = Vec::new();
    let mut acc = 0.0;
    for g in &routes {
        acc += g.p;
        cum.push(acc);
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cum.iter().position(|&c| u < c).unwrap_or(routes.len() - 1);
        let g = routes[idx];
        let pair = detector_placement::scenario::Pair::new(g.entrance, g.target);
        let row = &cov.pairs[&pair];
        let mut primary_alarm = false;
        for c in &pl.primary {
            let rho = row.primary.get(c).copied().unwrap_or(0.0);
            primary_alarm |= rng.gen::<f64>() < rho;
        }
        let mut secondary_alarm = false;
        for c in &pl.secondary {
            let rho = row.secondary.get(c).copied().unwrap_or(0.0);
            secondary_alarm |= rng.gen::<f64>() < rho;
        }
        let stop = match (primary_alarm, secondary_alarm) {
            (true, true) => s.theta1,
            (false, true) => s.theta2,
            _ => 0.0,
        };
        let casualties = if rng.gen::<f64>() < stop { 0.0 } else { s.zeta(g.target).unwrap() };
        sum += casualties;
        sum_sq += casualties * casualties;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}
