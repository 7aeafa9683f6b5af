use super::model::PlacementModel;
use super::relaxation::RelaxationNode;

/// Values within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
const FRACTION_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchVar {
    /// Index into `PlacementModel::primary_cells`.
    Primary(usize),
    /// Index into `PlacementModel::secondary_cells`.
    Secondary(usize),
}

fn is_integral(v: f64) -> bool {
    v.min(1.0 - v).abs() <= INTEGRALITY_TOL
}

/// Most fractional free variable of an LP solution: smallest `|v - 0.5|`,
/// ties to the lower cell index, primary before secondary on the same cell.
/// `None` when every free variable is integral.
pub fn select_branch(
    model: &PlacementModel,
    node: &RelaxationNode,
    primary: &[f64],
    secondary: &[f64],
) -> Option<BranchVar> {
    let candidates = node
        .fix_primary
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_none())
        .map(|(i, _)| (model.primary_cells[i], 0u8, primary[i], BranchVar::Primary(i)))
        .chain(
            node.fix_secondary
                .iter()
                .enumerate()
                .filter(|(_, f)| f.is_none())
                .map(|(k, _)| (model.secondary_cells[k], 1u8, secondary[k], BranchVar::Secondary(k))),
        )
        .filter(|&(_, _, v, _)| !is_integral(v));

    let mut best: Option<(f64, (crate::scenario::CellId, u8), BranchVar)> = None;
    for (cell, kind, v, var) in candidates {
        let frac = (v - 0.5).abs();
        let take = match &best {
            None => true,
            Some((bf, key, _)) => {
                frac < bf - FRACTION_TIE || (frac <= bf + FRACTION_TIE && (cell, kind) < *key)
            }
        };
        if take {
            best = Some((frac, (cell, kind), var));
        }
    }
    best.map(|(_, _, var)| var)
}

/// First free variable, preferring ones the LP set to 1; used when the LP
/// point is integral but its relaxed value undershoots the exact objective.
pub(crate) fn select_free(
    model: &PlacementModel,
    node: &RelaxationNode,
    primary: &[f64],
    secondary: &[f64],
) -> Option<BranchVar> {
    let free = node
        .fix_primary
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_none())
        .map(|(i, _)| (model.primary_cells[i], 0u8, primary[i], BranchVar::Primary(i)))
        .chain(
            node.fix_secondary
                .iter()
                .enumerate()
                .filter(|(_, f)| f.is_none())
                .map(|(k, _)| (model.secondary_cells[k], 1u8, secondary[k], BranchVar::Secondary(k))),
        );
    free.min_by(|a, b| {
        let ka = (a.2 < 0.5, a.0, a.1);
        let kb = (b.2 < 0.5, b.0, b.1);
        ka.cmp(&kb)
    })
    .map(|c| c.3)
}

/// Splits `node` on `var`. Children get ids `next_id` (fixed to 0) and
/// `next_id + 1` (fixed to 1), inherit the parent bound and carry propagated
/// fixings. Children whose fixings are already infeasible are dropped.
pub fn branch(
    model: &PlacementModel,
    node: &RelaxationNode,
    var: BranchVar,
    next_id: u64,
) -> Vec<RelaxationNode> {
    [false, true]
        .into_iter()
        .enumerate()
        .filter_map(|(offset, value)| {
            let mut child = node.clone();
            child.id = next_id + offset as u64;
            child.depth = node.depth + 1;
            match var {
                BranchVar::Primary(i) => child.fix_primary[i] = Some(value),
                BranchVar::Secondary(k) => child.fix_secondary[k] = Some(value),
            }
            child.propagate(model).then_some(child)
        })
        .collect()
}
