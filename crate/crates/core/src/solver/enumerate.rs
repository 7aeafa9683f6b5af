use super::model::PlacementModel;
use super::{Incumbent, SolveError, SolveResult, SolveStatus};

/// Largest `|P| + |S|` accepted by [`enumerate_optimal`](super::enumerate_optimal).
pub const ENUMERATION_LIMIT: usize = 24;

/// Visits every subset of `0..n` with at most `k` elements, in lexicographic
/// order of the sorted member lists.
pub(crate) fn for_each_subset(
    n: usize,
    k: usize,
    mut allowed: impl FnMut(usize) -> bool,
    mut visit: impl FnMut(&[usize]),
) {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        stack: &mut Vec<usize>,
        allowed: &mut dyn FnMut(usize) -> bool,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        visit(stack);
        if stack.len() == k {
            return;
        }
        for i in start..n {
            if allowed(i) {
                stack.push(i);
                rec(i + 1, n, k, stack, allowed, visit);
                stack.pop();
            }
        }
    }
    rec(0, n, k, &mut Vec::new(), &mut allowed, &mut visit);
}

pub(crate) fn enumerate(model: &PlacementModel) -> Result<SolveResult, SolveError> {
    let (np, ns) = (model.num_primary(), model.num_secondary());
    if np + ns > ENUMERATION_LIMIT {
        return Err(SolveError::InstanceTooLarge {
            candidates: np + ns,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut blocked_by_primary = vec![None; np];
    for &(i, k) in &model.shared {
        blocked_by_primary[i] = Some(k);
    }

    let mut best = Incumbent::empty(model);
    let mut x = vec![false; np];
    let mut y = vec![false; ns];
    let mut count = 0usize;
    for_each_subset(np, model.max_primary, |_| true, |xs| {
        x.iter_mut().for_each(|b| *b = false);
        let mut excluded = vec![false; ns];
        for &i in xs {
            x[i] = true;
            if let Some(k) = blocked_by_primary[i] {
                excluded[k] = true;
            }
        }
        let ky = if xs.is_empty() { 0 } else { model.max_secondary };
        for_each_subset(ns, ky, |k| !excluded[k], |ys| {
            y.iter_mut().for_each(|b| *b = false);
            for &k in ys {
                y[k] = true;
            }
            count += 1;
            debug_assert!(model.is_feasible(&x, &y));
            best.offer(model, &x, &y, model.evaluate(&x, &y));
        });
    });

    Ok(SolveResult {
        placement: model.placement(&best.x, &best.y),
        objective: best.value,
        lower_bound: best.value,
        relative_gap: 0.0,
        nodes_explored: count as u64,
        status: SolveStatus::Optimal,
    })
}
