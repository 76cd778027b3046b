//! Exhaustive search over cut multisets on a uniform grid.
//!
//! Candidates are visited in lexicographic order: leftmost sign `-` before `+`,
//! then cut indices in increasing order. Pruning never discards a feasible
//! candidate, so the first hit is the lexicographically least grid solution.

use super::{CHInstance, CutPartition, GridEvaluator, HalvingError, Sign};
use crate::rational::Rational;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Depths below this many placed cuts are explored in parallel.
    pub parallel_depth: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { parallel_depth: 3 }
    }
}

/// Looks for an `eps`-solution whose `cuts` cuts (with repetition) all lie on
/// the grid `lo + j * L / cells`. Returns the canonical form of the first one found.
pub fn oracle_solve(
    inst: &CHInstance,
    eps: &Rational,
    cuts: usize,
    cells: u64,
) -> Result<Option<CutPartition>, HalvingError> {
    oracle_solve_with(inst, eps, cuts, cells, &OracleOptions::default())
}

pub fn oracle_solve_with(
    inst: &CHInstance,
    eps: &Rational,
    cuts: usize,
    cells: u64,
    opts: &OracleOptions,
) -> Result<Option<CutPartition>, HalvingError> {
    let ev = GridEvaluator::new(inst, cells)?;
    let Some(search) = Search::new(inst, &ev, eps, cuts, opts.parallel_depth)? else {
        return Ok(None);
    };
    for sign in [Sign::Minus, Sign::Plus] {
        let part = vec![0i128; search.order.len()];
        if let Some(path) = search.dfs(0, 0, sign.as_i32() as i128, &part, 0) {
            let positions = path.iter().map(|&k| ev.position(k)).collect();
            return CutPartition::new(inst.domain(), positions, sign).map(Some);
        }
    }
    Ok(None)
}

struct Search<'a> {
    ev: &'a GridEvaluator,
    thr: i128,
    budget: usize,
    cells: i64,
    par_depth: usize,
    // agents with positive mass, by increasing closing index
    order: Vec<usize>,
    close_idx: Vec<i64>,
    // first admissible index for the next cut when `r` cuts remain after it
    start_for: Vec<i64>,
    end_after: Vec<i64>,
}

impl<'a> Search<'a> {
    fn new(
        inst: &CHInstance,
        ev: &'a GridEvaluator,
        eps: &Rational,
        budget: usize,
        par_depth: usize,
    ) -> Result<Option<Self>, HalvingError> {
        let thr = ev.threshold(eps)?;
        let cells = ev.cells() as i64;
        let mut order = Vec::new();
        // shortest grid range [jl, jr] starting at jl that must hold a cut
        let mut need: Vec<i64> = vec![i64::MAX; cells as usize + 2];
        for (i, a) in inst.agents().iter().enumerate() {
            let Some((slo, shi)) = a.support_hull() else { continue };
            let total = ev.total(i);
            if total == 0 {
                continue;
            }
            // closes once a cut reaches the first grid point at or right of `shi`
            let close = ev.index_ceil(&shi).ok_or(HalvingError::Precision)?;
            order.push((close, i));
            if total <= thr {
                continue;
            }
            // with no cut in [jl, jr] the piece over (jl - 1, jr + 1) has one
            // sign, which fails once it carries more than (total + thr) / 2
            let first = (ev.index_floor(&slo).ok_or(HalvingError::Precision)? + 1).max(1);
            let mut found = false;
            let mut jr = first;
            for jl in first..close.min(cells) {
                jr = jr.max(jl);
                while jr < cells && 2 * (ev.cum(i, jr + 1) - ev.cum(i, jl - 1)) <= total + thr {
                    jr += 1;
                }
                if jr >= cells {
                    break;
                }
                found = true;
                let slot = &mut need[jl as usize];
                *slot = (*slot).min(jr);
            }
            if !found {
                // no grid point splits this agent
                return Ok(None);
            }
        }
        order.sort();
        let close_idx = order.iter().map(|&(c, _)| c).collect();
        let order = order.into_iter().map(|(_, i)| i).collect();
        // lb[p]: most pairwise-disjoint required ranges starting at or after p
        let mut lb = vec![0usize; cells as usize + 3];
        for p in (0..=cells as usize).rev() {
            let mut best = lb[p + 1];
            if need[p] != i64::MAX {
                best = best.max(1 + lb[(need[p] + 1) as usize]);
            }
            lb[p] = best;
        }
        if lb[0] > budget {
            return Ok(None);
        }
        let start_for = (0..budget)
            .map(|r| {
                (0..=cells)
                    .find(|&x| lb[(x + 1) as usize] <= r)
                    .unwrap_or(cells + 1)
            })
            .collect();
        // end_after[p]: the next cut after one at p may not pass this index
        let mut end_after = vec![i64::MAX; cells as usize + 2];
        for p in (0..=cells as usize).rev() {
            end_after[p] = end_after[p + 1].min(need[p + 1]);
        }
        Ok(Some(Self { ev, thr, budget, cells, par_depth, order, close_idx, start_for, end_after }))
    }

    #[inline]
    fn cum(&self, t: usize, k: i64) -> i128 {
        self.ev.cum(self.order[t], k)
    }

    /// Final value of agent `t` when the piece starting at `p` with `sign` covers its rest.
    #[inline]
    fn final_value(&self, t: usize, p: i64, sign: i128, part: &[i128]) -> i128 {
        part[t] + sign * (self.ev.total(self.order[t]) - self.cum(t, p))
    }

    fn child(&self, depth: usize, p: i64, x: i64, sign: i128, part: &[i128], closed: usize) -> Option<Vec<i64>> {
        let mut next = part.to_vec();
        for t in closed..self.order.len() {
            let fx = self.cum(t, x);
            next[t] += sign * (fx - self.cum(t, p));
            let rest = self.ev.total(self.order[t]) - fx;
            if next[t].abs() > rest + self.thr {
                return None;
            }
        }
        let mut path = self.dfs(depth + 1, x, -sign, &next, closed)?;
        path.insert(0, x);
        Some(path)
    }

    fn dfs(&self, depth: usize, p: i64, sign: i128, part: &[i128], closed: usize) -> Option<Vec<i64>> {
        let n = self.order.len();
        if depth == self.budget {
            return (closed..n)
                .all(|t| self.final_value(t, p, sign, part).abs() <= self.thr)
                .then(Vec::new);
        }
        let remaining = self.budget - depth - 1;
        let x0 = p.max(self.start_for[remaining]);
        if x0 > self.cells {
            return None;
        }
        // agents that close at x fail for every later x as well
        let mut x_end = (self.cells + 1).min(self.end_after[p as usize].saturating_add(1));
        for t in closed..n {
            if self.final_value(t, p, sign, part).abs() > self.thr {
                x_end = x_end.min(self.close_idx[t].max(p));
                break;
            }
        }
        if x0 >= x_end {
            return None;
        }
        let closed_at = |x: i64| closed + self.close_idx[closed..].partition_point(|&c| c <= x);
        if depth < self.par_depth {
            (x0..x_end)
                .into_par_iter()
                .find_map_first(|x| self.child(depth, p, x, sign, part, closed_at(x)))
        } else {
            let mut c = closed_at(x0);
            for x in x0..x_end {
                while c < n && self.close_idx[c] <= x {
                    c += 1;
                }
                if let Some(path) = self.child(depth, p, x, sign, part, c) {
                    return Some(path);
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halving::{Domain, StepValuation};
    use crate::rational::{int, rat};

    fn inst(agents: Vec<StepValuation>) -> CHInstance {
        CHInstance::new(Domain::new(int(0), int(1)).unwrap(), agents).unwrap()
    }

    #[test]
    fn finds_halving_cut_for_uniform_agent() {
        let i = inst(vec![StepValuation::new(vec![int(0), int(1)], vec![int(1)]).unwrap()]);
        let p = oracle_solve(&i, &int(0), 1, 10).unwrap().unwrap();
        assert_eq!(p.cuts(), &[rat(1, 2)]);
        assert_eq!(p.leftmost(), Sign::Minus);
    }

    #[test]
    fn lexicographic_first_within_tolerance() {
        let i = inst(vec![StepValuation::new(vec![int(0), int(1)], vec![int(1)]).unwrap()]);
        let p = oracle_solve(&i, &rat(1, 5), 1, 10).unwrap().unwrap();
        assert_eq!(p.cuts(), &[rat(2, 5)]);
    }

    #[test]
    fn reports_infeasible_budget() {
        // two agents on disjoint halves need two cuts
        let a = StepValuation::new(vec![int(0), rat(1, 2)], vec![int(1)]).unwrap();
        let b = StepValuation::new(vec![rat(1, 2), int(1)], vec![int(1)]).unwrap();
        let i = inst(vec![a, b]);
        assert_eq!(oracle_solve(&i, &rat(1, 100), 1, 8).unwrap(), None);
        let p = oracle_solve(&i, &rat(1, 100), 2, 8).unwrap().unwrap();
        assert_eq!(p.cuts(), &[rat(1, 4), rat(3, 4)]);
        assert!(i.is_eps_solution(&p, &int(0)));
    }

    #[test]
    fn no_cuts_needed_for_zero_agents() {
        let i = inst(vec![StepValuation::zero()]);
        let p = oracle_solve(&i, &int(0), 0, 3).unwrap().unwrap();
        assert_eq!(p.num_cuts(), 0);
    }

    #[test]
    fn extra_budget_may_be_absorbed() {
        let i = inst(vec![StepValuation::new(vec![int(0), int(1)], vec![int(1)]).unwrap()]);
        let p = oracle_solve(&i, &int(0), 3, 4).unwrap().unwrap();
        assert!(i.is_eps_solution(&p, &int(0)));
    }
}
