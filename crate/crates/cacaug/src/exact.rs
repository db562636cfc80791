//! Exact solvers and minimality checks.

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use thiserror::Error;

use crate::cactus::{CactusInstance, Rational, Solution};
use crate::lp::{cut_lp_restricted, LpError};

pub const BRUTEFORCE_MAX_LINKS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("instance is infeasible: cut {cut} has no covering link")]
    Infeasible { cut: usize },
    #[error("instance too large for exhaustive search ({0} links)")]
    TooLarge(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub solution: Solution,
    pub optimal: bool,
    pub nodes: usize,
    pub lower_bound: Rational,
}

/// Exhaustive minimum over all link subsets; ties go to the
/// lexicographically smallest sorted id list.
pub fn solve_bruteforce(inst: &CactusInstance) -> Result<Solution, ExactError> {
    let nl = inst.links().len();
    if nl > BRUTEFORCE_MAX_LINKS {
        return Err(ExactError::TooLarge(nl));
    }
    if let Some(cut) = inst.infeasible_cut() {
        return Err(ExactError::Infeasible { cut });
    }
    let nc = inst.num_cuts();
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << nl) {
        let ids: Vec<usize> = (0..nl).filter(|&l| mask >> l & 1 == 1).collect();
        let cov = inst.coverage().union_of(&ids, nc);
        if cov.count_ones(..) != nc {
            continue;
        }
        let cost = inst.cost_of(&ids);
        let better = match &best {
            None => true,
            Some((bc, bi)) => cost < *bc || (cost == *bc && ids < *bi),
        };
        if better {
            best = Some((cost, ids));
        }
    }
    let (cost, links) = best.expect("feasible instance has a solution");
    Ok(Solution { links, cost })
}

fn greedy(inst: &CactusInstance, allowed: &[bool]) -> Option<Vec<usize>> {
    let nc = inst.num_cuts();
    let mut cov = FixedBitSet::with_capacity(nc);
    let mut chosen = Vec::new();
    while cov.count_ones(..) < nc {
        let mut best: Option<(Rational, usize)> = None;
        for (l, link) in inst.links().iter().enumerate() {
            if !allowed[l] {
                continue;
            }
            let mut row = inst.coverage().row(l).clone();
            row.difference_with(&cov);
            let gain = row.count_ones(..);
            if gain == 0 {
                continue;
            }
            let score = &link.cost / Rational::from_integer(gain.into());
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, l));
            }
        }
        let (_, l) = best?;
        cov.union_with(inst.coverage().row(l));
        chosen.push(l);
    }
    Some(chosen)
}

struct Search<'a> {
    inst: &'a CactusInstance,
    budget: usize,
    nodes: usize,
    aborted: bool,
    best_cost: Rational,
    best: Vec<usize>,
    state: Vec<Option<bool>>,
}

impl Search<'_> {
    fn run(&mut self) {
        if self.nodes >= self.budget {
            self.aborted = true;
            return;
        }
        self.nodes += 1;
        let inst = self.inst;
        let chosen: Vec<usize> = (0..self.state.len()).filter(|&l| self.state[l] == Some(true)).collect();
        let cov = inst.coverage().union_of(&chosen, inst.num_cuts());
        // most constrained uncovered cut
        let mut pick: Option<(usize, Vec<usize>)> = None;
        for c in 0..inst.num_cuts() {
            if cov.contains(c) {
                continue;
            }
            let avail: Vec<usize> = (0..self.state.len())
                .filter(|&l| self.state[l].is_none() && inst.coverage().covers(l, c))
                .collect();
            if avail.is_empty() {
                return;
            }
            if pick.as_ref().is_none_or(|(_, a)| avail.len() < a.len()) {
                pick = Some((c, avail));
            }
        }
        let Some((_, avail)) = pick else {
            let cost = inst.cost_of(&chosen);
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = chosen;
            }
            return;
        };
        let lp = match cut_lp_restricted(inst, &self.state) {
            Ok(s) => s,
            Err(_) => return,
        };
        if lp.value >= self.best_cost {
            return;
        }
        if lp.x.iter().all(|v| v.is_integer()) {
            let sol: Vec<usize> = (0..lp.x.len()).filter(|&l| !lp.x[l].is_zero()).collect();
            self.best_cost = inst.cost_of(&sol);
            self.best = sol;
            return;
        }
        let saved = self.state.clone();
        for l in avail {
            self.state[l] = Some(true);
            self.run();
            self.state[l] = Some(false);
            if self.aborted {
                break;
            }
        }
        self.state = saved;
    }
}

/// Covering branch and bound with cut-LP bounds.
pub fn solve_exact(inst: &CactusInstance, budget: usize) -> Result<ExactResult, ExactError> {
    if let Some(cut) = inst.infeasible_cut() {
        return Err(ExactError::Infeasible { cut });
    }
    let nl = inst.links().len();
    let start = greedy(inst, &vec![true; nl]).expect("feasible instance");
    let root = cut_lp_restricted(inst, &vec![None; nl])?;
    let mut s = Search {
        inst,
        budget,
        nodes: 0,
        aborted: false,
        best_cost: inst.cost_of(&start),
        best: start,
        state: vec![None; nl],
    };
    s.run();
    let solution = Solution::new(inst, s.best);
    Ok(ExactResult { optimal: !s.aborted, nodes: s.nodes, lower_bound: root.value, solution })
}

/// `l1` is minimal with respect to `l2`: every proper shadow of `l1` loses
/// some cut covered by the pair, and `l2` alone covers strictly less.
pub fn is_minimal_wrt(inst: &CactusInstance, l1: usize, l2: usize) -> bool {
    let cov = inst.coverage();
    let mut pair = cov.row(l1).clone();
    pair.union_with(cov.row(l2));
    let shadows = inst.shadow_pairs(l1);
    if shadows.is_empty() {
        return true;
    }
    if *cov.row(l2) == pair {
        return false;
    }
    shadows.into_iter().all(|(a, b)| {
        let mut s = inst.pair_coverage(a, b);
        s.union_with(cov.row(l2));
        s != pair
    })
}

/// `F` is `L'`-minimal: each `ℓ' ∈ F ∩ L'` is minimal with respect to every other `ℓ ∈ F`.
pub fn is_lprime_minimal(inst: &CactusInstance, f: &[usize], lprime: &[usize]) -> bool {
    f.iter()
        .filter(|l| lprime.contains(l))
        .all(|&a| f.iter().all(|&b| a == b || is_minimal_wrt(inst, a, b)))
}

/// Σ over links of the number of vertices on every path between the endpoints.
pub fn shadow_potential(inst: &CactusInstance, f: &[usize]) -> usize {
    f.iter().map(|&l| inst.path_core(inst.link(l).u, inst.link(l).v).len()).sum()
}

/// Repeatedly drop links or swap them for cheaper-or-equal shadows while
/// feasibility is kept. Each step lowers [`shadow_potential`].
pub fn shadow_minimal(inst: &CactusInstance, f: &[usize]) -> Vec<usize> {
    let mut cur: Vec<usize> = f.to_vec();
    cur.sort_unstable();
    cur.dedup();
    loop {
        let before = shadow_potential(inst, &cur);
        let mut changed = false;
        'outer: for i in 0..cur.len() {
            let l = cur[i];
            let mut rest = cur.clone();
            rest.remove(i);
            if inst.is_feasible(&rest) {
                cur = rest;
                changed = true;
                break;
            }
            let link = inst.link(l);
            for (a, b) in inst.shadow_pairs(l) {
                let cand = inst.links().iter().find(|m| m.endpoints() == (a, b) && m.cost <= link.cost);
                if let Some(m) = cand {
                    let mut next = rest.clone();
                    next.push(m.id);
                    if inst.is_feasible(&next) {
                        next.sort_unstable();
                        next.dedup();
                        cur = next;
                        changed = true;
                        break 'outer;
                    }
                }
            }
        }
        if !changed {
            return cur;
        }
        assert!(shadow_potential(inst, &cur) < before, "replacement must lower the potential");
    }
}
