//! Splitting at big light 2-cuts, merging child solutions, and the
//! recursive driver down to k-wide pieces.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cactus::{rat, to_f64, CactusInstance, Contraction, InstanceError, Rational, Solution};
use crate::heavy::{cover_heavy_cuts, HeavyError};
use crate::lp::{cut_lp, LpError};

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("instance is infeasible: cut {0} has no covering link")]
    Infeasible(usize),
    #[error("eps must be positive")]
    BadEps,
    #[error("merge bound violated: {extra} extra links, allowed {allowed}")]
    MergeBound { extra: usize, allowed: usize },
    #[error("uncovered cuts after merging do not form a chain")]
    NotChain,
    #[error("subsolver failed: {0}")]
    Subsolver(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Heavy(#[from] HeavyError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Accuracy parameter; every threshold is derived from `eps`.
#[derive(Debug, Clone)]
pub struct Params {
    pub eps: Rational,
    /// Upper limit on `|S|` when guessing the links at the contracted vertex.
    pub s_cap: usize,
}

impl Params {
    pub fn new(eps: Rational) -> Result<Self, DecomposeError> {
        if eps <= Rational::zero() {
            return Err(DecomposeError::BadEps);
        }
        Ok(Params { eps, s_cap: 2 })
    }

    /// Width `64(8 + 3ε)/ε²`.
    pub fn k(&self) -> Rational {
        rat(64) * (rat(8) + rat(3) * &self.eps) / (&self.eps * &self.eps)
    }

    pub fn light_threshold(&self) -> Rational {
        rat(16) / &self.eps
    }

    pub fn big_threshold(&self) -> Rational {
        self.k() / rat(2)
    }

    /// `(1 + ε')/ε' · 16/ε` with `ε' = ε/4`, capped by `s_cap`.
    pub fn s_limit(&self) -> usize {
        let ep = &self.eps / rat(4);
        let bound = (Rational::one() + &ep) / &ep * self.light_threshold();
        let b = to_f64(&bound.floor()).max(0.0) as usize;
        b.min(self.s_cap)
    }
}

fn cut_load(inst: &CactusInstance, x: &[Rational], c: usize) -> Rational {
    (0..x.len()).filter(|&l| inst.coverage().covers(l, c)).fold(Rational::zero(), |a, l| a + &x[l])
}

fn terminals_in(inst: &CactusInstance, c: usize) -> usize {
    inst.cuts()[c].members.ones().filter(|&v| inst.is_terminal(v)).count()
}

/// Light, big, and not `V \ {r}`.
pub fn is_splittable_at(inst: &CactusInstance, x: &[Rational], params: &Params, c: usize) -> bool {
    inst.cuts()[c].len() != inst.n() - 1
        && cut_load(inst, x, c) <= params.light_threshold()
        && rat(terminals_in(inst, c) as i64) > params.big_threshold()
}

/// Smallest splittable cut, which is inclusion-wise minimal.
pub fn find_splittable_cut(inst: &CactusInstance, x: &[Rational], params: &Params) -> Option<usize> {
    (0..inst.num_cuts())
        .filter(|&c| is_splittable_at(inst, x, params, c))
        .min_by_key(|&c| (inst.cuts()[c].len(), c))
}

/// A center witnessing k-wideness for an unsplittable instance: the root, or
/// its partner when the root sits on a 2-cycle.
pub fn unsplittable_center(inst: &CactusInstance, params: &Params) -> Option<usize> {
    let k = params.k();
    let mut cands = vec![inst.root()];
    for c in inst.cycles() {
        if c.len() == 2 && c.contains(&inst.root()) {
            cands.extend(c.iter().copied().filter(|&v| v != inst.root()));
        }
    }
    cands.into_iter().find(|&r| rat(inst.principal_structure(r).width() as i64) <= k)
}

#[derive(Debug, Clone)]
pub struct Split {
    /// `G` with `V \ C` contracted to `s`, rooted at `s`.
    pub inner: Contraction,
    /// `G` with `C` contracted to `s'`.
    pub outer: Contraction,
    pub s_inner: usize,
    pub s_outer: usize,
}

pub fn split_at_cut(inst: &CactusInstance, c: usize) -> Split {
    let members = &inst.cuts()[c].members;
    let rep_in = members.ones().next().expect("cuts are non-empty");
    let r = inst.root();
    let g_in: Vec<usize> = (0..inst.n()).map(|v| if members.contains(v) { v } else { r }).collect();
    let g_out: Vec<usize> = (0..inst.n()).map(|v| if members.contains(v) { rep_in } else { v }).collect();
    let inner = inst.contract(&g_in, Some(r));
    let outer = inst.contract(&g_out, None);
    let s_inner = inner.vertex_map[r];
    let s_outer = outer.vertex_map[rep_in];
    Split { inner, outer, s_inner, s_outer }
}

#[derive(Debug, Clone)]
pub struct MergeReport {
    pub extra: Vec<usize>,
    pub uncovered: Vec<usize>,
    pub crossing_in_inner: usize,
}

/// Links added so that the union of both child solutions becomes feasible.
/// `f_inner` and `f_outer` are given in ids of `inst`.
pub fn merge_solutions(
    inst: &CactusInstance,
    c: usize,
    f_inner: &[usize],
    f_outer: &[usize],
) -> Result<MergeReport, DecomposeError> {
    let mut union: Vec<usize> = f_inner.iter().chain(f_outer).copied().collect();
    union.sort_unstable();
    union.dedup();
    let uncovered = inst.uncovered(&union);
    let crossing_in_inner = f_inner.iter().filter(|&&l| inst.coverage().covers(l, c)).count();
    // orient each uncovered cut towards the first boundary edge of C; they must nest
    let (a, b) = inst.cuts()[c].boundary[0];
    let sides: Vec<fixedbitset::FixedBitSet> = uncovered
        .iter()
        .map(|&w| {
            let m = &inst.cuts()[w].members;
            if m.contains(a) && m.contains(b) {
                m.clone()
            } else {
                let mut comp = fixedbitset::FixedBitSet::with_capacity(inst.n());
                comp.insert_range(..);
                comp.difference_with(m);
                comp
            }
        })
        .collect();
    for s in &sides {
        if !(s.contains(a) && s.contains(b)) {
            return Err(DecomposeError::NotChain);
        }
    }
    for i in 0..sides.len() {
        for j in i + 1..sides.len() {
            if !sides[i].is_subset(&sides[j]) && !sides[j].is_subset(&sides[i]) {
                return Err(DecomposeError::NotChain);
            }
        }
    }
    let mut extra = Vec::new();
    let mut cur = union;
    while let Some(w) = inst.first_uncovered(&cur) {
        let l = (0..inst.links().len())
            .find(|&l| inst.coverage().covers(l, w))
            .ok_or(DecomposeError::Infeasible(w))?;
        extra.push(l);
        cur.push(l);
    }
    if !uncovered.is_empty() {
        let allowed = crossing_in_inner.saturating_sub(1);
        if extra.len() > allowed {
            return Err(DecomposeError::MergeBound { extra: extra.len(), allowed });
        }
    }
    Ok(MergeReport { extra, uncovered, crossing_in_inner })
}

pub type Subsolver<'a> = dyn Fn(&CactusInstance) -> Result<Solution, String> + Sync + 'a;

#[derive(Debug, Clone, Serialize)]
pub struct SplitNode {
    pub n: usize,
    pub links: usize,
    pub terminals: usize,
    /// Vertices of the chosen cut, in this node's labels.
    pub cut: Option<Vec<usize>>,
    pub s_inner: Option<usize>,
    pub s_outer: Option<usize>,
    pub extra_links: usize,
    pub solution_size: usize,
    pub children: Vec<SplitNode>,
}

#[derive(Debug, Clone)]
pub struct Decomposed {
    pub solution: Solution,
    pub heavy_links: Vec<usize>,
    pub splits: usize,
    pub subsolver_calls: usize,
    pub tree: SplitNode,
}

fn leaf(inst: &CactusInstance, size: usize) -> SplitNode {
    SplitNode {
        n: inst.n(),
        links: inst.links().len(),
        terminals: inst.terminals().len(),
        cut: None,
        s_inner: None,
        s_outer: None,
        extra_links: 0,
        solution_size: size,
        children: Vec::new(),
    }
}

fn map_x(x: &[Rational], link_map: &[Option<usize>], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (l, m) in link_map.iter().enumerate() {
        if let Some(j) = m {
            out[*j] += &x[l];
        }
    }
    out
}

fn back(c: &Contraction) -> Vec<usize> {
    let mut inv = vec![0; c.instance.links().len()];
    for (l, m) in c.link_map.iter().enumerate() {
        if let Some(j) = m {
            inv[*j] = l;
        }
    }
    inv
}

/// Best `S ∪ F'` over small `S ⊆ δ_L(s)`, scoring `c(F') + 2c(S)`.
fn solve_with_contracted_vertex(
    inst: &CactusInstance,
    s: usize,
    limit: usize,
    sub: &Subsolver<'_>,
    calls: &mut usize,
) -> Result<Vec<usize>, DecomposeError> {
    let at_s: Vec<usize> = (0..inst.links().len()).filter(|&l| inst.link(l).u == s || inst.link(l).v == s).collect();
    let others: Vec<usize> = (0..inst.links().len()).filter(|l| !at_s.contains(l)).collect();
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut subsets: Vec<Vec<usize>> = vec![Vec::new()];
    for size in 1..=limit.min(at_s.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            subsets.push(idx.iter().map(|&i| at_s[i]).collect());
            let mut i = size;
            while i > 0 && idx[i - 1] == at_s.len() - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    for set in subsets {
        let mut keep: Vec<usize> = others.clone();
        keep.extend(&set);
        keep.sort_unstable();
        let restricted = inst.with_links(keep.iter().map(|&l| inst.link(l).clone()).collect())?;
        let fixed: Vec<usize> = set.iter().map(|l| keep.binary_search(l).expect("kept")).collect();
        let res = restricted.residual_instance(&fixed)?;
        if res.instance.infeasible_cut().is_some() {
            continue;
        }
        *calls += 1;
        let f = sub(&res.instance).map_err(DecomposeError::Subsolver)?;
        let mut full: Vec<usize> = f.links.iter().map(|&l| keep[res.link_origin[l]]).collect();
        let score = inst.cost_of(&full) + rat(2) * inst.cost_of(&set);
        full.extend(&set);
        full.sort_unstable();
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, full));
        }
    }
    let (_, sol) = best.ok_or_else(|| DecomposeError::Infeasible(inst.infeasible_cut().unwrap_or(0)))?;
    debug_assert!(inst.is_feasible(&sol));
    Ok(sol)
}

struct Driver<'a, 'b> {
    params: &'a Params,
    sub: &'a Subsolver<'b>,
}

impl Driver<'_, '_> {
    fn recurse(
        &self,
        inst: &CactusInstance,
        x: &[Rational],
        splits: &mut usize,
        calls: &mut usize,
    ) -> Result<(Vec<usize>, SplitNode), DecomposeError> {
        if inst.num_cuts() == 0 {
            return Ok((Vec::new(), leaf(inst, 0)));
        }
        let Some(c) = find_splittable_cut(inst, x, self.params) else {
            assert!(unsplittable_center(inst, self.params).is_some(), "unsplittable instances are k-wide");
            *calls += 1;
            let sol = (self.sub)(inst).map_err(DecomposeError::Subsolver)?;
            return Ok((sol.links.clone(), leaf(inst, sol.links.len())));
        };
        *splits += 1;
        let split = split_at_cut(inst, c);
        let x_out = map_x(x, &split.outer.link_map, split.outer.instance.links().len());
        let limit = self.params.s_limit();
        let ((f_in, calls_in), outer) = rayon::join(
            || {
                let mut k = 0;
                let r = solve_with_contracted_vertex(&split.inner.instance, split.s_inner, limit, self.sub, &mut k);
                (r, k)
            },
            || {
                let (mut s, mut k) = (0, 0);
                let r = self.recurse(&split.outer.instance, &x_out, &mut s, &mut k);
                (r, s, k)
            },
        );
        let (f_out, sub_splits, calls_out) = outer;
        let f_in = f_in?;
        let (f_out, out_node) = f_out?;
        *splits += sub_splits;
        *calls += calls_in + calls_out;
        let inv_in = back(&split.inner);
        let inv_out = back(&split.outer);
        let f_in: Vec<usize> = f_in.iter().map(|&l| inv_in[l]).collect();
        let f_out: Vec<usize> = f_out.iter().map(|&l| inv_out[l]).collect();
        let report = merge_solutions(inst, c, &f_in, &f_out)?;
        let mut all: Vec<usize> = f_in.iter().chain(&f_out).chain(&report.extra).copied().collect();
        all.sort_unstable();
        all.dedup();
        let inner_node = leaf(&split.inner.instance, f_in.len());
        let node = SplitNode {
            n: inst.n(),
            links: inst.links().len(),
            terminals: inst.terminals().len(),
            cut: Some(inst.cuts()[c].vertices()),
            s_inner: Some(split.s_inner),
            s_outer: Some(split.s_outer),
            extra_links: report.extra.len(),
            solution_size: all.len(),
            children: vec![inner_node, out_node],
        };
        Ok((all, node))
    }
}

/// Heavy covering on the cut-LP optimum, then recursive splitting; k-wide
/// leaves go to `sub`.
pub fn solve_decomposed(inst: &CactusInstance, params: &Params, sub: &Subsolver<'_>) -> Result<Decomposed, DecomposeError> {
    if let Some(c) = inst.infeasible_cut() {
        return Err(DecomposeError::Infeasible(c));
    }
    let lp = cut_lp(inst)?;
    let heavy = cover_heavy_cuts(inst, &lp.x, &params.eps)?;
    let res = inst.residual_instance(&heavy.links)?;
    let x_res: Vec<Rational> = res.link_origin.iter().map(|&l| lp.x[l].clone()).collect();
    let driver = Driver { params, sub };
    let (mut splits, mut calls) = (0, 0);
    let (sol, tree) = driver.recurse(&res.instance, &x_res, &mut splits, &mut calls)?;
    let mut links: Vec<usize> = sol.iter().map(|&l| res.link_origin[l]).collect();
    links.extend(&heavy.links);
    let solution = Solution::new(inst, links);
    assert!(inst.is_feasible(&solution.links), "decomposed solution must be feasible");
    Ok(Decomposed { solution, heavy_links: heavy.links, splits, subsolver_calls: calls, tree })
}
