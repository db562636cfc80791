//! Rounding for k-wide instances: `L_cross`-minimal solutions per principal
//! subcactus, the bundle LP over explicit solution pools, sampling with
//! edge-cover reoptimisation of the cross-links, and derandomisation.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use num_traits::{One, Zero};
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cactus::{to_f64, CactusInstance, Contraction, InstanceError, LinkClass, PrincipalStructure, Rational};
use crate::exact::{is_lprime_minimal, is_minimal_wrt, solve_exact, ExactError};
use crate::lp::{simplex_solve, LinearProgram, LpError, Sense};

pub const EXACT_BUDGET: usize = 200_000;

#[derive(Debug, Error)]
pub enum KwideError {
    #[error("instance is not shadow-complete")]
    NotShadowComplete,
    #[error("subcactus {subcactus} has no feasible solution")]
    Infeasible { subcactus: usize },
    #[error("solution pool of subcactus {subcactus} exceeds {cap} entries")]
    PoolCap { subcactus: usize, cap: usize },
    #[error("objective must be positive on link {0}")]
    NonPositiveObjective(usize),
    #[error("vertex {0} has no incident edge")]
    IsolatedVertex(usize),
    #[error("too many elements for exhaustive search ({0})")]
    TooLarge(usize),
    #[error("exact solver exhausted its budget")]
    Budget,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// A shadow-complete instance rooted at its center, with its principal subcacti.
#[derive(Debug, Clone)]
pub struct KWide {
    pub inst: CactusInstance,
    pub center: usize,
    pub ps: PrincipalStructure,
    pub subs: Vec<Contraction>,
    minimal: HashMap<(usize, usize), bool>,
}

impl KWide {
    pub fn new(inst: &CactusInstance, center: usize) -> Result<Self, KwideError> {
        let inst = inst.rerooted(center)?;
        if !inst.is_shadow_complete() {
            return Err(KwideError::NotShadowComplete);
        }
        let ps = inst.principal_structure(center);
        let subs = (0..ps.components.len()).map(|i| inst.principal_subcactus(&ps, i)).collect();
        let mut minimal = HashMap::new();
        for a in ps.cross_links() {
            for b in 0..inst.links().len() {
                if a != b {
                    minimal.insert((a, b), is_minimal_wrt(&inst, a, b));
                }
            }
        }
        Ok(KWide { inst, center, ps, subs, minimal })
    }

    /// Close under shadows, then build around the given center.
    pub fn from_instance(inst: &CactusInstance, center: usize) -> Result<Self, KwideError> {
        Self::new(&inst.shadow_closure(), center)
    }

    /// Center with the fewest terminals in its largest component.
    pub fn best_center(inst: &CactusInstance) -> usize {
        (0..inst.n()).min_by_key(|&v| (inst.principal_structure(v).width(), v)).unwrap_or(0)
    }

    pub fn q(&self) -> usize {
        self.ps.components.len()
    }

    pub fn k_of(&self, i: usize) -> usize {
        self.ps.terminal_counts[i].max(1)
    }

    pub fn is_cross(&self, l: usize) -> bool {
        self.ps.class[l] == LinkClass::Cross
    }

    pub fn cross_links(&self) -> Vec<usize> {
        self.ps.cross_links()
    }

    /// Endpoint of `l` inside component `i`.
    pub fn endpoint_in(&self, l: usize, i: usize) -> usize {
        let link = self.inst.link(l);
        if self.ps.comp_of[link.u] == Some(i) {
            link.u
        } else {
            link.v
        }
    }

    /// The two components of a cross-link, lower index first.
    pub fn sides(&self, l: usize) -> (usize, usize) {
        let link = self.inst.link(l);
        let (a, b) = (self.ps.comp_of[link.u].expect("cross"), self.ps.comp_of[link.v].expect("cross"));
        (a.min(b), a.max(b))
    }

    pub fn comp_of_link(&self, l: usize) -> usize {
        let link = self.inst.link(l);
        self.ps.comp_of[link.u].or(self.ps.comp_of[link.v]).expect("links avoid looping at the center")
    }

    pub fn minimal(&self, a: usize, b: usize) -> bool {
        match self.minimal.get(&(a, b)) {
            Some(&m) => m,
            None => is_minimal_wrt(&self.inst, a, b),
        }
    }

    /// Cuts of `G` inside component `i`, i.e. the cuts of `G_i`.
    pub fn cuts_of(&self, i: usize) -> Vec<usize> {
        (0..self.inst.num_cuts())
            .filter(|&c| {
                let v = self.inst.cuts()[c].members.ones().next().expect("non-empty");
                self.ps.comp_of[v] == Some(i)
            })
            .collect()
    }

    /// Whether `links` covers every cut of `G_i`.
    pub fn feasible_for(&self, i: usize, links: &[usize]) -> bool {
        let cov = self.inst.coverage().union_of(links, self.inst.num_cuts());
        self.cuts_of(i).into_iter().all(|c| cov.contains(c))
    }

    pub fn in_links_of(&self, i: usize) -> Vec<usize> {
        self.ps.link_sets[i].iter().copied().filter(|&l| !self.is_cross(l)).collect()
    }

    pub fn cross_links_of(&self, i: usize) -> Vec<usize> {
        self.ps.link_sets[i].iter().copied().filter(|&l| self.is_cross(l)).collect()
    }

    /// Pairwise `L_cross`-minimal cross-link sets of size at most `k_i`.
    pub fn cross_sets(&self, i: usize) -> Vec<Vec<usize>> {
        let cands = self.cross_links_of(i);
        let k = self.k_of(i);
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.cross_sets_rec(&cands, 0, k, &mut cur, &mut out);
        out
    }

    fn cross_sets_rec(&self, cands: &[usize], start: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == k {
            return;
        }
        for j in start..cands.len() {
            let l = cands[j];
            if cur.iter().all(|&m| self.minimal(l, m) && self.minimal(m, l)) {
                cur.push(l);
                self.cross_sets_rec(cands, j + 1, k, cur, out);
                cur.pop();
            }
        }
    }

    /// In-links of `L_i` that no link of `x` fails to be minimal against.
    pub fn allowed_in_links(&self, i: usize, x: &[usize]) -> Vec<usize> {
        self.in_links_of(i)
            .into_iter()
            .filter(|&m| x.iter().all(|&l| self.minimal(l, m)))
            .collect()
    }

    /// `G_i` restricted to `keep` (original ids) with costs from `objective`.
    fn sub_instance(&self, i: usize, keep: &[usize], objective: Option<&[Rational]>) -> CactusInstance {
        let sub = &self.subs[i];
        let links = keep
            .iter()
            .map(|&l| {
                let mut link = sub.instance.link(sub.link_map[l].expect("link of L_i")).clone();
                link.origin = None;
                if let Some(obj) = objective {
                    link.cost = obj[l].clone();
                }
                link
            })
            .collect();
        sub.instance.with_links(links).expect("restriction of a valid instance")
    }
}

#[derive(Debug, Clone)]
pub struct SubSolution {
    pub links: Vec<usize>,
    pub value: Rational,
}

fn objective_value(obj: &[Rational], links: &[usize]) -> Rational {
    links.iter().fold(Rational::zero(), |a, &l| a + &obj[l])
}

/// Cheapest `L_cross`-minimal feasible solution of `G_i` under `objective`.
pub fn optimize_cross_minimal(kw: &KWide, i: usize, objective: &[Rational]) -> Result<SubSolution, KwideError> {
    for &l in &kw.ps.link_sets[i] {
        if objective[l] <= Rational::zero() {
            return Err(KwideError::NonPositiveObjective(l));
        }
    }
    let mut best: Option<SubSolution> = None;
    for x in kw.cross_sets(i) {
        let mut keep = x.clone();
        keep.extend(kw.allowed_in_links(i, &x));
        keep.sort_unstable();
        let gi = kw.sub_instance(i, &keep, Some(objective));
        let fixed: Vec<usize> = x.iter().map(|l| keep.binary_search(l).expect("kept")).collect();
        let res = gi.residual_instance(&fixed)?;
        if res.instance.infeasible_cut().is_some() {
            continue;
        }
        let ex = solve_exact(&res.instance, EXACT_BUDGET)?;
        if !ex.optimal {
            return Err(KwideError::Budget);
        }
        let mut links: Vec<usize> = ex.solution.links.iter().map(|&l| keep[res.link_origin[l]]).collect();
        links.extend(&x);
        links.sort_unstable();
        let value = objective_value(objective, &links);
        let better = match &best {
            None => true,
            Some(b) => value < b.value || (value == b.value && links < b.links),
        };
        if better {
            best = Some(SubSolution { links, value });
        }
    }
    best.ok_or(KwideError::Infeasible { subcactus: i })
}

/// Exhaustive reference for [`optimize_cross_minimal`].
pub fn bruteforce_cross_minimal(kw: &KWide, i: usize, objective: &[Rational]) -> Result<SubSolution, KwideError> {
    let li = &kw.ps.link_sets[i];
    if li.len() > 20 {
        return Err(KwideError::TooLarge(li.len()));
    }
    let cross = kw.cross_links();
    let mut best: Option<SubSolution> = None;
    for mask in 0u32..(1u32 << li.len()) {
        let links: Vec<usize> = (0..li.len()).filter(|&j| mask >> j & 1 == 1).map(|j| li[j]).collect();
        if !kw.feasible_for(i, &links) || !is_lprime_minimal(&kw.inst, &links, &cross) {
            continue;
        }
        let mut links = links;
        links.sort_unstable();
        let value = objective_value(objective, &links);
        let better = match &best {
            None => true,
            Some(b) => value < b.value || (value == b.value && links < b.links),
        };
        if better {
            best = Some(SubSolution { links, value });
        }
    }
    best.ok_or(KwideError::Infeasible { subcactus: i })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PoolEntry {
    pub links: Vec<usize>,
    pub cross: Vec<usize>,
}

/// All inclusion-minimal covers of `inst` using its links.
pub fn minimal_covers(inst: &CactusInstance, cap: usize) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut state = vec![None; inst.links().len()];
    if rec_covers(inst, &mut state, &mut out, cap) {
        Some(out)
    } else {
        None
    }
}

fn rec_covers(inst: &CactusInstance, state: &mut Vec<Option<bool>>, out: &mut Vec<Vec<usize>>, cap: usize) -> bool {
    let chosen: Vec<usize> = (0..state.len()).filter(|&l| state[l] == Some(true)).collect();
    let nc = inst.num_cuts();
    // a chosen link without a private cut stays redundant
    for &l in &chosen {
        let others: Vec<usize> = chosen.iter().copied().filter(|&m| m != l).collect();
        let mut row = inst.coverage().row(l).clone();
        row.difference_with(&inst.coverage().union_of(&others, nc));
        if row.count_ones(..) == 0 {
            return true;
        }
    }
    let cov = inst.coverage().union_of(&chosen, nc);
    let Some(c) = (0..nc).find(|&c| !cov.contains(c)) else {
        out.push(chosen);
        return out.len() <= cap;
    };
    let avail: Vec<usize> =
        (0..state.len()).filter(|&l| state[l].is_none() && inst.coverage().covers(l, c)).collect();
    let saved = state.clone();
    for l in avail {
        state[l] = Some(true);
        if !rec_covers(inst, state, out, cap) {
            *state = saved;
            return false;
        }
        state[l] = Some(false);
    }
    *state = saved;
    true
}

/// `L_cross`-minimal feasible solutions `X ∪ Y` of `G_i` where `Y` is an
/// inclusion-minimal completion of the cross-link set `X`.
pub fn enumerate_pool(kw: &KWide, i: usize, cap: usize) -> Result<Vec<PoolEntry>, KwideError> {
    let mut seen = HashSet::new();
    let mut pool = Vec::new();
    for x in kw.cross_sets(i) {
        let allowed = kw.allowed_in_links(i, &x);
        let mut keep = x.clone();
        keep.extend(&allowed);
        keep.sort_unstable();
        let gi = kw.sub_instance(i, &keep, None);
        let fixed: Vec<usize> = x.iter().map(|l| keep.binary_search(l).expect("kept")).collect();
        let res = gi.residual_instance(&fixed)?;
        if res.instance.infeasible_cut().is_some() {
            continue;
        }
        let covers = minimal_covers(&res.instance, cap).ok_or(KwideError::PoolCap { subcactus: i, cap })?;
        for y in covers {
            let mut links: Vec<usize> = y.iter().map(|&l| keep[res.link_origin[l]]).collect();
            links.extend(&x);
            links.sort_unstable();
            if seen.insert(links.clone()) {
                let mut cross = x.clone();
                cross.sort_unstable();
                pool.push(PoolEntry { links, cross });
                if pool.len() > cap {
                    return Err(KwideError::PoolCap { subcactus: i, cap });
                }
            }
        }
    }
    if pool.is_empty() {
        return Err(KwideError::Infeasible { subcactus: i });
    }
    Ok(pool)
}

#[derive(Debug, Clone)]
pub struct BundlePoint {
    pub x: Vec<Rational>,
    pub pools: Vec<Vec<PoolEntry>>,
    pub coeffs: Vec<Vec<Rational>>,
    pub value: Rational,
}

impl BundlePoint {
    /// Pool entries of subcactus `i` with positive coefficient.
    pub fn support(&self, i: usize) -> Vec<usize> {
        (0..self.coeffs[i].len()).filter(|&j| !self.coeffs[i][j].is_zero()).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.x.iter().all(|v| v.is_integer())
    }

    pub fn total(&self, links: &[usize]) -> Rational {
        links.iter().fold(Rational::zero(), |a, &l| a + &self.x[l])
    }
}

/// Cost of the part of a pool entry that subcactus `i` pays for: all of its
/// in-links and the cross-links whose lower side is `i`.
fn entry_cost(kw: &KWide, i: usize, e: &PoolEntry) -> Rational {
    e.links
        .iter()
        .filter(|&&l| !kw.is_cross(l) || kw.sides(l).0 == i)
        .fold(Rational::zero(), |a, &l| a + &kw.inst.link(l).cost)
}

/// Minimise `c·x` over the bundle relaxation with explicit pools.
pub fn bundle_lp(kw: &KWide, cap: usize) -> Result<BundlePoint, KwideError> {
    let q = kw.q();
    let pools: Vec<Vec<PoolEntry>> = (0..q).map(|i| enumerate_pool(kw, i, cap)).collect::<Result<_, _>>()?;
    bundle_lp_with_pools(kw, pools)
}

pub fn bundle_lp_with_pools(kw: &KWide, pools: Vec<Vec<PoolEntry>>) -> Result<BundlePoint, KwideError> {
    let q = kw.q();
    let mut offset = vec![0; q + 1];
    for i in 0..q {
        offset[i + 1] = offset[i] + pools[i].len();
    }
    let mut lp = LinearProgram::new(offset[q]);
    for i in 0..q {
        for (j, e) in pools[i].iter().enumerate() {
            lp.objective[offset[i] + j] = entry_cost(kw, i, e);
        }
        lp.add((offset[i]..offset[i + 1]).map(|v| (v, Rational::one())).collect(), Sense::Eq, Rational::one());
    }
    for l in kw.cross_links() {
        let (a, b) = kw.sides(l);
        let mut row = Vec::new();
        for (j, e) in pools[a].iter().enumerate() {
            if e.links.binary_search(&l).is_ok() {
                row.push((offset[a] + j, Rational::one()));
            }
        }
        for (j, e) in pools[b].iter().enumerate() {
            if e.links.binary_search(&l).is_ok() {
                row.push((offset[b] + j, -Rational::one()));
            }
        }
        if !row.is_empty() {
            lp.add(row, Sense::Eq, Rational::zero());
        }
    }
    let sol = simplex_solve(&lp)?;
    let coeffs: Vec<Vec<Rational>> = (0..q).map(|i| sol.x[offset[i]..offset[i + 1]].to_vec()).collect();
    let mut x = vec![Rational::zero(); kw.inst.links().len()];
    for l in 0..x.len() {
        let i = if kw.is_cross(l) { kw.sides(l).0 } else { kw.comp_of_link(l) };
        for (j, e) in pools[i].iter().enumerate() {
            if e.links.binary_search(&l).is_ok() {
                x[l] += &coeffs[i][j];
            }
        }
    }
    for c in 0..kw.inst.num_cuts() {
        let load = kw.inst.covering_links(c).iter().fold(Rational::zero(), |a, &l| a + &x[l]);
        assert!(load >= Rational::one(), "bundle point must satisfy cut {c}");
    }
    Ok(BundlePoint { x, pools, coeffs, value: sol.value })
}

/// Minimum edge cover through a maximum matching; `n` vertices, edges by index.
pub fn min_edge_cover(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>, KwideError> {
    let mut g: UnGraph<(), usize> = UnGraph::with_capacity(n, edges.len());
    for _ in 0..n {
        g.add_node(());
    }
    let mut first: HashMap<(usize, usize), usize> = HashMap::new();
    let mut incident: Vec<Option<usize>> = vec![None; n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !first.contains_key(&key) {
            first.insert(key, e);
            g.add_edge(NodeIndex::new(a), NodeIndex::new(b), e);
        }
        for v in [a, b] {
            if incident[v].is_none() {
                incident[v] = Some(e);
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| incident[v].is_none()) {
        return Err(KwideError::IsolatedVertex(v));
    }
    let m = petgraph::algo::maximum_matching(&g);
    let mut cover: Vec<usize> = m
        .edges()
        .map(|(a, b)| {
            let (a, b) = (a.index(), b.index());
            first[&(a.min(b), a.max(b))]
        })
        .collect();
    let matched = cover.len();
    for v in 0..n {
        if !m.contains_node(NodeIndex::new(v)) {
            cover.push(incident[v].expect("not isolated"));
        }
    }
    assert_eq!(cover.len(), n - matched, "Gallai identity");
    cover.sort_unstable();
    cover.dedup();
    assert_eq!(cover.len(), n - matched, "cover edges are distinct");
    Ok(cover)
}

/// Minimum set of cross-links covering every cut of each `G_i` that `sets[i]` covers.
pub fn replace_cross_links(kw: &KWide, sets: &[Vec<usize>]) -> Result<Vec<usize>, KwideError> {
    let mut a: Vec<usize> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        for &l in s {
            let v = kw.endpoint_in(l, i);
            if !a.contains(&v) {
                a.push(v);
            }
        }
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let anc = |x: usize, y: usize| kw.inst.is_ancestor_wrt(kw.center, x, y);
    let a: Vec<usize> = a.iter().copied().filter(|&x| !a.iter().any(|&y| y != x && anc(x, y))).collect();
    let node_of = |u: usize| a.iter().position(|&x| anc(x, u)).map(|p| p + 2).unwrap_or(0);
    let mut edges = vec![(0usize, 1usize)];
    let mut edge_link = vec![usize::MAX];
    for l in kw.cross_links() {
        let link = kw.inst.link(l);
        edges.push((node_of(link.u), node_of(link.v)));
        edge_link.push(l);
    }
    let cover = min_edge_cover(a.len() + 2, &edges)?;
    let mut f: Vec<usize> = cover.into_iter().filter(|&e| e != 0).map(|e| edge_link[e]).collect();
    f.sort_unstable();
    for (i, s) in sets.iter().enumerate() {
        let need = kw.inst.coverage().union_of(s, kw.inst.num_cuts());
        let have = kw.inst.coverage().union_of(&f, kw.inst.num_cuts());
        for c in kw.cuts_of(i) {
            assert!(!need.contains(c) || have.contains(c), "replacement must keep cut {c} of subcactus {i}");
        }
    }
    Ok(f)
}

/// Exhaustive reference for [`replace_cross_links`]: the size of a smallest valid replacement.
pub fn bruteforce_replacement_size(kw: &KWide, sets: &[Vec<usize>]) -> Result<usize, KwideError> {
    let cross = kw.cross_links();
    if cross.len() > 20 {
        return Err(KwideError::TooLarge(cross.len()));
    }
    let nc = kw.inst.num_cuts();
    let mut need = FixedBitSet::with_capacity(nc);
    for (i, s) in sets.iter().enumerate() {
        let cov = kw.inst.coverage().union_of(s, nc);
        for c in kw.cuts_of(i) {
            if cov.contains(c) {
                need.insert(c);
            }
        }
    }
    let mut best = usize::MAX;
    for mask in 0u32..(1u32 << cross.len()) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let f: Vec<usize> = (0..cross.len()).filter(|&j| mask >> j & 1 == 1).map(|j| cross[j]).collect();
        if need.is_subset(&kw.inst.coverage().union_of(&f, nc)) {
            best = size;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct Algorithm1Outcome {
    pub choice: Vec<usize>,
    pub solution: Vec<usize>,
    pub in_links: Vec<usize>,
    pub sampled_cross: usize,
    pub reopt_cross: Vec<usize>,
}

impl Algorithm1Outcome {
    /// Size of the plain union of the sampled solutions, counting each
    /// cross-link once per subcactus that sampled it.
    pub fn sampled_size(&self) -> usize {
        self.in_links.len() + self.sampled_cross
    }
}

/// Draw one pool entry per subcactus, independently, from a per-subcactus stream.
pub fn sample_choice(bp: &BundlePoint, seed: u64) -> Vec<usize> {
    (0..bp.coeffs.len())
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let supp = bp.support(i);
            for &j in &supp {
                acc += to_f64(&bp.coeffs[i][j]);
                if u < acc {
                    return j;
                }
            }
            *supp.last().expect("coefficients sum to one")
        })
        .collect()
}

/// Keep the sampled in-links and replace the sampled cross-links optimally.
pub fn reoptimize(kw: &KWide, bp: &BundlePoint, choice: &[usize]) -> Result<Algorithm1Outcome, KwideError> {
    let mut in_links = Vec::new();
    let mut sets = Vec::new();
    let mut sampled_cross = 0;
    for (i, &j) in choice.iter().enumerate() {
        let e = &bp.pools[i][j];
        in_links.extend(e.links.iter().copied().filter(|&l| !kw.is_cross(l)));
        sampled_cross += e.cross.len();
        sets.push(e.cross.clone());
    }
    in_links.sort_unstable();
    in_links.dedup();
    let reopt_cross = replace_cross_links(kw, &sets)?;
    let mut solution = in_links.clone();
    solution.extend(&reopt_cross);
    solution.sort_unstable();
    solution.dedup();
    assert!(kw.inst.is_feasible(&solution), "Algorithm 1 output must be feasible");
    Ok(Algorithm1Outcome { choice: choice.to_vec(), solution, in_links, sampled_cross, reopt_cross })
}

pub fn sample_and_reoptimize(kw: &KWide, bp: &BundlePoint, seed: u64) -> Result<Algorithm1Outcome, KwideError> {
    reoptimize(kw, bp, &sample_choice(bp, seed))
}

/// Union of exact optima of every principal subcactus.
pub fn bundle_rounding(kw: &KWide) -> Result<Vec<usize>, KwideError> {
    let mut out = Vec::new();
    for (i, sub) in kw.subs.iter().enumerate() {
        if sub.instance.num_cuts() == 0 {
            continue;
        }
        let ex = solve_exact(&sub.instance, EXACT_BUDGET).map_err(|e| match e {
            ExactError::Infeasible { .. } => KwideError::Infeasible { subcactus: i },
            other => other.into(),
        })?;
        if !ex.optimal {
            return Err(KwideError::Budget);
        }
        let mut inv = vec![0; sub.instance.links().len()];
        for (l, m) in sub.link_map.iter().enumerate() {
            if let Some(j) = m {
                inv[*j] = l;
            }
        }
        out.extend(ex.solution.links.iter().map(|&l| inv[l]));
    }
    out.sort_unstable();
    out.dedup();
    assert!(kw.inst.is_feasible(&out));
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Derandomized {
    pub outcome: Algorithm1Outcome,
    /// Conditional expectations were computed exactly.
    pub exact: bool,
    pub expected_cost: Option<Rational>,
}

/// Method of conditional expectations over the output cost of Algorithm 1.
/// Falls back to the best of `fallback_trials` seeded samples when the
/// outcome space exceeds `cap`.
pub fn derandomize_rounding(
    kw: &KWide,
    bp: &BundlePoint,
    cap: usize,
    fallback_trials: u64,
) -> Result<Derandomized, KwideError> {
    let supports: Vec<Vec<usize>> = (0..kw.q()).map(|i| bp.support(i)).collect();
    let total = supports.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len()));
    if total.is_none_or(|t| t > cap) {
        let mut best: Option<(Rational, Algorithm1Outcome)> = None;
        for seed in 0..fallback_trials.max(1) {
            let o = sample_and_reoptimize(kw, bp, seed)?;
            let c = kw.inst.cost_of(&o.solution);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, o));
            }
        }
        let (_, outcome) = best.expect("at least one trial");
        return Ok(Derandomized { outcome, exact: false, expected_cost: None });
    }
    // every outcome tuple with its probability and output cost
    let mut outcomes: Vec<(Vec<usize>, Rational, Rational)> = vec![(Vec::new(), Rational::one(), Rational::zero())];
    for (i, s) in supports.iter().enumerate() {
        let mut next = Vec::with_capacity(outcomes.len() * s.len());
        for (ch, p, _) in &outcomes {
            for &j in s {
                let mut c = ch.clone();
                c.push(j);
                next.push((c, p * &bp.coeffs[i][j], Rational::zero()));
            }
        }
        outcomes = next;
    }
    for o in outcomes.iter_mut() {
        let r = reoptimize(kw, bp, &o.0)?;
        o.2 = kw.inst.cost_of(&r.solution);
    }
    let expected = outcomes.iter().fold(Rational::zero(), |a, (_, p, c)| a + p * c);
    let mut fixed: Vec<usize> = Vec::new();
    for (i, s) in supports.iter().enumerate() {
        let mut best: Option<(Rational, usize)> = None;
        for &j in s {
            let (mut num, mut den) = (Rational::zero(), Rational::zero());
            for (ch, p, c) in &outcomes {
                if ch[..i] == fixed[..] && ch[i] == j {
                    num += p * c;
                    den += p;
                }
            }
            let cond = num / den;
            if best.as_ref().is_none_or(|(b, _)| cond < *b) {
                best = Some((cond, j));
            }
        }
        fixed.push(best.expect("non-empty support").1);
    }
    let outcome = reoptimize(kw, bp, &fixed)?;
    assert!(kw.inst.cost_of(&outcome.solution) <= expected, "derandomised cost exceeds the expectation");
    Ok(Derandomized { outcome, exact: true, expected_cost: Some(expected) })
}

#[derive(Debug, Clone, Copy)]
pub struct ApproxConfig {
    pub seed: u64,
    pub trials: u64,
    pub derandomize: bool,
    pub pool_cap: usize,
    pub enumeration_cap: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { seed: 0, trials: 16, derandomize: false, pool_cap: 2_000, enumeration_cap: 4_096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Bundle,
    DirectedLp,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ApproxReport {
    /// Link ids of the input instance.
    pub links: Vec<usize>,
    #[serde(serialize_with = "ser_rational")]
    pub cost: Rational,
    pub route: Route,
    pub center: usize,
    pub width: usize,
    #[serde(serialize_with = "ser_opt_rational")]
    pub bundle_value: Option<Rational>,
    #[serde(serialize_with = "ser_opt_rational")]
    pub bundle_cost: Option<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub directed_cost: Rational,
    pub sampled_size: Option<usize>,
    pub reoptimized_size: Option<usize>,
    pub derandomized: Option<bool>,
    pub note: Option<String>,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::cactus::format_rational(q))
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&crate::cactus::format_rational(q)),
        None => s.serialize_none(),
    }
}

fn bundle_route(kw: &KWide, cfg: &ApproxConfig) -> Result<(BundlePoint, Algorithm1Outcome, Option<bool>), KwideError> {
    let bp = bundle_lp(kw, cfg.pool_cap)?;
    if cfg.derandomize {
        let d = derandomize_rounding(kw, &bp, cfg.enumeration_cap, cfg.trials)?;
        return Ok((bp, d.outcome, Some(d.exact)));
    }
    let mut best: Option<Algorithm1Outcome> = None;
    for t in 0..cfg.trials.max(1) {
        let o = sample_and_reoptimize(kw, &bp, cfg.seed.wrapping_add(t))?;
        if best.as_ref().is_none_or(|b| kw.inst.cost_of(&o.solution) < kw.inst.cost_of(&b.solution)) {
            best = Some(o);
        }
    }
    Ok((bp, best.expect("one trial"), None))
}

/// Better of the bundle route and the integral bidirected LP.
pub fn solve_approx(inst: &CactusInstance, cfg: &ApproxConfig) -> Result<ApproxReport, KwideError> {
    let directed = crate::lp::directed_cut_lp(inst)?;
    let directed_cost = inst.cost_of(&directed.links);
    let closed = inst.shadow_closure();
    let center = KWide::best_center(&closed);
    let kw = KWide::new(&closed, center)?;
    let width = kw.ps.width();
    let mut report = ApproxReport {
        links: directed.links.clone(),
        cost: directed_cost.clone(),
        route: Route::DirectedLp,
        center,
        width,
        bundle_value: None,
        bundle_cost: None,
        directed_cost,
        sampled_size: None,
        reoptimized_size: None,
        derandomized: None,
        note: None,
    };
    match bundle_route(&kw, cfg) {
        Ok((bp, o, der)) => {
            let mut links: Vec<usize> = o.solution.iter().map(|&l| closed.original_of(l)).collect();
            links.sort_unstable();
            links.dedup();
            assert!(inst.is_feasible(&links), "de-shadowed solution must stay feasible");
            let cost = inst.cost_of(&links);
            report.bundle_value = Some(bp.value);
            report.bundle_cost = Some(cost.clone());
            report.sampled_size = Some(o.sampled_size());
            report.reoptimized_size = Some(o.solution.len());
            report.derandomized = der;
            if cost <= report.cost {
                report.links = links;
                report.cost = cost;
                report.route = Route::Bundle;
            }
        }
        Err(e @ (KwideError::PoolCap { .. } | KwideError::Budget)) => report.note = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(report)
}
