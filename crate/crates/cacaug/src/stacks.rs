//! Stacks of cross-links per terminal, their layers, and the domination graph
//! of a sampled outcome with exact removable-set search.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::cactus::{format_rational, LinkClass, Rational};
use crate::kwide::{BundlePoint, KWide};

pub const MAX_COMPONENT_ARCS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StackError {
    #[error("component with {0} arcs exceeds the exact search limit")]
    TooLarge(usize),
    #[error("terminal {0} has more than one incoming arc")]
    InDegree(usize),
    #[error("arc {0} joins two terminals of the same color")]
    SameColor(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Layer {
    Lambda0,
    Mu0,
    Lambda1,
    Mu1,
}

#[derive(Debug, Clone, Serialize)]
pub struct StackEntry {
    pub link: usize,
    /// Endpoint of the link that is an ancestor of the terminal.
    pub vertex: usize,
    /// Number of ancestors of the terminal strictly below `vertex`.
    pub height: usize,
    pub layer: Layer,
    /// Color of the terminal the other endpoint is assigned to.
    pub other_color: usize,
    #[serde(serialize_with = "ser_q")]
    pub x: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct TerminalStack {
    pub terminal: usize,
    pub color: usize,
    pub entries: Vec<StackEntry>,
    #[serde(serialize_with = "ser_q")]
    pub lambda0: Rational,
    #[serde(serialize_with = "ser_q")]
    pub mu0: Rational,
    #[serde(serialize_with = "ser_q")]
    pub lambda1: Rational,
    #[serde(serialize_with = "ser_q")]
    pub mu1: Rational,
    #[serde(serialize_with = "ser_map")]
    pub eta: BTreeMap<usize, Rational>,
}

fn ser_q<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

fn ser_map<S: serde::Serializer>(m: &BTreeMap<usize, Rational>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut out = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        out.serialize_entry(k, &format_rational(v))?;
    }
    out.end()
}

impl TerminalStack {
    pub fn load(&self) -> Rational {
        &self.lambda0 + &self.mu0 + &self.lambda1 + &self.mu1
    }

    /// `ℓ_a ⪯_t ℓ_b`.
    pub fn below(&self, a: usize, b: usize) -> bool {
        self.entries[a].height <= self.entries[b].height
    }

    fn weight(&self, layer: Layer) -> Rational {
        self.entries.iter().filter(|e| e.layer == layer).fold(Rational::zero(), |a, e| a + &e.x)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StackProfile {
    pub center: usize,
    /// Assigned terminal `t_v` per vertex; `None` for the center.
    pub assigned: Vec<Option<usize>>,
    pub color: Vec<usize>,
    pub stacks: Vec<TerminalStack>,
}

impl StackProfile {
    pub fn stack_of(&self, t: usize) -> Option<&TerminalStack> {
        self.stacks.iter().find(|s| s.terminal == t)
    }

    pub fn sum_mu0(&self) -> Rational {
        self.stacks.iter().fold(Rational::zero(), |a, s| a + &s.mu0)
    }

    pub fn sum_mu1(&self) -> Rational {
        self.stacks.iter().fold(Rational::zero(), |a, s| a + &s.mu1)
    }

    /// `½ Σ_t (1 − λ⁰_t − μ⁰_t − λ¹_t)`.
    pub fn mu1_budget(&self) -> Rational {
        let one = Rational::from_integer(1.into());
        let s = self.stacks.iter().fold(Rational::zero(), |a, s| a + &one - &s.lambda0 - &s.mu0 - &s.lambda1);
        s / Rational::from_integer(2.into())
    }

    /// Layer ordering, tie structure, load and color-sum invariants of every stack.
    pub fn check_laws(&self) -> Result<(), String> {
        let one = Rational::from_integer(1.into());
        for s in &self.stacks {
            let t = s.terminal;
            if s.load() > one {
                return Err(format!("stack of {t} has load above one"));
            }
            let eta = s.eta.values().fold(Rational::zero(), |a, v| a + v);
            if eta != s.load() {
                return Err(format!("η of {t} does not sum to the load"));
            }
            let mut lambda1_vertex = None;
            for (a, ea) in s.entries.iter().enumerate() {
                if ea.layer == Layer::Lambda1 {
                    match lambda1_vertex {
                        None => lambda1_vertex = Some(ea.vertex),
                        Some(v) if v != ea.vertex => return Err(format!("Λ¹ of {t} has two endpoints")),
                        _ => {}
                    }
                }
                for (b, eb) in s.entries.iter().enumerate() {
                    let strictly = s.below(a, b) && !s.below(b, a);
                    let tied = s.below(a, b) && s.below(b, a);
                    let need_strict = (ea.layer == Layer::Lambda0 && eb.layer != Layer::Lambda0)
                        || (ea.layer == Layer::Mu0 && eb.layer == Layer::Lambda1)
                        || (ea.layer != Layer::Mu1 && eb.layer == Layer::Mu1);
                    if need_strict && !strictly {
                        return Err(format!("stack of {t}: {:?} not strictly below {:?}", ea.layer, eb.layer));
                    }
                    let need_tie = ea.layer == eb.layer && matches!(ea.layer, Layer::Lambda0 | Layer::Lambda1);
                    if need_tie && !tied {
                        return Err(format!("stack of {t}: {:?} links not tied", ea.layer));
                    }
                }
            }
        }
        Ok(())
    }
}

fn ancestor_depths(kw: &KWide) -> Vec<usize> {
    let n = kw.inst.n();
    (0..n)
        .map(|v| (0..n).filter(|&a| kw.inst.is_ancestor_wrt(kw.center, a, v)).count())
        .collect()
}

/// Assign every vertex to its lowest-index terminal descendant and build the
/// stacks of all terminals for the load vector `x`.
pub fn classify_stacks(kw: &KWide, x: &[Rational]) -> StackProfile {
    let inst = &kw.inst;
    let n = inst.n();
    let center = kw.center;
    let depth = ancestor_depths(kw);
    let terminal_desc: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            inst.descendants_wrt(center, v).into_iter().filter(|&u| u != center && inst.is_terminal(u)).collect()
        })
        .collect();
    let assigned: Vec<Option<usize>> = (0..n)
        .map(|v| if v == center { None } else { terminal_desc[v].iter().copied().min() })
        .collect();
    let color: Vec<usize> = (0..n).map(|v| kw.ps.comp_of[v].unwrap_or(0)).collect();
    let mut stacks: BTreeMap<usize, TerminalStack> = inst
        .terminals()
        .into_iter()
        .filter(|&t| t != center)
        .map(|t| {
            let s = TerminalStack {
                terminal: t,
                color: color[t],
                entries: Vec::new(),
                lambda0: Rational::zero(),
                mu0: Rational::zero(),
                lambda1: Rational::zero(),
                mu1: Rational::zero(),
                eta: BTreeMap::new(),
            };
            (t, s)
        })
        .collect();
    for l in kw.cross_links() {
        let link = inst.link(l);
        for (v, w) in [(link.u, link.v), (link.v, link.u)] {
            let t = assigned[v].expect("cross-links avoid the center");
            let unique = terminal_desc[v].len() == 1;
            let long = inst.on_long_cycle(v);
            let layer = if v == t {
                Layer::Lambda0
            } else if unique && !long {
                Layer::Mu0
            } else if unique {
                Layer::Lambda1
            } else {
                Layer::Mu1
            };
            let other_color = color[assigned[w].expect("cross-links avoid the center")];
            stacks.get_mut(&t).expect("assigned vertices map to terminals").entries.push(StackEntry {
                link: l,
                vertex: v,
                height: depth[t] - depth[v],
                layer,
                other_color,
                x: x[l].clone(),
            });
        }
    }
    for s in stacks.values_mut() {
        s.entries.sort_by_key(|e| (e.height, e.link));
        s.lambda0 = s.weight(Layer::Lambda0);
        s.mu0 = s.weight(Layer::Mu0);
        s.lambda1 = s.weight(Layer::Lambda1);
        s.mu1 = s.weight(Layer::Mu1);
        for c in 0..kw.q() {
            s.eta.insert(c, Rational::zero());
        }
        for e in &s.entries {
            *s.eta.entry(e.other_color).or_insert_with(Rational::zero) += &e.x;
        }
    }
    StackProfile { center, assigned, color, stacks: stacks.into_values().collect() }
}

/// `x(L_up)`.
pub fn up_load(kw: &KWide, x: &[Rational]) -> Rational {
    (0..x.len()).filter(|&l| kw.ps.class[l] == LinkClass::Up).fold(Rational::zero(), |a, l| a + &x[l])
}

/// Both stack laws: `x(L_up) ≥ Σ μ⁰_t` and `Σ μ¹_t ≤ ½ Σ (1 − λ⁰_t − μ⁰_t − λ¹_t)`.
pub fn check_load_laws(kw: &KWide, bp: &BundlePoint) -> (bool, bool) {
    let prof = classify_stacks(kw, &bp.x);
    (up_load(kw, &bp.x) >= prof.sum_mu0(), prof.sum_mu1() <= prof.mu1_budget())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DomArc {
    pub tail: usize,
    pub head: usize,
    /// Height of the link in the tail's stack.
    pub tail_height: usize,
    /// Height of the link in the head's stack.
    pub head_height: usize,
    pub link: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentKind {
    OddCycle,
    EvenPathArborescence,
    Other,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationGraph {
    pub n: usize,
    pub color: Vec<usize>,
    pub arcs: Vec<DomArc>,
}

impl DominationGraph {
    pub fn new(n: usize, color: Vec<usize>, arcs: Vec<DomArc>) -> Result<Self, StackError> {
        let mut indeg = vec![0; n];
        for (i, a) in arcs.iter().enumerate() {
            if color[a.tail] == color[a.head] {
                return Err(StackError::SameColor(i));
            }
            indeg[a.head] += 1;
            if indeg[a.head] > 1 {
                return Err(StackError::InDegree(a.head));
            }
        }
        Ok(DominationGraph { n, color, arcs })
    }

    /// Arcs of the cross-links sampled under `choice`.
    pub fn from_choice(kw: &KWide, bp: &BundlePoint, profile: &StackProfile, choice: &[usize]) -> Result<Self, StackError> {
        let height = |t: usize, l: usize| {
            profile.stack_of(t).and_then(|s| s.entries.iter().find(|e| e.link == l)).map(|e| e.height).expect("link in stack")
        };
        let mut arcs = Vec::new();
        for (i, &j) in choice.iter().enumerate() {
            for &l in &bp.pools[i][j].cross {
                let mine = kw.endpoint_in(l, i);
                let other = kw.inst.link(l).other(mine);
                let head = profile.assigned[mine].expect("not the center");
                let tail = profile.assigned[other].expect("not the center");
                arcs.push(DomArc { tail, head, tail_height: height(tail, l), head_height: height(head, l), link: Some(l) });
            }
        }
        Self::new(kw.inst.n(), profile.color.clone(), arcs)
    }

    /// Arc `b = (v, w)` dominates arc `a = (u, v)`.
    pub fn dominates(&self, b: usize, a: usize) -> bool {
        let (ab, aa) = (&self.arcs[b], &self.arcs[a]);
        b != a && ab.tail == aa.head && ab.tail_height <= aa.head_height
    }

    pub fn dominated_by(&self, a: usize) -> Vec<usize> {
        (0..self.arcs.len()).filter(|&b| self.dominates(b, a)).collect()
    }

    pub fn is_dominated(&self, a: usize) -> bool {
        (0..self.arcs.len()).any(|b| self.dominates(b, a))
    }

    pub fn dominated_count(&self) -> usize {
        (0..self.arcs.len()).filter(|&a| self.is_dominated(a)).count()
    }

    pub fn is_removable(&self, r: &[usize]) -> bool {
        r.iter().all(|&a| (0..self.arcs.len()).any(|b| !r.contains(&b) && self.dominates(b, a)))
    }

    /// Partition of the arcs into classes closed under domination in both directions.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let m = self.arcs.len();
        let mut comp = vec![usize::MAX; m];
        let mut out = Vec::new();
        for s in 0..m {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            let mut members = Vec::new();
            comp[s] = id;
            while let Some(a) = stack.pop() {
                members.push(a);
                for b in 0..m {
                    if comp[b] == usize::MAX && (self.dominates(a, b) || self.dominates(b, a)) {
                        comp[b] = id;
                        stack.push(b);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Arcs of `comp` that dominate nothing.
    pub fn non_dominating(&self, comp: &[usize]) -> Vec<usize> {
        comp.iter().copied().filter(|&b| !comp.iter().any(|&a| self.dominates(b, a))).collect()
    }

    /// Every arc `(v, w)` of `comp` is dominated by every arc of `comp` leaving `w`.
    pub fn is_maximally_dominating(&self, comp: &[usize]) -> bool {
        comp.iter().all(|&a| {
            comp.iter().filter(|&&b| b != a && self.arcs[b].tail == self.arcs[a].head).all(|&b| self.dominates(b, a))
        })
    }

    pub fn kind(&self, comp: &[usize]) -> ComponentKind {
        let mut verts: Vec<usize> = comp.iter().flat_map(|&a| [self.arcs[a].tail, self.arcs[a].head]).collect();
        verts.sort_unstable();
        verts.dedup();
        let out_deg = |v: usize| comp.iter().filter(|&&a| self.arcs[a].tail == v).count();
        let in_deg = |v: usize| comp.iter().filter(|&&a| self.arcs[a].head == v).count();
        if comp.len() == verts.len() {
            let is_cycle = verts.iter().all(|&v| out_deg(v) == 1 && in_deg(v) == 1);
            if is_cycle && comp.len() % 2 == 1 && self.is_maximally_dominating(comp) {
                return ComponentKind::OddCycle;
            }
            return ComponentKind::Other;
        }
        if comp.len() + 1 == verts.len() {
            let root = *verts.iter().find(|&&v| in_deg(v) == 0).expect("arborescence root");
            let mut stack = vec![(root, 0usize)];
            while let Some((v, d)) = stack.pop() {
                let kids: Vec<usize> =
                    comp.iter().filter(|&&a| self.arcs[a].tail == v).map(|&a| self.arcs[a].head).collect();
                if kids.is_empty() && d > 0 && d % 2 == 0 {
                    return ComponentKind::EvenPathArborescence;
                }
                stack.extend(kids.into_iter().map(|w| (w, d + 1)));
            }
        }
        ComponentKind::Other
    }

    /// Guaranteed removable count of a component, doubled to stay integral.
    pub fn twice_component_bound(&self, comp: &[usize]) -> i64 {
        let d = comp.iter().filter(|&&a| comp.iter().any(|&b| self.dominates(b, a))).count() as i64;
        match self.kind(comp) {
            ComponentKind::OddCycle => d - 1,
            ComponentKind::EvenPathArborescence => d + 1,
            ComponentKind::Other => d,
        }
    }

    /// Maximum removable subset of one component.
    pub fn max_removable_in(&self, comp: &[usize]) -> Result<Vec<usize>, StackError> {
        let m = comp.len();
        if m > MAX_COMPONENT_ARCS {
            return Err(StackError::TooLarge(m));
        }
        let dom_by: Vec<u32> = (0..m)
            .map(|i| (0..m).filter(|&j| self.dominates(comp[j], comp[i])).fold(0u32, |acc, j| acc | 1 << j))
            .collect();
        let mut best = (1u32 << m) - 1;
        min_keep(&dom_by, 0, &mut best);
        Ok((0..m).filter(|&i| best >> i & 1 == 0).map(|i| comp[i]).collect())
    }

    /// Maximum removable set, solved per component.
    pub fn max_removable_set(&self) -> Result<Vec<usize>, StackError> {
        let mut out = Vec::new();
        for c in self.components() {
            out.extend(self.max_removable_in(&c)?);
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Smallest `K` such that every arc outside `K` is dominated by an arc of `K`.
fn min_keep(dom_by: &[u32], keep: u32, best: &mut u32) {
    if keep.count_ones() >= best.count_ones() {
        return;
    }
    let open = (0..dom_by.len()).find(|&a| keep >> a & 1 == 0 && dom_by[a] & keep == 0);
    let Some(a) = open else {
        *best = keep;
        return;
    };
    if keep.count_ones() + 1 >= best.count_ones() {
        return;
    }
    min_keep(dom_by, keep | 1 << a, best);
    let mut rest = dom_by[a];
    while rest != 0 {
        let b = rest.trailing_zeros();
        rest &= rest - 1;
        min_keep(dom_by, keep | 1 << b, best);
    }
}
