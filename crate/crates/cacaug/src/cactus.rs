//! Cactus instances: parsing, 2-cut enumeration, coverage, ancestry, shadows,
//! contraction and residual instances, and the principal structure around a center.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n / d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Lossy conversion used for reporting and sampling.
pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing `vertices` line")]
    MissingVertices,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("cycle {0} has fewer than two vertices")]
    ShortCycle(usize),
    #[error("cycle {0} repeats vertex {1}")]
    RepeatedVertex(usize, usize),
    #[error("edge {{{0}, {1}}} in multiple cycles")]
    EdgeInMultipleCycles(usize, usize),
    #[error("cactus is disconnected")]
    Disconnected,
    #[error("cycles do not form a cactus (cycle lengths sum to {sum}, expected {expected})")]
    NotCactus { sum: usize, expected: usize },
    #[error("bad root index {0}")]
    BadRoot(usize),
    #[error("link {0} is a self-loop")]
    SelfLoop(usize),
    #[error("link {0} has non-positive cost")]
    NonPositiveCost(usize),
    #[error("unknown link id {0}")]
    UnknownLink(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub cost: Rational,
    /// Link this one was derived from as a shadow, if any.
    pub origin: Option<usize>,
}

impl Link {
    pub fn new(id: usize, u: usize, v: usize, cost: Rational) -> Self {
        Link { id, u, v, cost, origin: None }
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCut {
    pub id: usize,
    pub members: FixedBitSet,
    pub boundary: [(usize, usize); 2],
    pub cycle: usize,
}

impl TwoCut {
    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(v)
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.members.ones().collect()
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-link bitsets over cut ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrix {
    pub rows: Vec<FixedBitSet>,
}

impl CoverageMatrix {
    pub fn covers(&self, link: usize, cut: usize) -> bool {
        self.rows[link].contains(cut)
    }

    pub fn row(&self, link: usize) -> &FixedBitSet {
        &self.rows[link]
    }

    pub fn union_of(&self, links: &[usize], ncuts: usize) -> FixedBitSet {
        let mut acc = FixedBitSet::with_capacity(ncuts);
        for &l in links {
            acc.union_with(&self.rows[l]);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkClass {
    Cross,
    In,
    Up,
}

impl LinkClass {
    pub fn is_in(self) -> bool {
        !matches!(self, LinkClass::Cross)
    }
}

#[derive(Debug, Clone)]
pub struct PrincipalStructure {
    pub center: usize,
    /// Component index of every vertex; `None` for the center.
    pub comp_of: Vec<Option<usize>>,
    pub components: Vec<Vec<usize>>,
    pub class: Vec<LinkClass>,
    /// Links with at least one endpoint in the component.
    pub link_sets: Vec<Vec<usize>>,
    pub terminal_counts: Vec<usize>,
}

impl PrincipalStructure {
    pub fn width(&self) -> usize {
        self.terminal_counts.iter().copied().max().unwrap_or(0)
    }

    pub fn cross_links(&self) -> Vec<usize> {
        (0..self.class.len()).filter(|&l| self.class[l] == LinkClass::Cross).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Contraction {
    pub instance: CactusInstance,
    pub vertex_map: Vec<usize>,
    pub link_map: Vec<Option<usize>>,
}

#[derive(Debug, Clone)]
pub struct Residual {
    pub instance: CactusInstance,
    pub vertex_map: Vec<usize>,
    /// Original link id to residual link id; fixed links and loops map to `None`.
    pub link_map: Vec<Option<usize>>,
    /// Residual link id to original link id.
    pub link_origin: Vec<usize>,
    /// Residual cut id to original cut id.
    pub cut_map: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CactusInstance {
    n: usize,
    root: usize,
    cycles: Vec<Vec<usize>>,
    links: Vec<Link>,
    edges: Vec<(usize, usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
    cuts: Vec<TwoCut>,
    vertex_cuts: Vec<FixedBitSet>,
    coverage: CoverageMatrix,
    // sep[u][v]: label of the component of G - u containing v
    sep: Vec<Vec<u32>>,
}

impl PartialEq for CactusInstance {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.root == other.root && self.cycles == other.cycles && self.links == other.links
    }
}

const REMOVED: u32 = u32::MAX;

impl CactusInstance {
    pub fn new(n: usize, root: usize, cycles: Vec<Vec<usize>>, links: Vec<Link>) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::MissingVertices);
        }
        if root >= n {
            return Err(InstanceError::BadRoot(root));
        }
        let mut edges = Vec::new();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (ci, cyc) in cycles.iter().enumerate() {
            if cyc.len() < 2 {
                return Err(InstanceError::ShortCycle(ci));
            }
            let mut local = HashSet::new();
            for &v in cyc {
                if v >= n {
                    return Err(InstanceError::VertexOutOfRange(v));
                }
                if !local.insert(v) {
                    return Err(InstanceError::RepeatedVertex(ci, v));
                }
            }
            let m = cyc.len();
            for j in 0..m {
                let (a, b) = (cyc[j], cyc[(j + 1) % m]);
                let key = (a.min(b), a.max(b));
                if let Some(&other) = seen.get(&key) {
                    if other != ci {
                        return Err(InstanceError::EdgeInMultipleCycles(key.0, key.1));
                    }
                }
                seen.insert(key, ci);
                edges.push((a, b, ci));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (e, &(a, b, _)) in edges.iter().enumerate() {
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        // connectivity
        let mut mark = vec![false; n];
        let mut stack = vec![0];
        mark[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if !mark[y] {
                    mark[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        if count != n {
            return Err(InstanceError::Disconnected);
        }
        let sum: usize = cycles.iter().map(|c| c.len()).sum();
        let expected = n + cycles.len() - 1;
        if sum != expected {
            return Err(InstanceError::NotCactus { sum, expected });
        }
        for (i, l) in links.iter().enumerate() {
            if l.u >= n {
                return Err(InstanceError::VertexOutOfRange(l.u));
            }
            if l.v >= n {
                return Err(InstanceError::VertexOutOfRange(l.v));
            }
            if l.u == l.v {
                return Err(InstanceError::SelfLoop(i));
            }
            if !l.cost.is_positive() {
                return Err(InstanceError::NonPositiveCost(i));
            }
        }
        let links = links
            .into_iter()
            .enumerate()
            .map(|(i, mut l)| {
                l.id = i;
                l
            })
            .collect();
        let mut inst = CactusInstance {
            n,
            root,
            cycles,
            links,
            edges,
            adj,
            cuts: Vec::new(),
            vertex_cuts: Vec::new(),
            coverage: CoverageMatrix { rows: Vec::new() },
            sep: Vec::new(),
        };
        inst.build_separation();
        inst.enumerate_cuts();
        inst.build_coverage();
        Ok(inst)
    }

    fn build_separation(&mut self) {
        let n = self.n;
        let mut sep = vec![vec![REMOVED; n]; n];
        for (u, row) in sep.iter_mut().enumerate() {
            let mut label = 0u32;
            for s in 0..n {
                if s == u || row[s] != REMOVED {
                    continue;
                }
                row[s] = label;
                let mut stack = vec![s];
                while let Some(x) = stack.pop() {
                    for &(y, _) in &self.adj[x] {
                        if y != u && row[y] == REMOVED {
                            row[y] = label;
                            stack.push(y);
                        }
                    }
                }
                label += 1;
            }
        }
        self.sep = sep;
    }

    fn enumerate_cuts(&mut self) {
        let n = self.n;
        let mut cuts = Vec::new();
        for (ci, cyc) in self.cycles.iter().enumerate() {
            let m = cyc.len();
            // hanging set of each cycle vertex once the cycle's edges are gone
            let hanging: Vec<FixedBitSet> = cyc
                .iter()
                .map(|&q| {
                    let mut set = FixedBitSet::with_capacity(n);
                    set.insert(q);
                    let mut stack = vec![q];
                    while let Some(x) = stack.pop() {
                        for &(y, e) in &self.adj[x] {
                            if self.edges[e].2 != ci && !set.contains(y) {
                                set.insert(y);
                                stack.push(y);
                            }
                        }
                    }
                    set
                })
                .collect();
            let edge = |j: usize| (cyc[j], cyc[(j + 1) % m]);
            for a in 0..m {
                for b in a + 1..m {
                    let mut side = FixedBitSet::with_capacity(n);
                    for h in &hanging[a + 1..=b] {
                        side.union_with(h);
                    }
                    if side.contains(self.root) {
                        let mut comp = FixedBitSet::with_capacity(n);
                        comp.insert_range(..);
                        comp.difference_with(&side);
                        side = comp;
                    }
                    cuts.push(TwoCut { id: cuts.len(), members: side, boundary: [edge(a), edge(b)], cycle: ci });
                }
            }
        }
        let mut vertex_cuts = vec![FixedBitSet::with_capacity(cuts.len()); n];
        for c in &cuts {
            for v in c.members.ones() {
                vertex_cuts[v].insert(c.id);
            }
        }
        self.cuts = cuts;
        self.vertex_cuts = vertex_cuts;
    }

    fn build_coverage(&mut self) {
        let rows = self
            .links
            .iter()
            .map(|l| {
                let mut r = self.vertex_cuts[l.u].clone();
                r.symmetric_difference_with(&self.vertex_cuts[l.v]);
                r
            })
            .collect();
        self.coverage = CoverageMatrix { rows };
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut n = None;
        let mut root = None;
        let mut cycles = Vec::new();
        let mut links = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut toks = body.split_whitespace();
            let kw = toks.next().unwrap_or("");
            let rest: Vec<&str> = toks.collect();
            let bad = |msg: &str| InstanceError::Malformed { line, msg: msg.to_string() };
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("expected integer, found `{s}`")));
            match kw {
                "vertices" => {
                    if rest.len() != 1 {
                        return Err(bad("`vertices` takes one argument"));
                    }
                    n = Some(num(rest[0])?);
                }
                "root" => {
                    if rest.len() != 1 {
                        return Err(bad("`root` takes one argument"));
                    }
                    root = Some(num(rest[0])?);
                }
                "cycle" => {
                    if rest.len() < 2 {
                        return Err(bad("a cycle needs at least two vertices"));
                    }
                    cycles.push(rest.iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?);
                }
                "link" => {
                    if rest.len() != 2 && rest.len() != 3 {
                        return Err(bad("`link` takes two endpoints and an optional cost"));
                    }
                    let cost = match rest.get(2) {
                        Some(s) => parse_rational(s).ok_or_else(|| bad(&format!("bad cost `{s}`")))?,
                        None => rat(1),
                    };
                    links.push(Link::new(links.len(), num(rest[0])?, num(rest[1])?, cost));
                }
                other => return Err(bad(&format!("unknown keyword `{other}`"))),
            }
        }
        let n = n.ok_or(InstanceError::MissingVertices)?;
        Self::new(n, root.unwrap_or(0), cycles, links)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vertices {}", self.n);
        let _ = writeln!(s, "root {}", self.root);
        for c in &self.cycles {
            let vs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "cycle {}", vs.join(" "));
        }
        for l in &self.links {
            let _ = writeln!(s, "link {} {} {}", l.u, l.v, format_rational(&l.cost));
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: usize) -> &Link {
        &self.links[id]
    }

    pub fn cuts(&self) -> &[TwoCut] {
        &self.cuts
    }

    pub fn num_cuts(&self) -> usize {
        self.cuts.len()
    }

    pub fn coverage(&self) -> &CoverageMatrix {
        &self.coverage
    }

    /// Cuts containing vertex `v`.
    pub fn cuts_containing(&self, v: usize) -> &FixedBitSet {
        &self.vertex_cuts[v]
    }

    /// The links covering cut `c`, i.e. δ_L(C).
    pub fn covering_links(&self, c: usize) -> Vec<usize> {
        (0..self.links.len()).filter(|&l| self.coverage.covers(l, c)).collect()
    }

    pub fn cost_of(&self, links: &[usize]) -> Rational {
        links.iter().fold(Rational::zero(), |acc, &l| acc + &self.links[l].cost)
    }

    pub fn with_links(&self, links: Vec<Link>) -> Result<Self, InstanceError> {
        Self::new(self.n, self.root, self.cycles.clone(), links)
    }

    pub fn rerooted(&self, root: usize) -> Result<Self, InstanceError> {
        Self::new(self.n, root, self.cycles.clone(), self.links.clone())
    }

    pub fn is_unit_cost(&self) -> bool {
        self.links.iter().all(|l| l.cost.is_one())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.adj[v].len() == 2
    }

    pub fn terminals(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.is_terminal(v)).collect()
    }

    /// Whether `v` lies on some cycle with at least three vertices.
    pub fn on_long_cycle(&self, v: usize) -> bool {
        self.cycles.iter().any(|c| c.len() >= 3 && c.contains(&v))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(w, _)| w)
    }

    /// First cut not covered by `links`.
    pub fn first_uncovered(&self, links: &[usize]) -> Option<usize> {
        let cov = self.coverage.union_of(links, self.cuts.len());
        (0..self.cuts.len()).find(|&c| !cov.contains(c))
    }

    pub fn uncovered(&self, links: &[usize]) -> Vec<usize> {
        let cov = self.coverage.union_of(links, self.cuts.len());
        (0..self.cuts.len()).filter(|&c| !cov.contains(c)).collect()
    }

    pub fn is_feasible(&self, links: &[usize]) -> bool {
        self.first_uncovered(links).is_none()
    }

    /// First cut without any covering link.
    pub fn infeasible_cut(&self) -> Option<usize> {
        let all: Vec<usize> = (0..self.links.len()).collect();
        self.first_uncovered(&all)
    }

    /// For each cut, the lowest-id link in `links` covering it.
    pub fn certificate(&self, links: &[usize]) -> Option<Vec<usize>> {
        let mut sorted = links.to_vec();
        sorted.sort_unstable();
        (0..self.cuts.len())
            .map(|c| sorted.iter().copied().find(|&l| self.coverage.covers(l, c)))
            .collect()
    }

    /// `u` lies on every path from `v` to the root.
    pub fn is_ancestor(&self, u: usize, v: usize) -> bool {
        self.is_ancestor_wrt(self.root, u, v)
    }

    /// Ancestry with respect to an arbitrary root.
    pub fn is_ancestor_wrt(&self, root: usize, u: usize, v: usize) -> bool {
        u == v || u == root || (v != root && self.sep[u][v] != self.sep[u][root])
    }

    /// `x` lies on every path between `v` and `w`.
    pub fn on_every_path(&self, x: usize, v: usize, w: usize) -> bool {
        x == v || x == w || self.sep[x][v] != self.sep[x][w]
    }

    /// All vertices on every `v`-`w` path.
    pub fn path_core(&self, v: usize, w: usize) -> Vec<usize> {
        (0..self.n).filter(|&x| self.on_every_path(x, v, w)).collect()
    }

    pub fn descendants(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&w| self.is_ancestor(v, w)).collect()
    }

    pub fn descendants_wrt(&self, root: usize, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&w| self.is_ancestor_wrt(root, v, w)).collect()
    }

    /// Component label of `v` in `G - u`.
    pub fn component_without(&self, u: usize, v: usize) -> Option<u32> {
        let c = self.sep[u][v];
        (c != REMOVED).then_some(c)
    }

    /// Geometric shadow pairs of a link, excluding the link's own pair.
    pub fn shadow_pairs(&self, link: usize) -> Vec<(usize, usize)> {
        let l = &self.links[link];
        let q = self.path_core(l.u, l.v);
        let own = l.endpoints();
        let mut out = Vec::new();
        for (i, &a) in q.iter().enumerate() {
            for &b in &q[i + 1..] {
                if (a, b) != own {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Coverage of the pair `{a, b}` regardless of whether it is a link.
    pub fn pair_coverage(&self, a: usize, b: usize) -> FixedBitSet {
        let mut r = self.vertex_cuts[a].clone();
        r.symmetric_difference_with(&self.vertex_cuts[b]);
        r
    }

    pub fn is_shadow_complete(&self) -> bool {
        (0..self.links.len()).all(|l| {
            let c = &self.links[l].cost;
            self.shadow_pairs(l)
                .into_iter()
                .all(|(a, b)| self.links.iter().any(|m| m.endpoints() == (a, b) && m.cost <= *c))
        })
    }

    /// Close the link set under shadows. New links keep the cost of the
    /// cheapest link generating them and record it as their origin.
    pub fn shadow_closure(&self) -> Self {
        let mut links = self.links.clone();
        let mut best: HashMap<(usize, usize), Rational> = HashMap::new();
        for l in &links {
            let e = best.entry(l.endpoints()).or_insert_with(|| l.cost.clone());
            if l.cost < *e {
                *e = l.cost.clone();
            }
        }
        let mut head = 0;
        // generators are processed in id order; new links get appended and processed later
        while head < links.len() {
            let (cost, id) = (links[head].cost.clone(), head);
            let pairs = {
                let l = &links[head];
                let q = self.path_core(l.u, l.v);
                let own = l.endpoints();
                let mut out = Vec::new();
                for (i, &a) in q.iter().enumerate() {
                    for &b in &q[i + 1..] {
                        if (a, b) != own {
                            out.push((a, b));
                        }
                    }
                }
                out
            };
            for (a, b) in pairs {
                let present = best.get(&(a, b)).is_some_and(|c| *c <= cost);
                if !present {
                    best.insert((a, b), cost.clone());
                    let mut nl = Link::new(links.len(), a, b, cost.clone());
                    nl.origin = Some(id);
                    links.push(nl);
                }
            }
            head += 1;
        }
        self.with_links(links).expect("shadows of valid links are valid")
    }

    /// Follow shadow provenance back to a link with no origin.
    pub fn original_of(&self, mut l: usize) -> usize {
        while let Some(o) = self.links[l].origin {
            l = o;
        }
        l
    }

    /// Contract vertex classes given by `group` (arbitrary labels).
    /// Links whose endpoints merge are dropped.
    pub fn contract(&self, group: &[usize], root_override: Option<usize>) -> Contraction {
        let mut label: HashMap<usize, usize> = HashMap::new();
        let mut vertex_map = vec![0; self.n];
        for v in 0..self.n {
            let next = label.len();
            vertex_map[v] = *label.entry(group[v]).or_insert(next);
        }
        let n2 = label.len();
        let mut cycles = Vec::new();
        for cyc in &self.cycles {
            let mut seq: Vec<usize> = cyc.iter().map(|&v| vertex_map[v]).collect();
            seq.push(seq[0]);
            let mut stack: Vec<usize> = Vec::new();
            for w in seq {
                if let Some(pos) = stack.iter().position(|&x| x == w) {
                    let drained: Vec<usize> = stack.drain(pos + 1..).collect();
                    if !drained.is_empty() {
                        let mut c = vec![w];
                        c.extend(drained);
                        cycles.push(c);
                    }
                } else {
                    stack.push(w);
                }
            }
        }
        let mut link_map = vec![None; self.links.len()];
        let mut links = Vec::new();
        for l in &self.links {
            let (a, b) = (vertex_map[l.u], vertex_map[l.v]);
            if a != b {
                link_map[l.id] = Some(links.len());
                let mut nl = Link::new(links.len(), a, b, l.cost.clone());
                nl.origin = l.origin.and_then(|o| link_map.get(o).copied().flatten());
                links.push(nl);
            }
        }
        let root = root_override.map(|r| vertex_map[r]).unwrap_or(vertex_map[self.root]);
        let instance = CactusInstance::new(n2, root, cycles, links).expect("contraction of a cactus is a cactus");
        Contraction { instance, vertex_map, link_map }
    }

    /// Residual instance after fixing `fixed`: contract, one link at a time,
    /// every vertex on all paths between the link's endpoints.
    pub fn residual_instance(&self, fixed: &[usize]) -> Result<Residual, InstanceError> {
        for &l in fixed {
            if l >= self.links.len() {
                return Err(InstanceError::UnknownLink(l));
            }
        }
        let mut cur = CactusInstance::new(self.n, self.root, self.cycles.clone(), Vec::new())?;
        let mut vmap: Vec<usize> = (0..self.n).collect();
        for &l in fixed {
            let (a, b) = (vmap[self.links[l].u], vmap[self.links[l].v]);
            if a == b {
                continue;
            }
            let q = cur.path_core(a, b);
            let mut group: Vec<usize> = (0..cur.n).collect();
            for &x in &q {
                group[x] = a;
            }
            let c = cur.contract(&group, None);
            for v in vmap.iter_mut() {
                *v = c.vertex_map[*v];
            }
            cur = c.instance;
        }
        // canonical labels: classes ordered by smallest original vertex
        let mut canon = vec![usize::MAX; cur.n];
        let mut next = 0;
        for v in 0..self.n {
            if canon[vmap[v]] == usize::MAX {
                canon[vmap[v]] = next;
                next += 1;
            }
        }
        let vertex_map: Vec<usize> = vmap.iter().map(|&x| canon[x]).collect();
        let mut cycles: Vec<Vec<usize>> =
            cur.cycles.iter().map(|c| normalize_cycle(c.iter().map(|&x| canon[x]).collect())).collect();
        cycles.sort();
        let fixed_set: HashSet<usize> = fixed.iter().copied().collect();
        let mut link_map = vec![None; self.links.len()];
        let mut link_origin = Vec::new();
        let mut links = Vec::new();
        for l in &self.links {
            let (a, b) = (vertex_map[l.u], vertex_map[l.v]);
            if fixed_set.contains(&l.id) || a == b {
                continue;
            }
            link_map[l.id] = Some(links.len());
            link_origin.push(l.id);
            links.push(Link::new(links.len(), a, b, l.cost.clone()));
        }
        // shadow provenance survives when the origin survives
        for (i, &o) in link_origin.iter().enumerate() {
            links[i].origin = self.links[o].origin.and_then(|p| link_map[p]);
        }
        let instance = CactusInstance::new(next, vertex_map[self.root], cycles, links)?;
        let index: HashMap<&FixedBitSet, usize> = self.cuts.iter().map(|c| (&c.members, c.id)).collect();
        let mut cut_map = Vec::with_capacity(instance.cuts.len());
        for c in &instance.cuts {
            let mut pre = FixedBitSet::with_capacity(self.n);
            for v in 0..self.n {
                if c.members.contains(vertex_map[v]) {
                    pre.insert(v);
                }
            }
            let id = *index.get(&pre).expect("residual cut pulls back to an original cut");
            cut_map.push(id);
        }
        let uncovered = self.uncovered(fixed);
        let mut mapped = cut_map.clone();
        mapped.sort_unstable();
        assert_eq!(mapped, uncovered, "residual cuts must be exactly the uncovered cuts");
        Ok(Residual { instance, vertex_map, link_map, link_origin, cut_map })
    }

    pub fn principal_structure(&self, center: usize) -> PrincipalStructure {
        let mut labels: Vec<u32> = Vec::new();
        let mut comp_of = vec![None; self.n];
        for v in 0..self.n {
            if v == center {
                continue;
            }
            let lab = self.sep[center][v];
            let idx = match labels.iter().position(|&x| x == lab) {
                Some(i) => i,
                None => {
                    labels.push(lab);
                    labels.len() - 1
                }
            };
            comp_of[v] = Some(idx);
        }
        let q = labels.len();
        let mut components = vec![Vec::new(); q];
        let mut terminal_counts = vec![0; q];
        for v in 0..self.n {
            if let Some(i) = comp_of[v] {
                components[i].push(v);
                if self.is_terminal(v) {
                    terminal_counts[i] += 1;
                }
            }
        }
        let mut class = Vec::with_capacity(self.links.len());
        let mut link_sets = vec![Vec::new(); q];
        for l in &self.links {
            let (cu, cv) = (comp_of[l.u], comp_of[l.v]);
            let k = match (cu, cv) {
                (Some(a), Some(b)) if a != b => LinkClass::Cross,
                _ => {
                    if self.is_ancestor_wrt(center, l.u, l.v) || self.is_ancestor_wrt(center, l.v, l.u) {
                        LinkClass::Up
                    } else {
                        LinkClass::In
                    }
                }
            };
            class.push(k);
            for i in [cu, cv].into_iter().flatten() {
                if !link_sets[i].contains(&l.id) {
                    link_sets[i].push(l.id);
                }
            }
        }
        PrincipalStructure { center, comp_of, components, class, link_sets, terminal_counts }
    }

    /// Sub-instance on `V_i ∪ {center}` rooted at the center; every vertex
    /// outside the component is merged into the center.
    pub fn principal_subcactus(&self, ps: &PrincipalStructure, i: usize) -> Contraction {
        let group: Vec<usize> = (0..self.n)
            .map(|v| if ps.comp_of[v] == Some(i) { v } else { ps.center })
            .collect();
        self.contract(&group, Some(ps.center))
    }
}

/// Rotate to the smallest vertex and pick the lexicographically smaller direction.
pub fn normalize_cycle(c: Vec<usize>) -> Vec<usize> {
    let m = c.len();
    let p = (0..m).min_by_key(|&i| c[i]).unwrap_or(0);
    let fwd: Vec<usize> = (0..m).map(|j| c[(p + j) % m]).collect();
    let bwd: Vec<usize> = (0..m).map(|j| c[(p + m - j) % m]).collect();
    fwd.min(bwd)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Solution {
    pub links: Vec<usize>,
    #[serde(serialize_with = "ser_rational")]
    pub cost: Rational,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

impl Solution {
    pub fn new(inst: &CactusInstance, mut links: Vec<usize>) -> Self {
        links.sort_unstable();
        links.dedup();
        let cost = inst.cost_of(&links);
        Solution { links, cost }
    }

    pub fn empty() -> Self {
        Solution { links: Vec::new(), cost: Rational::zero() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_cut_members() {
        let inst = CactusInstance::parse("vertices 4\nroot 0\ncycle 0 1 2 3\n").unwrap();
        let got: Vec<Vec<usize>> = inst.cuts().iter().map(|c| c.vertices()).collect();
        assert_eq!(got, vec![vec![1], vec![1, 2], vec![1, 2, 3], vec![2], vec![2, 3], vec![3]]);
    }

    #[test]
    fn normalize_picks_smaller_direction() {
        assert_eq!(normalize_cycle(vec![3, 1, 2]), vec![1, 2, 3]);
        assert_eq!(normalize_cycle(vec![2, 1, 3]), vec![1, 2, 3]);
    }
}
