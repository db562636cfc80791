//! Covering heavy cuts: the cactus is replaced by a cycle that keeps the
//! chosen cuts, links become points in the plane, and each cut becomes a
//! rectangle hit by stripe rounding.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cactus::{rat, ratio, CactusInstance, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeavyError {
    #[error("rectangle {0} has total weight below one")]
    LightRectangle(usize),
    #[error("rectangles do not share a top coordinate")]
    MixedTops,
    #[error("x has {got} entries, instance has {want} links")]
    Dimension { got: usize, want: usize },
    #[error("negative weight on link {0}")]
    NegativeWeight(usize),
    #[error("eps must be positive")]
    BadEps,
}

/// Closed axis-parallel rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl Rect {
    pub fn contains(&self, p: (i64, i64)) -> bool {
        self.x0 <= p.0 && p.0 <= self.x1 && self.y0 <= p.1 && p.1 <= self.y1
    }
}

#[derive(Debug, Clone)]
pub struct WeightedPointSet {
    pub points: Vec<(i64, i64)>,
    pub weights: Vec<Rational>,
    pub rects: Vec<Rect>,
}

impl WeightedPointSet {
    pub fn rect_weight(&self, r: usize) -> Rational {
        let rect = &self.rects[r];
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| rect.contains(**p))
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    pub fn total_weight(&self) -> Rational {
        self.weights.iter().fold(Rational::zero(), |acc, w| acc + w)
    }

    pub fn hits_all(&self, h: &[usize]) -> bool {
        self.rects.iter().all(|r| h.iter().any(|&p| r.contains(self.points[p])))
    }
}

/// Hitting set of size at most `2 Σ x_p` for rectangles with a common top.
///
/// Points are swept by first coordinate and grouped into stripes of weight
/// exactly ½, splitting a point when needed; the topmost point of every full
/// stripe is picked.
pub fn stripe_hit(ps: &WeightedPointSet) -> Result<Vec<usize>, HeavyError> {
    if let Some(first) = ps.rects.first() {
        if ps.rects.iter().any(|r| r.y1 != first.y1) {
            return Err(HeavyError::MixedTops);
        }
    }
    for r in 0..ps.rects.len() {
        if ps.rect_weight(r) < rat(1) {
            return Err(HeavyError::LightRectangle(r));
        }
    }
    let mut order: Vec<usize> = (0..ps.points.len()).filter(|&p| ps.weights[p].is_positive()).collect();
    order.sort_by_key(|&p| (ps.points[p].0, p));
    let half = ratio(1, 2);
    let mut picked = Vec::new();
    let mut acc = Rational::zero();
    let mut top: Option<usize> = None;
    for p in order {
        let mut w = ps.weights[p].clone();
        while w.is_positive() {
            let room = &half - &acc;
            let take = if w < room { w.clone() } else { room };
            acc += &take;
            w -= &take;
            top = match top {
                Some(t) if ps.points[t].1 >= ps.points[p].1 => Some(t),
                _ => Some(p),
            };
            if acc == half {
                picked.push(top.take().expect("stripe has a point"));
                acc = Rational::zero();
            }
        }
    }
    picked.sort_unstable();
    picked.dedup();
    Ok(picked)
}

/// Vertex order of a Hamiltonian cycle on `V`, starting at the root, built by
/// splicing the cactus cycles together at shared vertices. Every 2-cut of the
/// cactus is a contiguous run of positions `1..n` in this order.
pub fn cactus_to_cycle(inst: &CactusInstance) -> Vec<usize> {
    let n = inst.n();
    if inst.cycles().is_empty() {
        return vec![inst.root()];
    }
    let mut used = vec![false; inst.cycles().len()];
    let start = inst.cycles().iter().position(|c| c.contains(&inst.root())).expect("root lies on a cycle");
    let mut seq = inst.cycles()[start].clone();
    used[start] = true;
    let mut placed = vec![false; n];
    for &v in &seq {
        placed[v] = true;
    }
    loop {
        let Some((ci, z)) = inst
            .cycles()
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .find_map(|(i, c)| c.iter().find(|&&v| placed[v]).map(|&z| (i, z)))
        else {
            break;
        };
        used[ci] = true;
        let c = &inst.cycles()[ci];
        let k = c.iter().position(|&v| v == z).expect("shared vertex");
        // the other cycle read from z onwards, without z, goes right before z
        let rest: Vec<usize> = (1..c.len()).map(|j| c[(k + j) % c.len()]).collect();
        for &v in &rest {
            placed[v] = true;
        }
        let pos = seq.iter().position(|&v| v == z).expect("z is placed");
        seq.splice(pos..pos, rest);
    }
    let r = seq.iter().position(|&v| v == inst.root()).expect("root placed");
    seq.rotate_left(r);
    seq
}

/// Position interval `[a, b]` of cut `c` on the cycle order, if contiguous.
pub fn cut_interval(inst: &CactusInstance, order: &[usize], c: usize) -> Option<(usize, usize)> {
    let members = &inst.cuts()[c].members;
    let pos: Vec<usize> = (0..order.len()).filter(|&i| members.contains(order[i])).collect();
    let (a, b) = (*pos.first()?, *pos.last()?);
    (b - a + 1 == pos.len()).then_some((a, b))
}

#[derive(Debug, Clone)]
pub struct HeavyCover {
    pub links: Vec<usize>,
    pub heavy_cuts: Vec<usize>,
    pub up_rects: usize,
    pub left_rects: usize,
}

/// Round a fractional cover `y` of the cut family `family` to at most
/// `8 · y(L)` links covering every cut in the family.
pub fn cover_cut_family(inst: &CactusInstance, family: &[usize], y: &[Rational]) -> Result<HeavyCover, HeavyError> {
    if y.len() != inst.links().len() {
        return Err(HeavyError::Dimension { got: y.len(), want: inst.links().len() });
    }
    if let Some(l) = y.iter().position(|v| v.is_negative()) {
        return Err(HeavyError::NegativeWeight(l));
    }
    if family.is_empty() {
        return Ok(HeavyCover { links: Vec::new(), heavy_cuts: Vec::new(), up_rects: 0, left_rects: 0 });
    }
    let order = cactus_to_cycle(inst);
    let n = order.len() as i64;
    let mut pos = vec![0usize; inst.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let points: Vec<(i64, i64)> = inst
        .links()
        .iter()
        .map(|l| {
            let (i, j) = (pos[l.u].min(pos[l.v]) as i64, pos[l.u].max(pos[l.v]) as i64);
            (i, j)
        })
        .collect();
    let weights: Vec<Rational> = y
        .iter()
        .map(|v| {
            let w = v * rat(2);
            if w > rat(1) {
                rat(1)
            } else {
                w
            }
        })
        .collect();
    let half = ratio(1, 2);
    let mut up = Vec::new();
    let mut left = Vec::new();
    for &c in family {
        let (a, b) = cut_interval(inst, &order, c).expect("cuts are contiguous on the cycle");
        let (a, b) = (a as i64, b as i64);
        let r_up = Rect { x0: a, x1: b, y0: b + 1, y1: n };
        let load = points
            .iter()
            .zip(y)
            .filter(|(p, _)| r_up.contains(**p))
            .fold(Rational::zero(), |acc, (_, v)| acc + v);
        if load >= half {
            up.push(r_up);
        } else {
            // rotated (i, j) -> (j, -i) so all tops sit at 0
            left.push(Rect { x0: a, x1: b, y0: -(a - 1), y1: 0 });
        }
    }
    let mut links = Vec::new();
    if !up.is_empty() {
        let ps = WeightedPointSet { points: points.clone(), weights: weights.clone(), rects: up.clone() };
        links.extend(stripe_hit(&ps)?);
    }
    if !left.is_empty() {
        let rotated: Vec<(i64, i64)> = points.iter().map(|&(i, j)| (j, -i)).collect();
        let ps = WeightedPointSet { points: rotated, weights, rects: left.clone() };
        links.extend(stripe_hit(&ps)?);
    }
    links.sort_unstable();
    links.dedup();
    for &c in family {
        assert!(links.iter().any(|&l| inst.coverage().covers(l, c)), "cut {c} must be covered");
    }
    Ok(HeavyCover { links, heavy_cuts: family.to_vec(), up_rects: up.len(), left_rects: left.len() })
}

/// Cuts with `x(δ_L(C)) > 16/ε`.
pub fn heavy_cuts(inst: &CactusInstance, x: &[Rational], eps: &Rational) -> Vec<usize> {
    let threshold = rat(16) / eps;
    (0..inst.num_cuts())
        .filter(|&c| {
            let load = (0..x.len()).filter(|&l| inst.coverage().covers(l, c)).fold(Rational::zero(), |a, l| a + &x[l]);
            load > threshold
        })
        .collect()
}

/// Cover every `x`-heavy cut with at most `ε/2 · x(L)` links.
pub fn cover_heavy_cuts(inst: &CactusInstance, x: &[Rational], eps: &Rational) -> Result<HeavyCover, HeavyError> {
    if !eps.is_positive() {
        return Err(HeavyError::BadEps);
    }
    if x.len() != inst.links().len() {
        return Err(HeavyError::Dimension { got: x.len(), want: inst.links().len() });
    }
    let family = heavy_cuts(inst, x, eps);
    let scale = eps / rat(16);
    let y: Vec<Rational> = x.iter().map(|v| v * &scale).collect();
    let cover = cover_cut_family(inst, &family, &y)?;
    let total = x.iter().fold(Rational::zero(), |a, v| a + v);
    let bound = eps * total / rat(2);
    assert!(rat(cover.links.len() as i64) <= bound || family.is_empty(), "heavy cover exceeds ε/2 · x(L)");
    Ok(cover)
}

/// Sum of `2 · y` capped at one per point; the weight stripe rounding pays for.
pub fn capped_weight(y: &[Rational]) -> Rational {
    y.iter().fold(Rational::zero(), |acc, v| {
        let w = v * rat(2);
        acc + if w > Rational::one() { Rational::one() } else { w }
    })
}
