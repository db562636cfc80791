//! Numeric certification of the stack-analysis constants.
//!
//! The b-condition is certified on a grid over
//! `{(λ⁰, μ⁰, λ¹, μ¹, η) : η ≤ λ⁰ + μ⁰ + λ¹ + μ¹ ≤ 1}` using monotone
//! cell bounds, with adaptive bisection of cells whose bound is too weak.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("b must lie strictly between 0 and 1/2, got {0}")]
    BadB(f64),
    #[error("grid must have at least {min} cells per axis, got {got}")]
    CoarseGrid { got: usize, min: usize },
}

pub const MIN_GRID: usize = 4;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundParams {
    pub b: f64,
    pub grid: usize,
    pub refine: usize,
    pub tol: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { b: 0.42, grid: 64, refine: 8, tol: 1e-6 }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), BoundError> {
        if !(self.b > 0.0 && self.b < 0.5) {
            return Err(BoundError::BadB(self.b));
        }
        if self.grid < MIN_GRID {
            return Err(BoundError::CoarseGrid { got: self.grid, min: MIN_GRID });
        }
        Ok(())
    }

    /// `1 / (1 − 2b)`.
    pub fn cycle_length_cap(&self) -> f64 {
        1.0 / (1.0 - 2.0 * self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StackVector {
    pub lambda0: f64,
    pub mu0: f64,
    pub lambda1: f64,
    pub mu1: f64,
    pub eta: f64,
}

impl StackVector {
    pub fn load(&self) -> f64 {
        self.lambda0 + self.mu0 + self.lambda1 + self.mu1
    }

    pub fn in_domain(&self) -> bool {
        let s = self.load();
        [self.lambda0, self.mu0, self.lambda1, self.mu1, self.eta].iter().all(|&v| (0.0..=1.0).contains(&v))
            && self.eta <= s
            && s <= 1.0
    }
}

pub fn f(z: f64) -> f64 {
    z + (-z).exp() - 1.0
}

pub fn g(l0: f64, m0: f64, l1: f64, m1: f64) -> f64 {
    let s = l0 + m0 + l1 + m1;
    (-s).exp() * (1.0 + (m1 + l1).exp() - (m1 + l1 + m0).exp() * (1.0 + l0) - m1.exp() * (1.0 + l1) + s.exp() * s)
}

pub fn h1(l0: f64, m0: f64, l1: f64, m1: f64, eta: f64) -> f64 {
    let s = l0 + m0 + l1 + m1;
    if eta > s / 2.0 {
        (eta - s).exp()
    } else {
        1.0 - s + eta
    }
}

pub fn h_a(_l0: f64, _m0: f64, _l1: f64, _m1: f64, e: f64) -> f64 {
    1.0 - e + e * e / 2.0 - (-e).exp()
}

pub fn h_b(_l0: f64, _m0: f64, l1: f64, m1: f64, e: f64) -> f64 {
    -(-e).exp() + (m1 - e).exp() * (1.0 + l1) - m1 * (1.0 - e + m1 / 2.0) - l1 * (1.0 + m1 - e)
}

pub fn h_c(_l0: f64, _m0: f64, l1: f64, m1: f64, e: f64) -> f64 {
    -(-e).exp() - (l1 + m1 - e).exp() + (m1 - e).exp() * (1.0 + l1) + 1.0 + l1 * l1 / 2.0 - e + e * e / 2.0
}

pub fn h_d(l0: f64, m0: f64, l1: f64, m1: f64, e: f64) -> f64 {
    -(-e).exp() - (l1 + m1 - e).exp() + (m1 + l1 + m0 - e).exp() * (1.0 + l0) + (m1 - e).exp() * (1.0 + l1)
        - (m0 + m1) * (1.0 + m0 / 2.0 + m1 / 2.0 - e)
        - l1 * (1.0 + m0 + m1 - e)
        - l0 * (1.0 + m1 + l1 + m0 - e)
}

pub fn h2(l0: f64, m0: f64, l1: f64, m1: f64, e: f64) -> f64 {
    if e <= m1 {
        h_a(l0, m0, l1, m1, e)
    } else if e <= m1 + l1 {
        h_b(l0, m0, l1, m1, e)
    } else if e <= m1 + l1 + m0 {
        h_c(l0, m0, l1, m1, e)
    } else {
        h_d(l0, m0, l1, m1, e)
    }
}

pub fn gain(l0: f64, m0: f64, l1: f64, m1: f64, eta: f64) -> f64 {
    h1(l0, m0, l1, m1, eta) * h2(l0, m0, l1, m1, eta)
}

/// `∫₀^y (e^{-u} − 1 + u) du` for `y > 0`, else 0. Nondecreasing.
fn psi(y: f64) -> f64 {
    if y > 0.0 {
        1.0 - (-y).exp() - y + y * y / 2.0
    } else {
        0.0
    }
}

/// `e^{-y} − 1 + y` for `y > 0`, else 0. Nondecreasing.
fn phi(y: f64) -> f64 {
    if y > 0.0 {
        (-y).exp() - 1.0 + y
    } else {
        0.0
    }
}

/// `h₂` written as four terms, each monotone in every argument.
pub fn h2_monotone(l0: f64, m0: f64, l1: f64, m1: f64, e: f64) -> f64 {
    let a = e - m1 - l1;
    (psi(e) - psi(e - m1)) + l1 * phi(e - m1) + (psi(a) - psi(a - m0)) + l0 * phi(a - m0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZValues {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
}

pub fn z_values(b: f64) -> ZValues {
    ZValues { z1: -(b - 1.0 / 3.0), z2: -2.0 * (b - 2.0 / 5.0) + 1.0 / 30.0, z3: 0.5 - b, z4: 1.0 - b }
}

fn tail_terms(z: &ZValues, eta: f64, s: f64, x: f64) -> f64 {
    s * z.z1 + (eta - s) * z.z2 + (x - eta).max(0.0) * z.z3 + (1.0 - x - eta + s).max(0.0) * z.z4
}

/// Minimum of the `s_vw`, `x(S_v)` part over `η ∈ [eta_lo, eta_hi]`,
/// `0 ≤ s ≤ η`, `s ≤ x ≤ 1`. The objective is convex and piecewise linear,
/// so the minimum sits on a vertex of the plane arrangement.
pub fn tail_min(b: f64, eta_lo: f64, eta_hi: f64) -> f64 {
    let z = z_values(b);
    let planes: [([f64; 3], f64); 8] = [
        ([1.0, 0.0, 0.0], eta_lo),
        ([1.0, 0.0, 0.0], eta_hi),
        ([0.0, 1.0, 0.0], 0.0),
        ([-1.0, 1.0, 0.0], 0.0),
        ([0.0, -1.0, 1.0], 0.0),
        ([0.0, 0.0, 1.0], 1.0),
        ([-1.0, 0.0, 1.0], 0.0),
        ([1.0, -1.0, 1.0], 1.0),
    ];
    let eps = 1e-12;
    let mut best = f64::INFINITY;
    for i in 0..8 {
        for j in i + 1..8 {
            for k in j + 1..8 {
                let Some(p) = solve3([planes[i].0, planes[j].0, planes[k].0], [planes[i].1, planes[j].1, planes[k].1])
                else {
                    continue;
                };
                let (eta, s, x) = (p[0], p[1], p[2]);
                let ok = eta >= eta_lo - eps
                    && eta <= eta_hi + eps
                    && s >= -eps
                    && s <= eta + eps
                    && x >= s - eps
                    && x <= 1.0 + eps;
                if ok {
                    best = best.min(tail_terms(&z, eta, s, x));
                }
            }
        }
    }
    best - 1e-12
}

fn solve3(a: [[f64; 3]; 3], d: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d0 = det(a);
    if d0.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = d[r];
        }
        *o = det(m) / d0;
    }
    Some(out)
}

/// Value of the b-condition expression at a point of the domain.
pub fn b_condition_value(b: f64, v: &StackVector) -> f64 {
    let d = v.load() - v.eta;
    let gn = gain(v.lambda0, v.mu0, v.lambda1, v.mu1, v.eta);
    let head = if d > 0.0 {
        b * gn / d
    } else if gn > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    head + tail_min(b, v.eta, v.eta)
}

/// Box `[lo, hi]` over `(λ⁰, μ⁰, λ¹, μ¹, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub lo: [f64; 5],
    pub hi: [f64; 5],
}

impl Cell {
    fn intersects_domain(&self) -> bool {
        let s_lo: f64 = self.lo[..4].iter().sum();
        let s_hi: f64 = self.hi[..4].iter().sum();
        s_lo < 1.0 && self.lo[4] < s_hi.min(1.0)
    }

    fn split(&self) -> (Cell, Cell) {
        let axis = (0..5).max_by(|&a, &b| (self.hi[a] - self.lo[a]).total_cmp(&(self.hi[b] - self.lo[b]))).unwrap_or(0);
        let mid = (self.lo[axis] + self.hi[axis]) / 2.0;
        let (mut a, mut b) = (*self, *self);
        a.hi[axis] = mid;
        b.lo[axis] = mid;
        (a, b)
    }

    /// A domain point near the center.
    pub fn sample_point(&self) -> StackVector {
        let c: Vec<f64> = (0..5).map(|i| (self.lo[i] + self.hi[i]) / 2.0).collect();
        let mut v = StackVector { lambda0: c[0], mu0: c[1], lambda1: c[2], mu1: c[3], eta: c[4] };
        let s = v.load();
        if s > 1.0 {
            let k = 1.0 / s;
            v.lambda0 *= k;
            v.mu0 *= k;
            v.lambda1 *= k;
            v.mu1 *= k;
        }
        v.eta = v.eta.clamp(0.0, v.load());
        v
    }

    /// Lower bound of the b-condition expression over the cell ∩ domain.
    pub fn lower_bound(&self, b: f64) -> f64 {
        let eb = self.hi[4].min((self.hi[..4].iter().sum::<f64>()).min(1.0));
        self.head_lower_bound(b) + tail_min(b, self.lo[4], eb)
    }

    /// Lower bound of the gain part alone.
    pub fn head_lower_bound(&self, b: f64) -> f64 {
        let [l0a, m0a, l1a, m1a, ea] = self.lo;
        let [l0b, m0b, l1b, m1b, _] = self.hi;
        let s_hi = (l0b + m0b + l1b + m1b).min(1.0);
        let d_hi = s_hi - ea;
        let h2_lo = {
            let t1 = psi(ea) - psi(ea - m1a);
            let t2 = l1a * phi(ea - m1b);
            let a = ea - m1b - l1b;
            let t3 = psi(a) - psi(a - m0a);
            let t4 = l0a * phi(a - m0b);
            (t1 + t2 + t3 + t4 - 1e-12).max(0.0)
        };
        let h1_lo = if d_hi < ea { (-d_hi).exp() } else { (1.0 - d_hi).max(0.0) };
        if d_hi > 0.0 {
            b * h1_lo * h2_lo / d_hi
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Certification {
    Certified,
    Failed,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct BConditionReport {
    pub params: BoundParams,
    pub status: Certification,
    /// Smallest certified lower bound over all leaf cells.
    pub min_lower_bound: f64,
    pub lower_bound_cell: Cell,
    /// Smallest evaluated value and where it was found.
    pub min_value: f64,
    pub argmin: StackVector,
    pub cells: u64,
    pub refined: u64,
    /// Cell with a negative evaluated point, or an unresolved cell.
    pub witness: Option<Cell>,
}

#[derive(Clone, Copy)]
struct Acc {
    lb: f64,
    lb_cell: Cell,
    val: f64,
    arg: StackVector,
    cells: u64,
    refined: u64,
    failed: Option<Cell>,
    open: Option<Cell>,
}

fn better_cell(a: Option<Cell>, b: Option<Cell>) -> Option<Cell> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x.lo.partial_cmp(&y.lo) == Some(std::cmp::Ordering::Greater) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn merge(a: Acc, b: Acc) -> Acc {
    let pick_lb = a.lb < b.lb || (a.lb == b.lb && a.lb_cell.lo <= b.lb_cell.lo);
    let pick_val = a.val < b.val || (a.val == b.val && a.lb_cell.lo <= b.lb_cell.lo);
    Acc {
        lb: if pick_lb { a.lb } else { b.lb },
        lb_cell: if pick_lb { a.lb_cell } else { b.lb_cell },
        val: if pick_val { a.val } else { b.val },
        arg: if pick_val { a.arg } else { b.arg },
        cells: a.cells + b.cells,
        refined: a.refined + b.refined,
        failed: better_cell(a.failed, b.failed),
        open: better_cell(a.open, b.open),
    }
}

/// Resolution of the initial partition; uncertified cells are bisected
/// down to `1/grid` and then up to `5·refine` more times.
const COARSE_GRID: usize = 8;

/// Cells whose bound is within this margin also get a point evaluation.
const PROBE_MARGIN: f64 = 0.01;

fn certify_cell(cell: Cell, p: &BoundParams, splits_left: usize, tail: Option<f64>, stop: &AtomicBool) -> Acc {
    let coarse = (0..5).any(|i| cell.hi[i] - cell.lo[i] > 1.0 / p.grid as f64 + 1e-15);
    let lb = match tail {
        Some(t) => cell.head_lower_bound(p.b) + t,
        None => cell.lower_bound(p.b),
    };
    let mut acc = Acc {
        lb,
        lb_cell: cell,
        val: f64::INFINITY,
        arg: cell.sample_point(),
        cells: 1,
        refined: 0,
        failed: None,
        open: None,
    };
    if lb >= PROBE_MARGIN {
        return acc;
    }
    let pt = acc.arg;
    let val = b_condition_value(p.b, &pt);
    acc.val = val;
    if lb >= -p.tol {
        return acc;
    }
    if val < -p.tol {
        stop.store(true, Ordering::Relaxed);
        acc.failed = Some(cell);
        return acc;
    }
    if stop.load(Ordering::Relaxed) {
        acc.open = Some(cell);
        return acc;
    }
    if splits_left == 0 && !coarse {
        acc.open = Some(cell);
        return acc;
    }
    let left = if coarse { splits_left } else { splits_left - 1 };
    let (a, b) = cell.split();
    let mut out = Acc { refined: 1, ..acc };
    out.cells = 0;
    out.lb = f64::INFINITY;
    for c in [a, b] {
        if c.intersects_domain() {
            out = merge(out, certify_cell(c, p, left, None, stop));
        }
    }
    // the parent point stays a valid evaluation
    if val < out.val {
        out.val = val;
        out.arg = pt;
    }
    out
}

/// Certify non-negativity of the b-condition expression over its domain.
pub fn verify_b_condition(p: &BoundParams) -> Result<BConditionReport, BoundError> {
    p.validate()?;
    let n = p.grid.min(COARSE_GRID);
    let h = 1.0 / n as f64;
    let mut heads = Vec::new();
    for a in 0..n {
        for b in 0..n - a {
            for c in 0..n - a - b {
                for d in 0..n - a - b - c {
                    heads.push([a, b, c, d]);
                }
            }
        }
    }
    let splits = 5 * p.refine;
    let tails: Vec<f64> = (0..n).map(|e| tail_min(p.b, e as f64 * h, (e + 1) as f64 * h)).collect();
    let empty = Acc {
        lb: f64::INFINITY,
        lb_cell: Cell { lo: [0.0; 5], hi: [0.0; 5] },
        val: f64::INFINITY,
        arg: StackVector { lambda0: 0.0, mu0: 0.0, lambda1: 0.0, mu1: 0.0, eta: 0.0 },
        cells: 0,
        refined: 0,
        failed: None,
        open: None,
    };
    let stop = AtomicBool::new(false);
    let acc = heads
        .par_iter()
        .map(|idx| {
            let sum: usize = idx.iter().sum();
            let mut acc = empty;
            for e in 0..(sum + 4).min(n) {
                let mut lo = [0.0; 5];
                let mut hi = [0.0; 5];
                for i in 0..4 {
                    lo[i] = idx[i] as f64 * h;
                    hi[i] = (idx[i] + 1) as f64 * h;
                }
                lo[4] = e as f64 * h;
                hi[4] = (e + 1) as f64 * h;
                let cell = Cell { lo, hi };
                if cell.intersects_domain() {
                    // the unclipped η range gives a smaller tail, still a valid bound
                    acc = merge(acc, certify_cell(cell, p, splits, Some(tails[e]), &stop));
                }
            }
            acc
        })
        .reduce(|| empty, merge);
    let status = if acc.failed.is_some() {
        Certification::Failed
    } else if acc.open.is_some() {
        Certification::Indeterminate
    } else {
        Certification::Certified
    };
    Ok(BConditionReport {
        params: *p,
        status,
        min_lower_bound: acc.lb,
        lower_bound_cell: acc.lb_cell,
        min_value: acc.val,
        argmin: acc.arg,
        cells: acc.cells,
        refined: acc.refined,
        witness: acc.failed.or(acc.open),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FinalOptimum {
    pub value: f64,
    pub alpha: f64,
    pub lambda0: f64,
    pub mu0: f64,
    pub lambda1: f64,
    pub mu1: f64,
}

/// The two terms of the final min for given `α` and averaged loads.
pub fn final_terms(b: f64, alpha: f64, l0: f64, m0: f64, l1: f64, m1: f64) -> (f64, f64) {
    let s = l0 + m0 + l1 + m1;
    if s <= 0.0 {
        return (2.0 - alpha, 1.0 + alpha);
    }
    (2.0 - alpha - 2.0 * alpha / s * m0, 1.0 + alpha - b * 2.0 * alpha / s * g(l0, m0, l1, m1))
}

pub fn final_feasible(alpha: f64, l0: f64, m0: f64, l1: f64, m1: f64) -> bool {
    let s = l0 + m0 + l1 + m1;
    [alpha, l0, m0, l1, m1].iter().all(|v| (0.0..=1.0).contains(v))
        && s >= alpha * (1.0 + m0 + l1 + m1) - 1e-15
        && l0 + m0 + l1 + 2.0 * m1 <= 1.0 + 1e-15
}

/// Best `α` for fixed loads: the first term falls and the second is linear,
/// so the optimum is their crossing clipped to the feasible range.
fn best_alpha(b: f64, l0: f64, m0: f64, l1: f64, m1: f64) -> (f64, f64) {
    let s = l0 + m0 + l1 + m1;
    if l0 + m0 + l1 + 2.0 * m1 > 1.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if s <= 0.0 {
        return (1.0, 0.0);
    }
    let amax = (s / (1.0 + m0 + l1 + m1)).min(1.0);
    let slope1 = 1.0 + 2.0 * m0 / s;
    let slope2 = 1.0 - 2.0 * b * g(l0, m0, l1, m1) / s;
    let cross = if slope1 + slope2 > 0.0 { 1.0 / (slope1 + slope2) } else { amax };
    let alpha = if slope2 <= 0.0 { 0.0 } else { cross.min(amax) };
    let (t1, t2) = final_terms(b, alpha, l0, m0, l1, m1);
    (t1.min(t2), alpha)
}

/// Maximise the final min over `(α, λ⁰, μ⁰, λ¹, μ¹)` by grid search and
/// pattern-search refinement.
pub fn solve_final_optimization(p: &BoundParams) -> Result<FinalOptimum, BoundError> {
    p.validate()?;
    let n = p.grid.max(8);
    let h = 1.0 / n as f64;
    let mut pts = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                for d in 0..=(n - a - b - c) / 2 {
                    pts.push([a as f64 * h, b as f64 * h, c as f64 * h, d as f64 * h]);
                }
            }
        }
    }
    let mut scored: Vec<(f64, [f64; 4])> =
        pts.par_iter().map(|q| (best_alpha(p.b, q[0], q[1], q[2], q[3]).0, *q)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)));
    let starts: Vec<[f64; 4]> = scored.iter().take(16).map(|s| s.1).collect();
    let refined: Vec<(f64, [f64; 4])> = starts
        .par_iter()
        .map(|&q0| {
            let mut q = q0;
            let mut v = best_alpha(p.b, q[0], q[1], q[2], q[3]).0;
            let mut step = h;
            while step > 1e-12 {
                let mut moved = false;
                for i in 0..4 {
                    for j in 0..4 {
                        for sgn in [1.0, -1.0] {
                            let mut c = q;
                            c[i] += sgn * step;
                            if j != i {
                                c[j] -= sgn * step;
                            }
                            if c.iter().any(|&t| t < 0.0) {
                                continue;
                            }
                            let cv = best_alpha(p.b, c[0], c[1], c[2], c[3]).0;
                            if cv > v {
                                v = cv;
                                q = c;
                                moved = true;
                            }
                        }
                    }
                }
                if !moved {
                    step /= 2.0;
                }
            }
            (v, q)
        })
        .collect();
    let (value, q) = refined
        .into_iter()
        .chain(scored.first().copied())
        .fold((f64::NEG_INFINITY, [0.0; 4]), |a, b| if b.0 > a.0 { b } else { a });
    let alpha = best_alpha(p.b, q[0], q[1], q[2], q[3]).1;
    debug_assert!(final_feasible(alpha, q[0], q[1], q[2], q[3]));
    Ok(FinalOptimum { value, alpha, lambda0: q[0], mu0: q[1], lambda1: q[2], mu1: q[3] })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimpleOptimum {
    pub value: f64,
    pub alpha: f64,
    pub y: f64,
}

pub fn simple_objective(alpha: f64, y: f64) -> f64 {
    (2.0 - alpha).min(1.0 + alpha - 2.0 * alpha / (3.0 * y) * f(y))
}

fn simple_best_alpha(y: f64) -> (f64, f64) {
    let slope = 1.0 - 2.0 * f(y) / (3.0 * y);
    let alpha = (1.0 / (1.0 + slope)).min(y);
    (simple_objective(alpha, y), alpha)
}

/// `max { min{2 − α, 1 + α − (2α/3y)·f(y)} : 0 ≤ α ≤ y ≤ 1 }`.
pub fn solve_simple_optimization() -> SimpleOptimum {
    let n = 100_000;
    let (mut best, mut by) = (f64::NEG_INFINITY, 1.0);
    for i in 1..=n {
        let y = i as f64 / n as f64;
        let v = simple_best_alpha(y).0;
        if v > best {
            best = v;
            by = y;
        }
    }
    // golden-section polish around the grid maximum
    let (mut a, mut b) = ((by - 1.0 / n as f64).max(1e-9), (by + 1.0 / n as f64).min(1.0));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if simple_best_alpha(c).0 >= simple_best_alpha(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let y = (a + b) / 2.0;
    let (v, alpha) = simple_best_alpha(y);
    if v >= best {
        SimpleOptimum { value: v, alpha, y }
    } else {
        SimpleOptimum { value: best, alpha: simple_best_alpha(by).1, y: by }
    }
}

/// Smallest second central difference of `g` along any axis on a grid of
/// step `1/n` inside `{λ⁰ + μ⁰ + λ¹ + μ¹ ≤ 1}`.
pub fn min_second_difference(n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut idx = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                for d in 0..=n - a - b - c {
                    idx.push([a, b, c, d]);
                }
            }
        }
    }
    idx.par_iter()
        .map(|q| {
            let x: Vec<f64> = q.iter().map(|&v| v as f64 * h).collect();
            let sum: usize = q.iter().sum();
            let mut worst = f64::INFINITY;
            for axis in 0..4 {
                if q[axis] == 0 || sum + 1 > n {
                    continue;
                }
                let at = |delta: f64| {
                    let mut y = x.clone();
                    y[axis] += delta;
                    g(y[0], y[1], y[2], y[3])
                };
                worst = worst.min(at(h) - 2.0 * at(0.0) + at(-h));
            }
            worst
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Smallest `g − f(λ⁰ + μ⁰ + λ¹ + μ¹)` on a grid of step `1/n`.
pub fn min_g_minus_f(n: usize) -> f64 {
    let h = 1.0 / n as f64;
    (0..=n)
        .into_par_iter()
        .map(|a| {
            let mut worst = f64::INFINITY;
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    for d in 0..=n - a - b - c {
                        let (l0, m0, l1, m1) = (a as f64 * h, b as f64 * h, c as f64 * h, d as f64 * h);
                        worst = worst.min(g(l0, m0, l1, m1) - f(l0 + m0 + l1 + m1));
                    }
                }
            }
            worst
        })
        .reduce(|| f64::INFINITY, f64::min)
}
