//! Exact rational simplex, the cut relaxations of an instance, the minimal
//! laminar dual and cross-link completion.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cactus::{rat, CactusInstance, InstanceError, LinkClass, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("instance is infeasible: cut {0} has no covering link")]
    InstanceInfeasible(usize),
    #[error("extreme point of the directed cut LP is fractional")]
    NonIntegral,
    #[error("dual support is not laminar: cuts {0} and {1} cross")]
    NotLaminar(usize, usize),
    #[error("dual is not minimal: weight can move from cut {outer} to cut {inner}")]
    NotMinimal { outer: usize, inner: usize },
    #[error("completion bound violated: cost {cost} exceeds dual budget {budget}")]
    CompletionBound { cost: String, budget: String },
    #[error("link {0} is not a cross-link for the chosen center")]
    NotCrossLink(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `min c·x` subject to the rows and `lower ≤ x ≤ upper`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            lower: vec![Rational::zero(); num_vars],
            upper: vec![None; num_vars],
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Rational)>, sense: Sense, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn value_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        for j in 0..self.num_vars {
            if x[j] < self.lower[j] || self.upper[j].as_ref().is_some_and(|u| x[j] > *u) {
                return false;
            }
        }
        self.constraints.iter().all(|c| {
            let lhs = c.coeffs.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]);
            match c.sense {
                Sense::Le => lhs <= c.rhs,
                Sense::Ge => lhs >= c.rhs,
                Sense::Eq => lhs == c.rhs,
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Rational], obj_rhs: &mut Rational) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let nz: Vec<usize> = (0..self.cols).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let prow: Vec<Rational> = nz.iter().map(|&j| self.rows[r][j].clone()).collect();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (k, &j) in nz.iter().enumerate() {
                let d = &f * &prow[k];
                self.rows[i][j] -= d;
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (k, &j) in nz.iter().enumerate() {
                let d = &f * &prow[k];
                obj[j] -= d;
            }
            *obj_rhs -= &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Bland's rule on reduced costs `obj`; columns with `allowed[j] == false` never enter.
    fn optimize(&mut self, obj: &mut [Rational], obj_rhs: &mut Rational, allowed: &[bool]) -> Result<(), LpError> {
        loop {
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && obj[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, c, obj, obj_rhs);
        }
    }
}

/// Two-phase primal simplex over exact rationals with Bland's rule.
/// The returned point is a basic solution of the standard-form program.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars;
    // shift lower bounds to zero, turn finite upper bounds into rows
    let mut rows: Vec<(Vec<(usize, Rational)>, Sense, Rational)> = Vec::new();
    for c in &lp.constraints {
        let shift = c.coeffs.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &lp.lower[*j]);
        rows.push((c.coeffs.clone(), c.sense, &c.rhs - shift));
    }
    for j in 0..n {
        if let Some(u) = &lp.upper[j] {
            rows.push((vec![(j, rat(1))], Sense::Le, u - &lp.lower[j]));
        }
    }
    let m = rows.len();
    let mut slack_cols = 0;
    let mut art_cols = 0;
    for (_, s, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            *s = match *s {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        match *s {
            Sense::Le => slack_cols += 1,
            Sense::Ge => {
                slack_cols += 1;
                art_cols += 1
            }
            Sense::Eq => art_cols += 1,
        }
    }
    let cols = n + slack_cols + art_cols;
    let mut t = Tableau { rows: Vec::with_capacity(m), rhs: Vec::with_capacity(m), basis: vec![0; m], cols };
    let mut is_art = vec![false; cols];
    let (mut next_slack, mut next_art) = (n, n + slack_cols);
    for (i, (coeffs, s, rhs)) in rows.into_iter().enumerate() {
        let neg = rhs.is_negative();
        let mut row = vec![Rational::zero(); cols];
        for (j, a) in coeffs {
            row[j] += if neg { -a } else { a };
        }
        let rhs = if neg { -rhs } else { rhs };
        match s {
            Sense::Le => {
                row[next_slack] = rat(1);
                t.basis[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = rat(-1);
                next_slack += 1;
                row[next_art] = rat(1);
                is_art[next_art] = true;
                t.basis[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = rat(1);
                is_art[next_art] = true;
                t.basis[i] = next_art;
                next_art += 1;
            }
        }
        t.rows.push(row);
        t.rhs.push(rhs);
    }

    // phase 1
    if art_cols > 0 {
        let mut obj = vec![Rational::zero(); cols];
        let mut obj_rhs = Rational::zero();
        for j in 0..cols {
            if is_art[j] {
                obj[j] = rat(1);
            }
        }
        for i in 0..m {
            if is_art[t.basis[i]] {
                for j in 0..cols {
                    if !t.rows[i][j].is_zero() {
                        obj[j] -= &t.rows[i][j];
                    }
                }
                obj_rhs -= &t.rhs[i];
            }
        }
        let allowed = vec![true; cols];
        t.optimize(&mut obj, &mut obj_rhs, &allowed)?;
        if !obj_rhs.is_zero() {
            return Err(LpError::Infeasible);
        }
        // drive artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.rows.len() {
            if is_art[t.basis[i]] {
                if let Some(c) = (0..cols).find(|&j| !is_art[j] && !t.rows[i][j].is_zero()) {
                    let mut dummy = vec![Rational::zero(); cols];
                    let mut dr = Rational::zero();
                    t.pivot(i, c, &mut dummy, &mut dr);
                } else {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    // phase 2
    let mut obj = vec![Rational::zero(); cols];
    obj[..n].clone_from_slice(&lp.objective);
    let mut obj_rhs = Rational::zero();
    for i in 0..t.rows.len() {
        let b = t.basis[i];
        if !obj[b].is_zero() {
            let f = obj[b].clone();
            for j in 0..cols {
                if !t.rows[i][j].is_zero() {
                    let d = &f * &t.rows[i][j];
                    obj[j] -= d;
                }
            }
            obj_rhs -= &f * &t.rhs[i];
        }
    }
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    t.optimize(&mut obj, &mut obj_rhs, &allowed)?;
    let mut x: Vec<Rational> = lp.lower.clone();
    for i in 0..t.rows.len() {
        if t.basis[i] < n {
            x[t.basis[i]] += &t.rhs[i];
        }
    }
    let value = lp.value_at(&x);
    Ok(LpSolution { x, value })
}

#[derive(Debug, Clone)]
pub struct CutLpSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
}

/// The undirected relaxation `min c·x, x(δ_L(C)) ≥ 1, x ≥ 0`.
pub fn cut_lp(inst: &CactusInstance) -> Result<CutLpSolution, LpError> {
    cut_lp_restricted(inst, &vec![None; inst.links().len()])
}

/// Cut LP with some variables fixed to 0 or 1.
pub fn cut_lp_restricted(inst: &CactusInstance, fixed: &[Option<bool>]) -> Result<CutLpSolution, LpError> {
    let nl = inst.links().len();
    let mut lp = LinearProgram::new(nl);
    for (l, link) in inst.links().iter().enumerate() {
        lp.objective[l] = link.cost.clone();
        match fixed[l] {
            Some(true) => {
                lp.lower[l] = rat(1);
                lp.upper[l] = Some(rat(1));
            }
            Some(false) => lp.upper[l] = Some(Rational::zero()),
            None => {}
        }
    }
    for c in 0..inst.num_cuts() {
        let row: Vec<(usize, Rational)> = (0..nl)
            .filter(|&l| inst.coverage().covers(l, c) && fixed[l] != Some(false))
            .map(|l| (l, rat(1)))
            .collect();
        if row.is_empty() {
            return Err(LpError::InstanceInfeasible(c));
        }
        lp.add(row, Sense::Ge, rat(1));
    }
    let sol = simplex_solve(&lp)?;
    Ok(CutLpSolution { x: sol.x, value: sol.value })
}

/// Whether directed link `(a, b)` enters cut `c`.
fn enters(inst: &CactusInstance, a: usize, b: usize, c: usize) -> bool {
    let cut = &inst.cuts()[c];
    cut.contains(b) && !cut.contains(a)
}

/// Endpoints of directed variable `2ℓ` (u→v) or `2ℓ+1` (v→u).
pub fn directed_endpoints(inst: &CactusInstance, d: usize) -> (usize, usize) {
    let l = inst.link(d / 2);
    if d % 2 == 0 {
        (l.u, l.v)
    } else {
        (l.v, l.u)
    }
}

#[derive(Debug, Clone)]
pub struct DirectedLpSolution {
    /// Variable `2ℓ` is `u→v`, `2ℓ+1` is `v→u`.
    pub x: Vec<Rational>,
    pub value: Rational,
    /// Links with some orientation at value 1.
    pub links: Vec<usize>,
}

/// The bidirected relaxation with one covering row per cut.
pub fn directed_cut_lp(inst: &CactusInstance) -> Result<DirectedLpSolution, LpError> {
    if let Some(c) = inst.infeasible_cut() {
        return Err(LpError::InstanceInfeasible(c));
    }
    let nd = 2 * inst.links().len();
    let mut lp = LinearProgram::new(nd);
    for d in 0..nd {
        lp.objective[d] = inst.link(d / 2).cost.clone();
    }
    for c in 0..inst.num_cuts() {
        let row = (0..nd)
            .filter(|&d| {
                let (a, b) = directed_endpoints(inst, d);
                enters(inst, a, b, c)
            })
            .map(|d| (d, rat(1)))
            .collect();
        lp.add(row, Sense::Ge, rat(1));
    }
    let sol = simplex_solve(&lp)?;
    if sol.x.iter().any(|v| !v.is_integer()) {
        return Err(LpError::NonIntegral);
    }
    let mut links: Vec<usize> = (0..inst.links().len())
        .filter(|&l| !sol.x[2 * l].is_zero() || !sol.x[2 * l + 1].is_zero())
        .collect();
    links.dedup();
    assert!(inst.is_feasible(&links), "rounded directed solution must be feasible");
    assert!(inst.cost_of(&links) <= sol.value, "dropping orientations cannot raise cost");
    Ok(DirectedLpSolution { x: sol.x, value: sol.value, links })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// Cut id to positive weight.
    pub y: BTreeMap<usize, Rational>,
    pub value: Rational,
    pub laminar: bool,
    pub minimal: bool,
}

impl DualSolution {
    pub fn support(&self) -> Vec<usize> {
        self.y.keys().copied().collect()
    }

    pub fn weight(&self, c: usize) -> Rational {
        self.y.get(&c).cloned().unwrap_or_else(Rational::zero)
    }

    /// Σ y over cuts not covered by `links`.
    pub fn budget_outside(&self, inst: &CactusInstance, links: &[usize]) -> Rational {
        let cov = inst.coverage().union_of(links, inst.num_cuts());
        self.y.iter().filter(|(c, _)| !cov.contains(**c)).fold(Rational::zero(), |acc, (_, v)| acc + v)
    }
}

fn dual_rows(inst: &CactusInstance) -> Vec<Vec<usize>> {
    (0..2 * inst.links().len())
        .map(|d| {
            let (a, b) = directed_endpoints(inst, d);
            (0..inst.num_cuts()).filter(|&c| enters(inst, a, b, c)).collect()
        })
        .collect()
}

pub fn cuts_cross(inst: &CactusInstance, a: usize, b: usize) -> bool {
    let (x, y) = (&inst.cuts()[a].members, &inst.cuts()[b].members);
    !x.is_disjoint(y) && !x.is_subset(y) && !y.is_subset(x)
}

/// A tight directed link entering `inner` but not `outer`, if one exists.
pub fn minimality_witness(inst: &CactusInstance, y: &DualSolution, inner: usize, outer: usize) -> Option<usize> {
    (0..2 * inst.links().len()).find(|&d| {
        let (a, b) = directed_endpoints(inst, d);
        if !enters(inst, a, b, inner) || enters(inst, a, b, outer) {
            return false;
        }
        let load = (0..inst.num_cuts())
            .filter(|&c| enters(inst, a, b, c))
            .fold(Rational::zero(), |acc, c| acc + y.weight(c));
        load == inst.link(d / 2).cost
    })
}

/// Check laminarity and minimality of a dual solution exactly.
pub fn check_dual_flags(inst: &CactusInstance, y: &DualSolution) -> Result<(), LpError> {
    let supp = y.support();
    for (i, &a) in supp.iter().enumerate() {
        for &b in &supp[i + 1..] {
            if cuts_cross(inst, a, b) {
                return Err(LpError::NotLaminar(a, b));
            }
        }
    }
    for &outer in &supp {
        let om = &inst.cuts()[outer].members;
        for inner in 0..inst.num_cuts() {
            let im = &inst.cuts()[inner].members;
            if inner == outer || !im.is_subset(om) || im == om {
                continue;
            }
            if minimality_witness(inst, y, inner, outer).is_none() {
                return Err(LpError::NotMinimal { outer, inner });
            }
        }
    }
    Ok(())
}

/// Optimal dual of the bidirected LP that is laminar and minimal.
///
/// Stage one maximises Σ y. Stage two keeps that value and minimises
/// Σ w(|C|)·y_C with the strictly concave increasing weight
/// `w(s) = s·(2n − s)`. Both flags are then verified exactly.
pub fn minimal_laminar_dual(inst: &CactusInstance) -> Result<DualSolution, LpError> {
    if let Some(c) = inst.infeasible_cut() {
        return Err(LpError::InstanceInfeasible(c));
    }
    let nc = inst.num_cuts();
    let rows = dual_rows(inst);
    let mut lp = LinearProgram::new(nc);
    for (d, cuts) in rows.iter().enumerate() {
        if !cuts.is_empty() {
            lp.add(cuts.iter().map(|&c| (c, rat(1))).collect(), Sense::Le, inst.link(d / 2).cost.clone());
        }
    }
    lp.objective = vec![rat(-1); nc];
    let stage1 = simplex_solve(&lp)?;
    let opt = -stage1.value;
    lp.add((0..nc).map(|c| (c, rat(1))).collect(), Sense::Eq, opt.clone());
    let n2 = 2 * inst.n() as i64;
    lp.objective = inst
        .cuts()
        .iter()
        .map(|c| {
            let s = c.len() as i64;
            rat(s * (n2 - s))
        })
        .collect();
    let stage2 = simplex_solve(&lp)?;
    let y: BTreeMap<usize, Rational> =
        stage2.x.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
    let mut dual = DualSolution { y, value: opt, laminar: false, minimal: false };
    check_dual_flags(inst, &dual)?;
    dual.laminar = true;
    dual.minimal = true;
    Ok(dual)
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub links: Vec<usize>,
    pub cost: Rational,
    pub budget: Rational,
}

/// Complete a set of cross-links to a feasible solution using the integral
/// optimum of the bidirected LP on the residual instance.
pub fn complete_cross_links(
    inst: &CactusInstance,
    center: usize,
    r: &[usize],
    dual: &DualSolution,
) -> Result<Completion, LpError> {
    let ps = inst.principal_structure(center);
    if let Some(&l) = r.iter().find(|&&l| ps.class[l] != LinkClass::Cross) {
        return Err(LpError::NotCrossLink(l));
    }
    let res = inst.residual_instance(r)?;
    let f = directed_cut_lp(&res.instance)?;
    let links: Vec<usize> = f.links.iter().map(|&l| res.link_origin[l]).collect();
    let cost = inst.cost_of(&links);
    let budget = dual.budget_outside(inst, r);
    let mut all = links.clone();
    all.extend_from_slice(r);
    assert!(inst.is_feasible(&all), "completion must be feasible");
    if cost > budget {
        return Err(LpError::CompletionBound { cost: cost.to_string(), budget: budget.to_string() });
    }
    Ok(Completion { links, cost, budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_rows_with_negative_rhs() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat(1), rat(1)];
        lp.add(vec![(0, rat(-1)), (1, rat(-1))], Sense::Eq, rat(-3));
        lp.add(vec![(0, rat(1))], Sense::Le, rat(1));
        let s = simplex_solve(&lp).unwrap();
        assert_eq!(s.value, rat(3));
        assert!(lp.is_feasible_point(&s.x));
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![rat(-1)];
        assert_eq!(simplex_solve(&lp).unwrap_err(), LpError::Unbounded);
    }
}
