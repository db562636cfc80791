//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cactus::{rat, CactusInstance, Link};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("inconsistent generator spec: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub cycles: usize,
    /// Exact number of degree-2 vertices, if prescribed.
    pub terminals: Option<usize>,
    /// Probability of each candidate link.
    pub density: f64,
    pub cost_lo: u32,
    pub cost_hi: u32,
    /// Draw random links only between terminals.
    pub leaf_links: bool,
    pub seed: u64,
}

impl GenSpec {
    pub fn unit(n: usize, cycles: usize, density: f64, seed: u64) -> Self {
        GenSpec { n, cycles, terminals: None, density, cost_lo: 1, cost_hi: 1, leaf_links: false, seed }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::Inconsistent(m));
        if self.n < 2 {
            return bad("need at least two vertices".into());
        }
        if self.cycles == 0 || self.cycles > self.n - 1 {
            return bad(format!("{} cycles cannot span {} vertices", self.cycles, self.n));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad("density must lie in [0, 1]".into());
        }
        if self.cost_lo == 0 || self.cost_hi < self.cost_lo {
            return bad("cost range must be positive and non-empty".into());
        }
        if let Some(t) = self.terminals {
            let (lo, hi) = if self.cycles == 1 { (self.n, self.n) } else { (self.n + 1 - self.cycles, self.n - 1) };
            if t < lo || t > hi {
                return bad(format!("terminal count {t} outside [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

/// Random cycle tree: each new cycle hangs off an existing vertex. Hanging it
/// off a terminal makes that vertex a non-terminal, so the terminal count is
/// `n` minus the number of such attachments.
fn cycle_tree(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut extra = vec![1usize; spec.cycles];
    for _ in 0..spec.n - 1 - spec.cycles {
        let i = rng.gen_range(0..spec.cycles);
        extra[i] += 1;
    }
    let at_terminal: Vec<bool> = match spec.terminals {
        None => Vec::new(),
        Some(t) => {
            let a = spec.n - t;
            let mut steps: Vec<usize> = (2..spec.cycles).collect();
            steps.shuffle(rng);
            let mut mark = vec![false; spec.cycles];
            if spec.cycles > 1 {
                mark[1] = true;
                for &s in steps.iter().take(a.saturating_sub(1)) {
                    mark[s] = true;
                }
            }
            mark
        }
    };
    let mut degree = vec![0usize; spec.n];
    let mut cycles = Vec::with_capacity(spec.cycles);
    let mut next = 0usize;
    for (i, &e) in extra.iter().enumerate() {
        let mut cyc = Vec::with_capacity(e + 1);
        if i == 0 {
            cyc.push(next);
            next += 1;
        } else {
            let pool: Vec<usize> = match at_terminal.get(i) {
                None => (0..next).collect(),
                Some(&true) => (0..next).filter(|&v| degree[v] == 2).collect(),
                Some(&false) => (0..next).filter(|&v| degree[v] != 2).collect(),
            };
            cyc.push(*pool.choose(rng).expect("attachment vertex exists"));
        }
        for _ in 0..e {
            cyc.push(next);
            next += 1;
        }
        for &v in &cyc {
            degree[v] += 2;
        }
        cycles.push(cyc);
    }
    cycles
}

/// Random feasible instance rooted at vertex 0; deterministic per seed.
pub fn generate_instance(spec: &GenSpec) -> Result<CactusInstance, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cycles = cycle_tree(spec, &mut rng);
    let bare = CactusInstance::new(spec.n, 0, cycles.clone(), Vec::new()).expect("cycle tree is a cactus");
    let terminals = bare.terminals();
    let mut links: Vec<Link> = Vec::new();
    let cost = |rng: &mut ChaCha8Rng| rat(rng.gen_range(spec.cost_lo..=spec.cost_hi) as i64);
    for u in 0..spec.n {
        for v in u + 1..spec.n {
            if spec.leaf_links && !(terminals.contains(&u) && terminals.contains(&v)) {
                continue;
            }
            if rng.gen_bool(spec.density) {
                let c = cost(&mut rng);
                links.push(Link::new(links.len(), u, v, c));
            }
        }
    }
    let random_count = links.len();
    loop {
        let inst = bare.with_links(links.clone()).expect("valid links");
        let Some(c) = inst.first_uncovered(&(0..links.len()).collect::<Vec<_>>()) else {
            break;
        };
        let cut = &inst.cuts()[c];
        let inside: Vec<usize> = cut.vertices();
        let outside: Vec<usize> = (0..spec.n).filter(|&v| !cut.contains(v)).collect();
        let prefer = |vs: &[usize]| {
            let t: Vec<usize> = vs.iter().copied().filter(|v| terminals.contains(v)).collect();
            if spec.leaf_links && !t.is_empty() {
                t
            } else {
                vs.to_vec()
            }
        };
        let a = *prefer(&inside).choose(&mut rng).expect("cut is non-empty");
        let b = *prefer(&outside).choose(&mut rng).expect("root lies outside");
        let c = cost(&mut rng);
        links.push(Link::new(links.len(), a.min(b), a.max(b), c));
    }
    // drop enforced links that later ones made redundant
    let mut keep: Vec<bool> = vec![true; links.len()];
    for l in (random_count..links.len()).rev() {
        keep[l] = false;
        let ids: Vec<usize> = (0..links.len()).filter(|&m| keep[m]).collect();
        let trial = bare.with_links(links.clone()).expect("valid links");
        if !trial.is_feasible(&ids) {
            keep[l] = true;
        }
    }
    let kept: Vec<Link> = links
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .enumerate()
        .map(|(i, (mut l, _))| {
            l.id = i;
            l
        })
        .collect();
    let inst = bare.with_links(kept).expect("valid links");
    debug_assert!(inst.infeasible_cut().is_none());
    Ok(inst)
}
