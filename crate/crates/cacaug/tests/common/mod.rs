#![allow(dead_code)]

use cacaug::cactus::CactusInstance;
use cacaug::gen::{generate_instance, GenSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed-driven random feasible instance with `n` in `lo..=hi`.
pub fn random_instance(seed: u64, lo: usize, hi: usize, unit: bool) -> CactusInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.gen_range(lo..=hi);
    let spec = GenSpec {
        n,
        cycles: rng.gen_range(1..n),
        terminals: None,
        density: rng.gen_range(0.05..0.35),
        cost_lo: 1,
        cost_hi: if unit { 1 } else { 5 },
        leaf_links: rng.gen_bool(0.25),
        seed,
    };
    generate_instance(&spec).expect("consistent spec")
}

/// Multigraph edges of the cactus, one entry per cycle edge.
pub fn cactus_edges(inst: &CactusInstance) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for c in inst.cycles() {
        for i in 0..c.len() {
            out.push((c[i], c[(i + 1) % c.len()]));
        }
    }
    out
}

/// Vertices reachable from `from` after deleting the listed edges once each.
pub fn reachable_without(inst: &CactusInstance, from: usize, removed: &[(usize, usize)]) -> Vec<bool> {
    let mut edges = cactus_edges(inst);
    for &(a, b) in removed {
        let pos = edges.iter().position(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)).expect("edge exists");
        edges.swap_remove(pos);
    }
    let mut seen = vec![false; inst.n()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in &edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen
}

/// Whether deleting `x` separates `v` from `w`.
pub fn separates(inst: &CactusInstance, x: usize, v: usize, w: usize) -> bool {
    if x == v || x == w {
        return true;
    }
    let edges: Vec<(usize, usize)> = cactus_edges(inst).into_iter().filter(|&(a, b)| a != x && b != x).collect();
    let mut seen = vec![false; inst.n()];
    let mut stack = vec![v];
    seen[v] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in &edges {
            for (p, q) in [(a, b), (b, a)] {
                if p == u && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    !seen[w]
}
