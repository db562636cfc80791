//! Split at a 2-cut, solve both sides, and merge with the extra-link bound.

use cacaug::cactus::{rat, CactusInstance, Solution};
use cacaug::decompose::{merge_solutions, solve_decomposed, split_at_cut, Params};
use cacaug::exact::solve_exact;

fn main() {
    let inst = CactusInstance::parse("vertices 4\nroot 0\ncycle 0 1 2 3\nlink 0 1\nlink 2 3\nlink 1 3\n").expect("valid");
    let c = inst.cuts().iter().position(|c| c.vertices() == [1, 2]).expect("cut {1, 2}");
    let split = split_at_cut(&inst, c);
    let solve = |side: &cacaug::cactus::Contraction| {
        let ex = solve_exact(&side.instance, 10_000).expect("feasible side");
        let back: Vec<usize> =
            (0..inst.links().len()).filter(|&l| side.link_map[l].is_some_and(|m| ex.solution.links.contains(&m))).collect();
        back
    };
    let f_in = solve(&split.inner);
    let f_out = solve(&split.outer);
    let report = merge_solutions(&inst, c, &f_in, &f_out).expect("merge");
    println!("inner {f_in:?} outer {f_out:?} extra {:?}", report.extra);
    println!("{} extra links, bound {}", report.extra.len(), report.crossing_in_inner.saturating_sub(1));

    let params = Params::new(rat(1)).expect("eps");
    let sub = |piece: &CactusInstance| {
        solve_exact(piece, 100_000).map(|r| r.solution).map_err(|e| e.to_string())
    };
    let dec = solve_decomposed(&inst, &params, &sub).expect("decomposed");
    let opt: Solution = solve_exact(&inst, 10_000).expect("exact").solution;
    println!("decomposed cost {} vs optimum {} ({} splits)", dec.solution.cost, opt.cost, dec.splits);
}
