mod common;

use cacaug::cactus::{rat, ratio, CactusInstance, Contraction, Solution};
use cacaug::decompose::{
    find_splittable_cut, merge_solutions, solve_decomposed, split_at_cut, unsplittable_center, DecomposeError, Params,
};
use cacaug::exact::solve_exact;
use cacaug::kwide::{solve_approx, ApproxConfig};
use cacaug::lp::cut_lp;
use proptest::prelude::*;

use common::random_instance;

fn exact_sub(inst: &CactusInstance) -> Result<Solution, String> {
    solve_exact(inst, 5_000_000).map(|r| r.solution).map_err(|e| e.to_string())
}

fn side_solution(inst: &CactusInstance, side: &Contraction) -> Vec<usize> {
    let ex = solve_exact(&side.instance, 5_000_000).unwrap();
    (0..inst.links().len()).filter(|&l| side.link_map[l].is_some_and(|m| ex.solution.links.contains(&m))).collect()
}

#[test]
fn params_reject_non_positive_eps() {
    assert!(matches!(Params::new(rat(0)), Err(DecomposeError::BadEps)));
    let p = Params::new(rat(1)).unwrap();
    assert_eq!(p.k(), rat(704));
    assert_eq!(p.light_threshold(), rat(16));
    assert_eq!(p.s_limit(), 2);
}

#[test]
fn covered_split_needs_no_extra_links() {
    let inst = CactusInstance::parse("vertices 4\nroot 0\ncycle 0 1 2 3\nlink 0 2\nlink 1 3\n").unwrap();
    let c = inst.cuts().iter().position(|c| c.vertices() == [1, 2]).unwrap();
    let rep = merge_solutions(&inst, c, &[0, 1], &[0, 1]).unwrap();
    assert!(rep.extra.is_empty() && rep.uncovered.is_empty());
}

#[test]
fn tight_merge_adds_one_link() {
    let inst = CactusInstance::parse("vertices 4\nroot 0\ncycle 0 1 2 3\nlink 0 1\nlink 2 3\nlink 1 3\n").unwrap();
    let c = inst.cuts().iter().position(|c| c.vertices() == [1, 2]).unwrap();
    let split = split_at_cut(&inst, c);
    let (f_in, f_out) = (side_solution(&inst, &split.inner), side_solution(&inst, &split.outer));
    let rep = merge_solutions(&inst, c, &f_in, &f_out).unwrap();
    assert!(!rep.uncovered.is_empty());
    assert_eq!(rep.extra.len() + 1, rep.crossing_in_inner);
}

#[test]
fn wide_instances_go_straight_to_the_subsolver() {
    let inst = random_instance(12, 10, 12, false);
    let p = Params::new(rat(1)).unwrap();
    assert!(unsplittable_center(&inst, &p).is_some());
    let d = solve_decomposed(&inst, &p, &exact_sub).unwrap();
    assert_eq!(d.splits, 0);
    assert!(d.subsolver_calls <= 1);
    assert!(d.tree.children.is_empty());
}

#[test]
fn many_terminals_force_a_split() {
    let mut text = String::from("vertices 21\nroot 0\n");
    for v in 1..=20 {
        text.push_str(&format!("cycle {} {v}\n", if v <= 10 { 0 } else { 1 }));
    }
    for v in 2..=20 {
        text.push_str(&format!("link {} {v}\n", v - 1));
    }
    text.push_str("link 0 1\nlink 0 20\n");
    let inst = CactusInstance::parse(&text).unwrap();
    let p = Params::new(rat(16)).unwrap();
    let x = cut_lp(&inst).unwrap().x;
    assert!(find_splittable_cut(&inst, &x, &p).is_some());
    let d = solve_decomposed(&inst, &p, &exact_sub).unwrap();
    assert!(d.splits >= 1);
    assert!(inst.is_feasible(&d.solution.links));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn split_accounting(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 12, false);
        let c = (seed % inst.num_cuts() as u64) as usize;
        let split = split_at_cut(&inst, c);
        let crossing = inst.covering_links(c).len();
        let kept = |s: &Contraction| s.link_map.iter().filter(|m| m.is_some()).count();
        prop_assert_eq!(kept(&split.inner) + kept(&split.outer), inst.links().len() + crossing);
        prop_assert_eq!(split.inner.instance.links().len(), kept(&split.inner));
        prop_assert!(split.inner.instance.infeasible_cut().is_none());
        prop_assert!(split.outer.instance.infeasible_cut().is_none());
        prop_assert_eq!(split.inner.instance.num_cuts() + split.outer.instance.num_cuts(), inst.num_cuts() + 1
            - inst.cuts().iter().filter(|d| lp_crosses(&inst, c, d.id)).count());
    }

    #[test]
    fn merge_of_exact_sides(seed in any::<u64>()) {
        let inst = random_instance(seed, 4, 10, false);
        let c = (seed % inst.num_cuts() as u64) as usize;
        let split = split_at_cut(&inst, c);
        let (f_in, f_out) = (side_solution(&inst, &split.inner), side_solution(&inst, &split.outer));
        let rep = merge_solutions(&inst, c, &f_in, &f_out).unwrap();
        let mut all: Vec<usize> = f_in.iter().chain(&f_out).chain(&rep.extra).copied().collect();
        all.sort_unstable();
        prop_assert!(inst.is_feasible(&all));
        if !rep.uncovered.is_empty() {
            prop_assert!(rep.extra.len() < rep.crossing_in_inner);
            // uncovered cuts, read from the side holding the boundary edge, nest
            let (a, b) = inst.cuts()[c].boundary[0];
            let mut sides: Vec<Vec<usize>> = rep.uncovered.iter().map(|&w| {
                let m = &inst.cuts()[w].members;
                let keep = m.contains(a) && m.contains(b);
                (0..inst.n()).filter(|&v| m.contains(v) == keep).collect()
            }).collect();
            sides.sort_by_key(|s| s.len());
            for w in sides.windows(2) {
                prop_assert!(w[0].iter().all(|v| w[1].contains(v)));
            }
        }
    }

    #[test]
    fn decomposed_cost_near_optimum(seed in any::<u64>()) {
        let inst = random_instance(seed, 4, 12, false);
        let sub = |g: &CactusInstance| {
            solve_approx(g, &ApproxConfig::default()).map(|r| Solution::new(g, r.links)).map_err(|e| e.to_string())
        };
        let d = solve_decomposed(&inst, &Params::new(ratio(1, 2)).unwrap(), &sub).unwrap();
        let opt = solve_exact(&inst, 5_000_000).unwrap();
        prop_assert!(inst.is_feasible(&d.solution.links));
        prop_assert!(d.solution.cost.clone() * rat(5) <= opt.solution.cost * rat(8));
    }
}

fn lp_crosses(inst: &CactusInstance, a: usize, b: usize) -> bool {
    cacaug::lp::cuts_cross(inst, a, b)
}
