mod common;

use cacaug::cactus::{rat, CactusInstance, LinkClass, Rational};
use cacaug::exact::solve_exact;
use cacaug::lp::{
    check_dual_flags, complete_cross_links, cut_lp, directed_cut_lp, directed_endpoints, minimal_laminar_dual, simplex_solve,
    LinearProgram, LpError, Sense,
};
use num_traits::Zero;
use proptest::prelude::*;

use common::random_instance;

const SQUARE: &str = "vertices 4\nroot 0\ncycle 0 1 2 3\nlink 0 2\nlink 1 3\n";

#[test]
fn simplex_on_a_bound() {
    let mut lp = LinearProgram::new(1);
    lp.objective = vec![rat(1)];
    lp.add(vec![(0, rat(1))], Sense::Ge, rat(1));
    let s = simplex_solve(&lp).unwrap();
    assert_eq!(s.x, vec![rat(1)]);
    assert_eq!(s.value, rat(1));
}

#[test]
fn contradictory_rows_are_infeasible() {
    let mut lp = LinearProgram::new(1);
    lp.objective = vec![rat(1)];
    lp.add(vec![(0, rat(1))], Sense::Ge, rat(2));
    lp.add(vec![(0, rat(1))], Sense::Le, rat(1));
    assert_eq!(simplex_solve(&lp).unwrap_err(), LpError::Infeasible);
}

#[test]
fn square_values() {
    let inst = CactusInstance::parse(SQUARE).unwrap();
    assert_eq!(cut_lp(&inst).unwrap().value, rat(2));
    // arcs 0→2, 1→3 and 3→1 are all forced
    let d = directed_cut_lp(&inst).unwrap();
    assert_eq!(d.value, rat(3));
    assert_eq!(d.links, vec![0, 1]);
    assert_eq!(minimal_laminar_dual(&inst).unwrap().value, rat(3));
}

#[test]
fn parallel_pair_dual() {
    let inst = CactusInstance::parse("vertices 2\ncycle 0 1\nlink 0 1 3\n").unwrap();
    let y = minimal_laminar_dual(&inst).unwrap();
    assert_eq!(y.weight(0), rat(3));
    assert_eq!(y.value, rat(3));
    assert!(y.laminar && y.minimal);
}

#[test]
fn uncovered_instance_fails() {
    let inst = CactusInstance::parse("vertices 3\nroot 0\ncycle 0 1\ncycle 1 2\nlink 0 1\n").unwrap();
    assert!(matches!(cut_lp(&inst), Err(LpError::InstanceInfeasible(_))));
}

#[test]
fn repeated_solves_agree() {
    let inst = random_instance(31, 10, 12, false);
    let a = cut_lp(&inst).unwrap();
    let b = cut_lp(&inst).unwrap();
    assert_eq!(a.x, b.x);
    let ya = minimal_laminar_dual(&inst).unwrap();
    let yb = minimal_laminar_dual(&inst).unwrap();
    assert_eq!(ya.y, yb.y);
}

#[test]
fn completion_edges() {
    let inst = random_instance(8, 8, 10, false);
    let dual = minimal_laminar_dual(&inst).unwrap();
    let c = complete_cross_links(&inst, inst.root(), &[], &dual).unwrap();
    assert!(inst.is_feasible(&c.links));
    assert_eq!(c.budget, dual.value);
    assert!(c.cost <= c.budget);

    let star = CactusInstance::parse("vertices 3\nroot 0\ncycle 0 1\ncycle 0 2\nlink 1 2\n").unwrap();
    let dual = minimal_laminar_dual(&star).unwrap();
    let c = complete_cross_links(&star, 0, &[0], &dual).unwrap();
    assert!(c.links.is_empty());
    assert_eq!(c.cost, Rational::zero());
    assert!(matches!(complete_cross_links(&star, 1, &[0], &dual), Err(LpError::NotCrossLink(0))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn strong_duality(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 10, false);
        let p = cut_lp(&inst).unwrap();
        for c in 0..inst.num_cuts() {
            let load = inst.covering_links(c).iter().fold(Rational::zero(), |a, &l| a + &p.x[l]);
            prop_assert!(load >= rat(1));
        }
        let d = directed_cut_lp(&inst).unwrap();
        let y = minimal_laminar_dual(&inst).unwrap();
        prop_assert_eq!(&d.value, &y.value);
        prop_assert!(check_dual_flags(&inst, &y).is_ok());
        for arc in 0..2 * inst.links().len() {
            let (a, b) = directed_endpoints(&inst, arc);
            let used = y
                .y
                .iter()
                .filter(|(c, _)| inst.cuts()[**c].contains(b) && !inst.cuts()[**c].contains(a))
                .fold(Rational::zero(), |acc, (_, v)| acc + v);
            prop_assert!(used <= inst.link(arc / 2).cost);
        }
    }

    #[test]
    fn directed_within_twice_optimum(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 9, false);
        prop_assume!(inst.links().len() <= 20);
        let d = directed_cut_lp(&inst).unwrap();
        let opt = solve_exact(&inst, 1_000_000).unwrap();
        prop_assert!(inst.is_feasible(&d.links));
        prop_assert!(inst.cost_of(&d.links) <= rat(2) * &opt.solution.cost);
        prop_assert!(cut_lp(&inst).unwrap().value <= opt.solution.cost);
    }

    #[test]
    fn completion_fits_budget(seed in any::<u64>()) {
        let inst = random_instance(seed, 4, 10, false);
        let center = (seed % inst.n() as u64) as usize;
        let ps = inst.principal_structure(center);
        let r: Vec<usize> = ps.cross_links().into_iter().filter(|l| l % 2 == 0).collect();
        prop_assert!(r.iter().all(|&l| ps.class[l] == LinkClass::Cross));
        let dual = minimal_laminar_dual(&inst).unwrap();
        let c = complete_cross_links(&inst, center, &r, &dual).unwrap();
        let mut all = c.links.clone();
        all.extend(&r);
        prop_assert!(inst.is_feasible(&all));
        prop_assert!(c.cost <= c.budget);
    }
}
