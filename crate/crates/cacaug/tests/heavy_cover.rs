mod common;

use cacaug::cactus::{rat, ratio, CactusInstance, Link, Rational};
use cacaug::heavy::{
    capped_weight, cactus_to_cycle, cover_heavy_cuts, cut_interval, heavy_cuts, stripe_hit, HeavyError, Rect,
    WeightedPointSet,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_instance;

fn column(x0: i64, x1: i64) -> Rect {
    Rect { x0, x1, y0: 0, y1: 10 }
}

#[test]
fn one_point_one_rectangle() {
    let ps = WeightedPointSet { points: vec![(0, 0)], weights: vec![rat(1)], rects: vec![column(0, 0)] };
    assert_eq!(stripe_hit(&ps).unwrap(), vec![0]);
}

#[test]
fn four_halves_in_adjacent_pairs() {
    let ps = WeightedPointSet {
        points: (0..4).map(|i| (i, i)).collect(),
        weights: vec![ratio(1, 2); 4],
        rects: (0..3).map(|i| column(i, i + 1)).collect(),
    };
    let h = stripe_hit(&ps).unwrap();
    assert!(ps.hits_all(&h));
    assert!(h.len() <= 4);
    assert_eq!(capped_weight(&ps.weights), rat(4));
}

#[test]
fn light_rectangle_is_rejected() {
    let ps = WeightedPointSet { points: vec![(0, 0)], weights: vec![ratio(1, 3)], rects: vec![column(0, 0)] };
    assert_eq!(stripe_hit(&ps).unwrap_err(), HeavyError::LightRectangle(0));
}

fn bundle(k: usize) -> CactusInstance {
    let links = (0..k).map(|i| Link::new(i, 0, 1, rat(1))).collect();
    CactusInstance::new(2, 0, vec![vec![0, 1]], links).unwrap()
}

#[test]
fn light_point_needs_nothing() {
    let inst = bundle(4);
    let x = vec![rat(1); 4];
    assert!(heavy_cuts(&inst, &x, &rat(1)).is_empty());
    let c = cover_heavy_cuts(&inst, &x, &rat(1)).unwrap();
    assert!(c.links.is_empty() && c.heavy_cuts.is_empty());
}

#[test]
fn single_heavy_cut() {
    let inst = bundle(20);
    let x = vec![rat(1); 20];
    assert_eq!(heavy_cuts(&inst, &x, &rat(1)), vec![0]);
    let c = cover_heavy_cuts(&inst, &x, &rat(1)).unwrap();
    assert!(!c.links.is_empty() && c.links.len() <= 10);
}

#[test]
fn bad_arguments() {
    let inst = bundle(2);
    assert_eq!(cover_heavy_cuts(&inst, &[rat(1)], &rat(1)).unwrap_err(), HeavyError::Dimension { got: 1, want: 2 });
    assert_eq!(cover_heavy_cuts(&inst, &[rat(1), rat(1)], &rat(0)).unwrap_err(), HeavyError::BadEps);
}

fn random_x(inst: &CactusInstance, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..inst.links().len()).map(|_| ratio(rng.gen_range(0..=16), 4)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cycle_order_keeps_cuts_contiguous(seed in any::<u64>()) {
        let inst = random_instance(seed, 2, 12, false);
        let order = cactus_to_cycle(&inst);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..inst.n()).collect::<Vec<_>>());
        prop_assert_eq!(order[0], inst.root());
        let pos: Vec<usize> = {
            let mut p = vec![0; inst.n()];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        for c in 0..inst.num_cuts() {
            let (a, b) = cut_interval(&inst, &order, c).expect("contiguous");
            prop_assert!(a >= 1);
            for l in inst.links() {
                let inside = |v: usize| (a..=b).contains(&pos[v]);
                prop_assert_eq!(inst.coverage().covers(l.id, c), inside(l.u) != inside(l.v));
            }
        }
    }

    #[test]
    fn heavy_cover_clears_heavy_cuts(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 10, false);
        let x = random_x(&inst, seed);
        let eps = rat(2);
        let cover = cover_heavy_cuts(&inst, &x, &eps).unwrap();
        let total = x.iter().fold(Rational::from_integer(0.into()), |a, v| a + v);
        prop_assert!(rat(cover.links.len() as i64) <= &eps * total / rat(2) || cover.heavy_cuts.is_empty());
        for &c in &cover.heavy_cuts {
            prop_assert!(cover.links.iter().any(|&l| inst.coverage().covers(l, c)));
        }
        let res = inst.residual_instance(&cover.links).unwrap();
        let rx: Vec<Rational> = res.link_origin.iter().map(|&l| x[l].clone()).collect();
        prop_assert!(heavy_cuts(&res.instance, &rx, &eps).is_empty());
    }

    #[test]
    fn stripes_hit_with_bounded_size(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let np = rng.gen_range(1..30);
        let points: Vec<(i64, i64)> = (0..np).map(|_| (rng.gen_range(0..12), rng.gen_range(0..12))).collect();
        let weights: Vec<Rational> = (0..np).map(|_| ratio(rng.gen_range(0..=4), 4)).collect();
        let mut rects = Vec::new();
        for _ in 0..rng.gen_range(1..10) {
            let (a, b) = (rng.gen_range(0..12), rng.gen_range(0..12));
            let r = Rect { x0: a.min(b), x1: a.max(b), y0: rng.gen_range(0..12), y1: 12 };
            let w: Rational = points.iter().zip(&weights).filter(|(p, _)| r.contains(**p)).map(|(_, w)| w.clone()).sum();
            if w >= rat(1) {
                rects.push(r);
            }
        }
        let ps = WeightedPointSet { points, weights, rects };
        let h = stripe_hit(&ps).unwrap();
        prop_assert!(ps.hits_all(&h));
        prop_assert!(rat(h.len() as i64) <= rat(2) * ps.total_weight());
    }
}
