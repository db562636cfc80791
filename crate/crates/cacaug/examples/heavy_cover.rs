//! Rectangle stabbing with stripes, and rounding an LP point on its heavy cuts.

use cacaug::cactus::{rat, ratio, CactusInstance};
use cacaug::heavy::{cover_heavy_cuts, heavy_cuts, stripe_hit, Rect, WeightedPointSet};

fn main() {
    let ps = WeightedPointSet {
        points: vec![(0, 1), (1, 3), (2, 2), (3, 5), (4, 4)],
        weights: vec![ratio(1, 2), ratio(1, 2), ratio(1, 2), ratio(1, 2), ratio(1, 2)],
        rects: vec![
            Rect { x0: 0, x1: 1, y0: 0, y1: 10 },
            Rect { x0: 1, x1: 3, y0: 2, y1: 10 },
            Rect { x0: 3, x1: 4, y0: 4, y1: 10 },
        ],
    };
    let hit = stripe_hit(&ps).expect("every rectangle has weight at least one");
    println!("stripe hitting set {hit:?} (bound {})", ps.total_weight() * rat(2));

    let inst = CactusInstance::parse("vertices 5\nroot 0\ncycle 0 1 2 3 4\nlink 1 3\nlink 2 4\nlink 1 4\nlink 0 2\n").expect("valid");
    let x = vec![ratio(1, 2); inst.links().len()];
    let eps = rat(16);
    println!("heavy cuts at eps = 16: {:?}", heavy_cuts(&inst, &x, &eps));
    let cover = cover_heavy_cuts(&inst, &x, &eps).expect("cover");
    println!("heavy cover {:?} using {} up and {} left rectangles", cover.links, cover.up_rects, cover.left_rects);
}
