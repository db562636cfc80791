//! Cut LP, bidirected LP, the minimal laminar dual, and completion of a set
//! of cross-links within the dual budget.

use cacaug::cactus::{format_rational, CactusInstance};
use cacaug::lp::{complete_cross_links, cut_lp, directed_cut_lp, minimal_laminar_dual};

fn main() {
    let inst = CactusInstance::parse(
        "vertices 7\nroot 0\ncycle 0 1 2\ncycle 0 3 4\ncycle 0 5 6\nlink 1 3\nlink 2 5\nlink 4 6\nlink 1 2\nlink 3 4 2\nlink 5 6 2\n",
    )
    .expect("valid instance");
    let cut = cut_lp(&inst).expect("lp");
    let bi = directed_cut_lp(&inst).expect("integral");
    println!("cut LP {}  bidirected LP {}", format_rational(&cut.value), format_rational(&bi.value));
    println!("bidirected optimum uses links {:?}", bi.links);

    let y = minimal_laminar_dual(&inst).expect("dual");
    println!("dual value {} laminar {} minimal {}", format_rational(&y.value), y.laminar, y.minimal);
    for (c, w) in &y.y {
        println!("  y[{:?}] = {}", inst.cuts()[*c].vertices(), format_rational(w));
    }

    let ps = inst.principal_structure(0);
    let cross = ps.cross_links();
    println!("cross-links around vertex 0: {cross:?}");
    let done = complete_cross_links(&inst, 0, &cross[..1], &y).expect("completion");
    println!("completion {:?} cost {} within budget {}", done.links, format_rational(&done.cost), format_rational(&done.budget));
}
