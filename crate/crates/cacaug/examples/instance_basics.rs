//! Parse an instance, list its 2-cuts, and look at coverage, shadows and a
//! residual instance.

use cacaug::cactus::{format_rational, CactusInstance};

const TEXT: &str = "\
# two cycles sharing vertex 2
vertices 6
root 0
cycle 0 1 2 3
cycle 2 4 5
link 1 3
link 1 5 2
link 4 0
link 3 5 3/2
";

fn main() {
    let inst = CactusInstance::parse(TEXT).expect("valid instance");
    println!("terminals: {:?}", inst.terminals());
    for cut in inst.cuts() {
        let by: Vec<usize> = inst.covering_links(cut.id);
        println!("cut {:>2} {:?} covered by {:?}", cut.id, cut.vertices(), by);
    }
    for l in inst.links() {
        println!("link {} = {{{}, {}}} cost {} shadows {:?}", l.id, l.u, l.v, format_rational(&l.cost), inst.shadow_pairs(l.id));
    }
    println!("feasible with all links: {}", inst.infeasible_cut().is_none());

    let closed = inst.shadow_closure();
    println!("shadow closure has {} links (shadow-complete: {})", closed.links().len(), closed.is_shadow_complete());

    let res = inst.residual_instance(&[1]).expect("residual");
    println!("after fixing link 1: {} vertices, {} uncovered cuts", res.instance.n(), res.instance.num_cuts());
    print!("{}", res.instance.to_text());
}
