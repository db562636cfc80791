//! Stack profile of a bundle point and removable sets in domination graphs.

use cacaug::cactus::format_rational;
use cacaug::gen::{generate_instance, GenSpec};
use cacaug::kwide::{bundle_lp, sample_choice, KWide};
use cacaug::stacks::{check_load_laws, classify_stacks, DomArc, DominationGraph};

fn arc(tail: usize, head: usize) -> DomArc {
    DomArc { tail, head, tail_height: 0, head_height: 0, link: None }
}

fn main() {
    let spec = GenSpec { leaf_links: true, ..GenSpec::unit(10, 4, 0.5, 5) };
    let inst = generate_instance(&spec).expect("consistent spec").shadow_closure();
    let kw = KWide::new(&inst, KWide::best_center(&inst)).expect("shadow-complete");
    let bp = bundle_lp(&kw, 2_000).expect("bundle LP");
    let prof = classify_stacks(&kw, &bp.x);
    println!("{:>4} {:>5} {:>6} {:>6} {:>6} {:>6}", "t", "color", "λ0", "μ0", "λ1", "μ1");
    for s in &prof.stacks {
        println!(
            "{:>4} {:>5} {:>6} {:>6} {:>6} {:>6}",
            s.terminal,
            s.color,
            format_rational(&s.lambda0),
            format_rational(&s.mu0),
            format_rational(&s.lambda1),
            format_rational(&s.mu1)
        );
    }
    println!("laws hold: {:?}", check_load_laws(&kw, &bp));
    let g = DominationGraph::from_choice(&kw, &bp, &prof, &sample_choice(&bp, 0)).expect("domination graph");
    println!("sampled graph: {} arcs, {} dominated", g.arcs.len(), g.dominated_count());

    // a directed triangle of three colors: one arc of three can go
    let tri = DominationGraph::new(3, vec![0, 1, 2], vec![arc(0, 1), arc(1, 2), arc(2, 0)]).expect("valid");
    let r = tri.max_removable_set().expect("small");
    println!("triangle: removable {:?}, kind {:?}", r, tri.kind(&tri.components()[0]));
}
