//! Exact optimum by branch and bound, checked against exhaustive search.

use cacaug::cactus::format_rational;
use cacaug::exact::{shadow_minimal, solve_bruteforce, solve_exact};
use cacaug::gen::{generate_instance, GenSpec};

fn main() {
    let spec = GenSpec { cost_hi: 4, ..GenSpec::unit(9, 4, 0.3, 7) };
    let inst = generate_instance(&spec).expect("consistent spec");
    let bb = solve_exact(&inst, 1_000_000).expect("feasible");
    let bf = solve_bruteforce(&inst).expect("small enough");
    println!("{} links, {} cuts", inst.links().len(), inst.num_cuts());
    println!("branch and bound: {:?} cost {} ({} nodes, optimal {})", bb.solution.links, format_rational(&bb.solution.cost), bb.nodes, bb.optimal);
    println!("brute force:      {:?} cost {}", bf.links, format_rational(&bf.cost));
    assert_eq!(bb.solution.cost, bf.cost);
    let sm = shadow_minimal(&inst.shadow_closure(), &bb.solution.links);
    println!("shadow-minimal form in the closure: {sm:?}");
}
