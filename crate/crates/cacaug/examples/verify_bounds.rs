//! Certify the b-condition and evaluate both factor optimizations.

use cacaug::bounds::{min_g_minus_f, min_second_difference, solve_final_optimization, solve_simple_optimization, verify_b_condition, BoundParams};

fn main() {
    let p = BoundParams { grid: 16, ..BoundParams::default() };
    let r = verify_b_condition(&p).expect("valid params");
    println!("b = {}: {:?}, min lower bound {:.2e}, min value {:.5}", p.b, r.status, r.min_lower_bound, r.min_value);
    println!("argmin {:?}", r.argmin);
    let f = solve_final_optimization(&p).expect("valid params");
    println!("final optimization {:.5} at alpha {:.4}", f.value, f.alpha);
    let s = solve_simple_optimization();
    println!("simple optimization {:.6} at alpha {:.4}", s.value, s.alpha);
    println!("g convexity {:.2e}, g - f {:.2e}", min_second_difference(30), min_g_minus_f(30));
}
