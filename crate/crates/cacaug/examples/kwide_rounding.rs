//! Bundle LP on a k-wide instance, Algorithm 1 sampling, and derandomization.

use cacaug::cactus::format_rational;
use cacaug::gen::{generate_instance, GenSpec};
use cacaug::kwide::{bundle_lp, bundle_rounding, derandomize_rounding, sample_and_reoptimize, solve_approx, ApproxConfig, KWide};

fn main() {
    let spec = GenSpec { leaf_links: true, ..GenSpec::unit(10, 5, 0.4, 11) };
    let inst = generate_instance(&spec).expect("consistent spec").shadow_closure();
    let center = KWide::best_center(&inst);
    let kw = KWide::new(&inst, center).expect("shadow-complete");
    println!("center {center}, {} principal subcacti, width {}", kw.q(), kw.ps.width());

    let bp = bundle_lp(&kw, 2_000).expect("bundle LP");
    println!("bundle LP value {} (integral {})", format_rational(&bp.value), bp.is_integral());
    let plain = bundle_rounding(&kw).expect("subcactus optima");
    println!("plain bundle rounding: {} links", plain.len());
    for seed in 0..3 {
        let o = sample_and_reoptimize(&kw, &bp, seed).expect("sample");
        println!("seed {seed}: sampled {} -> reoptimized {}", o.sampled_size(), o.solution.len());
    }
    let d = derandomize_rounding(&kw, &bp, 4_096, 16).expect("derandomize");
    let expected = d.expected_cost.as_ref().map(format_rational).unwrap_or_else(|| "-".into());
    println!("derandomized: {} links (exact {}, expectation {expected})", d.outcome.solution.len(), d.exact);

    let report = solve_approx(&inst, &ApproxConfig::default()).expect("approx");
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
}
