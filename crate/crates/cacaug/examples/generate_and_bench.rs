//! Generate a small corpus and benchmark every pipeline on it.

use cacaug::bench::{run_bench, BenchConfig};
use cacaug::gen::{generate_instance, GenSpec};

fn main() {
    let dir = std::env::temp_dir().join("cacaug-example-corpus");
    std::fs::create_dir_all(&dir).expect("temp dir");
    for seed in 0..5 {
        let spec = GenSpec { terminals: Some(6), ..GenSpec::unit(10, 5, 0.25, seed) };
        let inst = generate_instance(&spec).expect("consistent spec");
        std::fs::write(dir.join(format!("g{seed}.cac")), inst.to_text()).expect("write");
    }
    let report = run_bench(&dir, &BenchConfig::default()).expect("corpus");
    print!("{}", report.to_csv().expect("csv"));
    println!("mean ratio {:?}", report.mean_ratio());
}
