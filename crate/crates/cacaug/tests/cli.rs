mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use cacaug::bench::{bench_instance, run_bench, BenchConfig};
use cacaug::gen::{generate_instance, GenError, GenSpec};
use proptest::prelude::*;

use common::random_instance;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cacaug")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &std::path::Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gen_output_is_reproducible() {
    let args = ["gen", "--n", "12", "--cycles", "5", "--density", "0.3", "--cost-hi", "4", "--seed", "9"];
    let (a, b) = (bin(&args), bin(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = bin(&["gen", "--n", "12", "--cycles", "5", "--density", "0.3", "--cost-hi", "4", "--seed", "10"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn two_terminals_give_a_path_of_cycles() {
    for seed in 0..10 {
        let spec = GenSpec { terminals: Some(2), ..GenSpec::unit(8, 7, 0.2, seed) };
        let inst = generate_instance(&spec).unwrap();
        assert_eq!(inst.terminals().len(), 2);
        assert!((0..inst.n()).all(|v| inst.degree(v) <= 4));
    }
    let bad = GenSpec { terminals: Some(2), ..GenSpec::unit(8, 3, 0.2, 0) };
    assert!(matches!(generate_instance(&bad), Err(GenError::Inconsistent(_))));
}

#[test]
fn zero_density_yields_a_minimal_cover() {
    for seed in 0..10 {
        let inst = generate_instance(&GenSpec::unit(10, 4, 0.0, seed)).unwrap();
        let all: Vec<usize> = (0..inst.links().len()).collect();
        assert!(inst.is_feasible(&all));
        for l in 0..all.len() {
            let rest: Vec<usize> = all.iter().copied().filter(|&m| m != l).collect();
            assert!(!inst.is_feasible(&rest));
        }
    }
}

#[test]
fn empty_corpus_benches_cleanly() {
    let dir = scratch("empty_corpus");
    assert!(run_bench(&dir, &BenchConfig::default()).unwrap().rows.is_empty());
    let out = bin(&["bench", dir.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn bench_corpus_from_gen() {
    let dir = scratch("gen_corpus");
    let out = bin(&["gen", "--n", "8", "--cycles", "3", "--seed", "1", "--count", "4", "--dir", dir.to_str().unwrap()]);
    assert!(out.status.success());
    write(&dir, "broken.cac", "vertices 2\ncycle 0 1 1\n");
    let csv = dir.join("report.csv");
    let out = bin(&["bench", dir.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let report = run_bench(&dir, &BenchConfig::default()).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert_eq!(report.failures(), 1);
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn algorithm1_beats_plain_bundle_on_leaf_links() {
    let cfg = BenchConfig::default();
    let mut rows = Vec::new();
    for seed in 0..30u64 {
        let n = 7 + (seed % 5) as usize;
        let spec = GenSpec { leaf_links: true, ..GenSpec::unit(n, 1 + (seed as usize * 7) % (n - 1), 0.6, 700 + seed) };
        rows.push(bench_instance("leaf", &generate_instance(&spec).unwrap(), &cfg));
    }
    let report = cacaug::bench::BenchReport { rows };
    assert_eq!(report.failures(), 0);
    let (alg, plain) = report.algorithm1_vs_plain().unwrap();
    assert!(alg < plain, "Algorithm 1 mean {alg} vs plain {plain}");
}

#[test]
fn mean_ratio_on_small_instances() {
    let cfg = BenchConfig::default();
    let rows = (0..50).map(|s| bench_instance("small", &random_instance(900 + s, 4, 12, false), &cfg)).collect();
    let report = cacaug::bench::BenchReport { rows };
    assert_eq!(report.failures(), 0);
    let mean = report.mean_ratio().unwrap();
    assert!((1.0..=1.5).contains(&mean), "mean ratio {mean}");
}

#[test]
fn exit_codes() {
    let dir = scratch("exit_codes");
    let good = write(&dir, "good.cac", "vertices 4\nroot 0\ncycle 0 1 2 3\nlink 0 2\nlink 1 3\n");
    let open = write(&dir, "open.cac", "vertices 3\nroot 0\ncycle 0 1\ncycle 1 2\nlink 0 1\n");
    let junk = write(&dir, "junk.cac", "vertices x\n");
    assert_eq!(bin(&["validate", &good]).status.code(), Some(0));
    assert_eq!(bin(&["solve-exact", &good]).status.code(), Some(0));
    assert_eq!(bin(&["solve-approx", &good]).status.code(), Some(0));
    assert_eq!(bin(&["lp-bound", &good, "--json"]).status.code(), Some(0));
    assert_eq!(bin(&["decompose", &good]).status.code(), Some(0));
    assert_eq!(bin(&["solve-exact", &open]).status.code(), Some(1));
    assert_eq!(bin(&["validate", &junk]).status.code(), Some(2));
    assert_eq!(bin(&["solve-exact", "/nonexistent/file.cac"]).status.code(), Some(2));
    assert_eq!(bin(&["gen", "--n", "3", "--cycles", "5"]).status.code(), Some(2));
    assert_eq!(bin(&["verify-bounds", "--b", "0.49", "--grid", "16"]).status.code(), Some(3));
}

#[test]
fn solution_json_carries_a_certificate() {
    let dir = scratch("certificate");
    let good = write(&dir, "good.cac", "vertices 4\nroot 0\ncycle 0 1 2 3\nlink 0 2\nlink 1 3\n");
    let out = bin(&["solve-exact", &good]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], serde_json::json!(true));
    assert_eq!(v["cost"], serde_json::json!("2"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_instances_are_feasible_and_reproducible(
        n in 2usize..20, c in 1usize..19, density in 0.0..0.5f64, leaf in any::<bool>(), seed in any::<u64>()
    ) {
        prop_assume!(c < n);
        let spec = GenSpec { leaf_links: leaf, cost_hi: 3, ..GenSpec::unit(n, c, density, seed) };
        let a = generate_instance(&spec).unwrap();
        prop_assert!(a.infeasible_cut().is_none());
        prop_assert_eq!(a.cycles().len(), c);
        prop_assert_eq!(a.to_text(), generate_instance(&spec).unwrap().to_text());
    }
}
