//! Benchmark harness over a directory of instance files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cactus::{to_f64, CactusInstance};
use crate::exact::solve_exact;
use crate::kwide::{bundle_rounding, solve_approx, ApproxConfig, KWide};
use crate::lp::cut_lp;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read corpus {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub approx: ApproxConfig,
    /// Skip the exact solver above this many links.
    pub exact_max_links: usize,
    pub exact_budget: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { approx: ApproxConfig::default(), exact_max_links: 40, exact_budget: 2_000_000 }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub n: usize,
    pub terminals: usize,
    pub links: usize,
    pub lp_value: Option<f64>,
    pub exact: Option<f64>,
    pub approx: Option<f64>,
    pub directed: Option<f64>,
    /// Algorithm 1 on the bundle point, best over the configured trials.
    pub algorithm1: Option<f64>,
    /// Union of exact subcactus optima.
    pub plain_bundle: Option<f64>,
    pub ratio: Option<f64>,
    pub seed: u64,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    fn mean(&self, f: impl Fn(&BenchRow) -> Option<f64>) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn mean_ratio(&self) -> Option<f64> {
        self.mean(|r| r.ratio)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Mean Algorithm 1 cost and mean plain bundle cost over rows having both.
    pub fn algorithm1_vs_plain(&self) -> Option<(f64, f64)> {
        let both: Vec<(f64, f64)> = self.rows.iter().filter_map(|r| Some((r.algorithm1?, r.plain_bundle?))).collect();
        if both.is_empty() {
            return None;
        }
        let k = both.len() as f64;
        Some((both.iter().map(|p| p.0).sum::<f64>() / k, both.iter().map(|p| p.1).sum::<f64>() / k))
    }

    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn check(inst: &CactusInstance, links: &[usize], what: &str) -> Result<(), String> {
    if inst.is_feasible(links) {
        Ok(())
    } else {
        Err(format!("{what} output failed re-verification"))
    }
}

fn fill(row: &mut BenchRow, inst: &CactusInstance, cfg: &BenchConfig) -> Result<(), String> {
    row.lp_value = Some(to_f64(&cut_lp(inst).map_err(|e| e.to_string())?.value));
    if inst.links().len() <= cfg.exact_max_links {
        let ex = solve_exact(inst, cfg.exact_budget).map_err(|e| e.to_string())?;
        check(inst, &ex.solution.links, "exact")?;
        if ex.optimal {
            row.exact = Some(to_f64(&ex.solution.cost));
        }
    }
    let rep = solve_approx(inst, &cfg.approx).map_err(|e| e.to_string())?;
    check(inst, &rep.links, "approx")?;
    row.approx = Some(to_f64(&rep.cost));
    row.directed = Some(to_f64(&rep.directed_cost));
    row.algorithm1 = rep.bundle_cost.as_ref().map(to_f64);
    if let Some(e) = row.exact {
        row.ratio = Some(if e == 0.0 { 1.0 } else { to_f64(&rep.cost) / e });
    }
    let closed = inst.shadow_closure();
    let kw = KWide::new(&closed, rep.center).map_err(|e| e.to_string())?;
    if let Ok(plain) = bundle_rounding(&kw) {
        let mut orig: Vec<usize> = plain.iter().map(|&l| closed.original_of(l)).collect();
        orig.sort_unstable();
        orig.dedup();
        check(inst, &orig, "plain bundle")?;
        row.plain_bundle = Some(to_f64(&inst.cost_of(&orig)));
    }
    Ok(())
}

/// Run every pipeline on one instance; failures land in the row.
pub fn bench_instance(name: &str, inst: &CactusInstance, cfg: &BenchConfig) -> BenchRow {
    let start = Instant::now();
    let mut row = BenchRow {
        name: name.to_string(),
        n: inst.n(),
        terminals: inst.terminals().len(),
        links: inst.links().len(),
        seed: cfg.approx.seed,
        ..Default::default()
    };
    if let Err(e) = fill(&mut row, inst, cfg) {
        row.error = Some(e);
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

/// Every `*.cac` file under `dir`, sorted by name, benchmarked on the current
/// rayon pool.
pub fn run_bench(dir: &Path, cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let io = |source| BenchError::Io { path: dir.to_path_buf(), source };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cac"))
        .collect();
    files.sort();
    let rows = files
        .par_iter()
        .map(|p| {
            let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let parsed = std::fs::read_to_string(p)
                .map_err(|e| e.to_string())
                .and_then(|t| CactusInstance::parse(&t).map_err(|e| e.to_string()));
            match parsed {
                Ok(inst) => bench_instance(&name, &inst, cfg),
                Err(e) => BenchRow { name, seed: cfg.approx.seed, error: Some(e), ..Default::default() },
            }
        })
        .collect();
    Ok(BenchReport { rows })
}
