use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cacaug::bench::{run_bench, BenchConfig};
use cacaug::bounds::{
    min_g_minus_f, min_second_difference, solve_final_optimization, solve_simple_optimization, verify_b_condition,
    BoundParams, Certification,
};
use cacaug::cactus::{format_rational, parse_rational, to_f64, CactusInstance, Rational, Solution};
use cacaug::decompose::{solve_decomposed, Params, SplitNode};
use cacaug::exact::solve_exact;
use cacaug::gen::{generate_instance, GenSpec};
use cacaug::heavy::cover_heavy_cuts;
use cacaug::kwide::{bundle_lp, solve_approx, ApproxConfig, KWide};
use cacaug::lp::{cut_lp, directed_cut_lp, minimal_laminar_dual};
use cacaug::stacks::classify_stacks;

const THREADS_ENV: &str = "CACAUG_THREADS";

#[derive(Parser)]
#[command(name = "cacaug", version, about = "Cactus augmentation solvers and bound checks")]
struct Cli {
    /// Worker threads; defaults to $CACAUG_THREADS, then the core count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse an instance and report its shape and feasibility.
    Validate { file: PathBuf },
    /// Optimal solution by branch and bound.
    SolveExact {
        file: PathBuf,
        #[arg(long, default_value_t = 5_000_000)]
        budget: usize,
    },
    /// Decomposition plus the bundle / Algorithm 1 route.
    SolveApprox {
        file: PathBuf,
        #[command(flatten)]
        approx: ApproxArgs,
    },
    /// Cut LP value, bidirected LP value and the minimal laminar dual.
    LpBound {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Round a fractional point on its heavy cuts.
    HeavyCover {
        file: PathBuf,
        /// JSON array of link values (numbers or "p/q" strings).
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "1/2")]
        eps: String,
    },
    /// Split at big light cuts and solve the k-wide pieces.
    Decompose {
        file: PathBuf,
        #[command(flatten)]
        approx: ApproxArgs,
        #[arg(long)]
        dump_tree: Option<PathBuf>,
    },
    /// Certify the b-condition and evaluate the factor optimizations.
    VerifyBounds {
        #[arg(long, default_value_t = 0.42)]
        b: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        refine: usize,
        #[arg(long)]
        json: bool,
    },
    /// Random instance generator.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cycles: usize,
        #[arg(long)]
        terminals: Option<usize>,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        cost_lo: u32,
        #[arg(long, default_value_t = 1)]
        cost_hi: u32,
        #[arg(long)]
        leaf_links: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write `count` files named `inst_<seed>.cac` into this directory.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Run every pipeline over a directory of `.cac` files.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        approx: ApproxArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        exact_max_links: usize,
    },
}

#[derive(Args, Clone)]
struct ApproxArgs {
    #[arg(long, default_value = "1/2")]
    eps: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    derandomize: bool,
    #[arg(long, default_value_t = 16)]
    trials: u64,
    #[arg(long, default_value_t = 2_000)]
    pool_cap: usize,
    /// Limit on |S| when guessing links at a contracted vertex.
    #[arg(long, default_value_t = 2)]
    s_cap: usize,
}

impl ApproxArgs {
    fn config(&self) -> ApproxConfig {
        ApproxConfig {
            seed: self.seed,
            trials: self.trials,
            derandomize: self.derandomize,
            pool_cap: self.pool_cap,
            ..ApproxConfig::default()
        }
    }

    fn params(&self) -> Result<Params> {
        let eps = parse_rational(&self.eps).ok_or_else(|| input(format!("bad --eps `{}`", self.eps)))?;
        let mut p = Params::new(eps).map_err(input)?;
        p.s_cap = self.s_cap;
        Ok(p)
    }
}

/// Exit status carried through `anyhow`.
#[derive(Debug, thiserror::Error)]
enum Status {
    #[error("{0}")]
    Input(String),
    #[error("instance is infeasible: cut {0} has no covering link")]
    Infeasible(usize),
    #[error("{0}")]
    Certification(String),
}

fn input(e: impl std::fmt::Display) -> anyhow::Error {
    Status::Input(e.to_string()).into()
}

fn load(path: &Path) -> Result<CactusInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    CactusInstance::parse(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_feasible(path: &Path) -> Result<CactusInstance> {
    let inst = load(path)?;
    if let Some(c) = inst.infeasible_cut() {
        return Err(Status::Infeasible(c).into());
    }
    Ok(inst)
}

fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn solution_json(inst: &CactusInstance, sol: &Solution) -> Value {
    let cert = inst.certificate(&sol.links).expect("solution is feasible");
    json!({
        "links": sol.links,
        "cost": q(&sol.cost),
        "feasible": true,
        "certificate": cert,
    })
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn validate(file: &Path) -> Result<()> {
    let inst = load(file)?;
    println!("vertices   {}", inst.n());
    println!("root       {}", inst.root());
    println!("cycles     {}", inst.cycles().len());
    println!("terminals  {}", inst.terminals().len());
    println!("2-cuts     {}", inst.num_cuts());
    println!("links      {}", inst.links().len());
    println!("unit cost  {}", inst.is_unit_cost());
    match inst.infeasible_cut() {
        None => {
            println!("feasible   yes");
            Ok(())
        }
        Some(c) => Err(Status::Infeasible(c).into()),
    }
}

fn solve_exact_cmd(file: &Path, budget: usize) -> Result<()> {
    let inst = load_feasible(file)?;
    let r = solve_exact(&inst, budget)?;
    let mut v = solution_json(&inst, &r.solution);
    v["optimal"] = json!(r.optimal);
    v["nodes"] = json!(r.nodes);
    v["lower_bound"] = q(&r.lower_bound);
    print(&v);
    Ok(())
}

fn approx_pipeline(inst: &CactusInstance, a: &ApproxArgs) -> Result<(Solution, Value)> {
    let cfg = a.config();
    let params = a.params()?;
    let sub = |piece: &CactusInstance| {
        solve_approx(piece, &cfg).map(|r| Solution::new(piece, r.links)).map_err(|e| e.to_string())
    };
    let dec = solve_decomposed(inst, &params, &sub)?;
    let direct = solve_approx(inst, &cfg)?;
    let closed = inst.shadow_closure();
    let stacks = KWide::new(&closed, direct.center)
        .ok()
        .and_then(|kw| bundle_lp(&kw, cfg.pool_cap).ok().map(|bp| classify_stacks(&kw, &bp.x)));
    let table: Vec<Value> = stacks
        .iter()
        .flat_map(|p| &p.stacks)
        .map(|s| {
            json!({
                "terminal": s.terminal,
                "color": s.color,
                "lambda0": q(&s.lambda0),
                "mu0": q(&s.mu0),
                "lambda1": q(&s.lambda1),
                "mu1": q(&s.mu1),
                "eta": s.eta.iter().map(|(k, v)| (k.to_string(), q(v))).collect::<serde_json::Map<_, _>>(),
            })
        })
        .collect();
    let best = if direct.cost < dec.solution.cost { Solution::new(inst, direct.links.clone()) } else { dec.solution.clone() };
    let diag = json!({
        "decomposed_cost": q(&dec.solution.cost),
        "splits": dec.splits,
        "heavy_links": dec.heavy_links,
        "subsolver_calls": dec.subsolver_calls,
        "direct": direct,
        "stacks": table,
    });
    Ok((best, diag))
}

fn solve_approx_cmd(file: &Path, a: &ApproxArgs) -> Result<()> {
    let inst = load_feasible(file)?;
    let (sol, diag) = approx_pipeline(&inst, a)?;
    let mut v = solution_json(&inst, &sol);
    v["diagnostics"] = diag;
    print(&v);
    Ok(())
}

fn lp_bound(file: &Path, as_json: bool) -> Result<()> {
    let inst = load_feasible(file)?;
    let primal = cut_lp(&inst)?;
    let directed = directed_cut_lp(&inst)?;
    let dual = minimal_laminar_dual(&inst)?;
    let supp = dual.support();
    // parent = smallest support cut strictly containing this one
    let parent: Vec<Option<usize>> = supp
        .iter()
        .map(|&c| {
            let m = &inst.cuts()[c].members;
            supp.iter()
                .copied()
                .filter(|&d| d != c && m.is_subset(&inst.cuts()[d].members) && inst.cuts()[d].members != *m)
                .min_by_key(|&d| inst.cuts()[d].len())
        })
        .collect();
    if as_json {
        let nodes: Vec<Value> = supp
            .iter()
            .zip(&parent)
            .map(|(&c, p)| json!({"cut": c, "vertices": inst.cuts()[c].vertices(), "y": q(&dual.weight(c)), "parent": p}))
            .collect();
        print(&json!({
            "cut_lp": q(&primal.value),
            "bidirected_lp": q(&directed.value),
            "dual": q(&dual.value),
            "laminar": dual.laminar,
            "minimal": dual.minimal,
            "support": nodes,
        }));
        return Ok(());
    }
    println!("cut LP         {}", format_rational(&primal.value));
    println!("bidirected LP  {}", format_rational(&directed.value));
    println!("dual           {}  (laminar: {}, minimal: {})", format_rational(&dual.value), dual.laminar, dual.minimal);
    fn walk(inst: &CactusInstance, supp: &[usize], parent: &[Option<usize>], y: &cacaug::lp::DualSolution, at: Option<usize>, depth: usize) {
        for (i, &c) in supp.iter().enumerate() {
            if parent[i] == at {
                println!("{}cut {c} {:?}  y = {}", "  ".repeat(depth + 1), inst.cuts()[c].vertices(), format_rational(&y.weight(c)));
                walk(inst, supp, parent, y, Some(c), depth + 1);
            }
        }
    }
    walk(&inst, &supp, &parent, &dual, None, 0);
    Ok(())
}

fn parse_point(text: &str, len: usize) -> Result<Vec<Rational>> {
    let raw: Vec<Value> = serde_json::from_str(text).map_err(|e| input(format!("--x: {e}")))?;
    if raw.len() != len {
        return Err(input(format!("--x has {} entries, instance has {len} links", raw.len())));
    }
    raw.iter()
        .map(|v| {
            let s = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(input(format!("--x entry {v} is not a number"))),
            };
            if let Some(r) = parse_rational(&s) {
                return Ok(r);
            }
            let f: f64 = s.parse().map_err(|_| input(format!("--x entry `{s}` is not a number")))?;
            Rational::from_float(f).ok_or_else(|| input(format!("--x entry `{s}` is not finite")))
        })
        .collect()
}

fn heavy_cover_cmd(file: &Path, x: &str, eps: &str) -> Result<()> {
    let inst = load_feasible(file)?;
    let x = parse_point(x, inst.links().len())?;
    let eps = parse_rational(eps).ok_or_else(|| input(format!("bad --eps `{eps}`")))?;
    let cover = cover_heavy_cuts(&inst, &x, &eps).map_err(input)?;
    let total = x.iter().fold(Rational::from_integer(0.into()), |a, v| a + v);
    print(&json!({
        "links": cover.links,
        "heavy_cuts": cover.heavy_cuts,
        "up_rects": cover.up_rects,
        "left_rects": cover.left_rects,
        "x_total": q(&total),
        "bound": q(&(total * Rational::from_integer(8.into()))),
    }));
    Ok(())
}

fn decompose_cmd(file: &Path, a: &ApproxArgs, dump: Option<&Path>) -> Result<()> {
    let inst = load_feasible(file)?;
    let cfg = a.config();
    let params = a.params()?;
    let sub = |piece: &CactusInstance| {
        solve_approx(piece, &cfg).map(|r| Solution::new(piece, r.links)).map_err(|e| e.to_string())
    };
    let dec = solve_decomposed(&inst, &params, &sub)?;
    if let Some(p) = dump {
        let text = serde_json::to_string_pretty(&dec.tree)?;
        std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    let mut v = solution_json(&inst, &dec.solution);
    v["width_limit"] = json!(to_f64(&params.k()));
    v["splits"] = json!(dec.splits);
    v["heavy_links"] = json!(dec.heavy_links);
    v["subsolver_calls"] = json!(dec.subsolver_calls);
    v["depth"] = json!(depth(&dec.tree));
    print(&v);
    Ok(())
}

fn depth(t: &SplitNode) -> usize {
    1 + t.children.iter().map(depth).max().unwrap_or(0)
}

fn verify_bounds(b: f64, grid: usize, refine: usize, as_json: bool) -> Result<()> {
    let p = BoundParams { b, grid, refine, ..BoundParams::default() };
    let cond = verify_b_condition(&p).map_err(input)?;
    let fin = solve_final_optimization(&p).map_err(input)?;
    let simple = solve_simple_optimization();
    let conv = min_second_difference(40);
    let gf = min_g_minus_f(60);
    let checks = [
        ("b-condition", cond.status == Certification::Certified),
        ("final <= 1.40", fin.value <= 1.40),
        ("simple < 1.459", simple.value < 1.459),
        ("g convex", conv >= -1e-9),
        ("g >= f", gf >= -1e-9),
    ];
    let ok = checks.iter().all(|c| c.1);
    if as_json {
        print(&json!({
            "pass": ok,
            "b_condition": cond,
            "final": fin,
            "simple": simple,
            "min_second_difference": conv,
            "min_g_minus_f": gf,
        }));
    } else {
        println!("{:<16} {:<6} detail", "check", "result");
        let detail = [
            format!("{:?}, min lower bound {:.3e}, min value {:.6} at {:?}", cond.status, cond.min_lower_bound, cond.min_value, cond.argmin),
            format!("{:.6} at alpha {:.4}", fin.value, fin.alpha),
            format!("{:.7} at alpha {:.4}, y {:.4}", simple.value, simple.alpha, simple.y),
            format!("min second difference {conv:.3e}"),
            format!("min g - f {gf:.3e}"),
        ];
        for ((name, pass), d) in checks.iter().zip(detail) {
            println!("{:<16} {:<6} {d}", name, if *pass { "PASS" } else { "FAIL" });
        }
        println!("cells {}, refined {}", cond.cells, cond.refined);
    }
    if !ok {
        return Err(Status::Certification("bound certification failed".into()).into());
    }
    Ok(())
}

fn gen_cmd(spec: GenSpec, dir: Option<&Path>, count: u64) -> Result<()> {
    spec.validate().map_err(input)?;
    match dir {
        None => {
            print!("{}", generate_instance(&spec)?.to_text());
        }
        Some(d) => {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
            for k in 0..count {
                let s = GenSpec { seed: spec.seed + k, ..spec.clone() };
                let path = d.join(format!("inst_{}.cac", s.seed));
                std::fs::write(&path, generate_instance(&s)?.to_text()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn bench_cmd(dir: &Path, a: &ApproxArgs, csv: Option<&Path>, json_out: Option<&Path>, exact_max_links: usize) -> Result<()> {
    let cfg = BenchConfig { approx: a.config(), exact_max_links, ..BenchConfig::default() };
    let report = run_bench(dir, &cfg).map_err(input)?;
    if let Some(p) = csv {
        std::fs::write(p, report.to_csv()?).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = json_out {
        std::fs::write(p, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", p.display()))?;
    }
    println!("{:<24} {:>4} {:>4} {:>5} {:>8} {:>6} {:>6} {:>6} {:>7}", "name", "n", "|T|", "|L|", "lp", "exact", "approx", "ratio", "ms");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    for r in &report.rows {
        if let Some(e) = &r.error {
            println!("{:<24} error: {e}", r.name);
            continue;
        }
        println!(
            "{:<24} {:>4} {:>4} {:>5} {:>8} {:>6} {:>6} {:>6} {:>7.1}",
            r.name,
            r.n,
            r.terminals,
            r.links,
            opt(r.lp_value),
            opt(r.exact),
            opt(r.approx),
            opt(r.ratio),
            r.wall_ms
        );
    }
    println!("instances {}, failures {}, mean ratio {}", report.rows.len(), report.failures(), opt(report.mean_ratio()));
    if let Some((a1, plain)) = report.algorithm1_vs_plain() {
        println!("mean Algorithm 1 cost {a1:.3}, mean plain bundle cost {plain:.3}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(s.parse().map_err(|_| input(format!("{THREADS_ENV}=`{s}` is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| anyhow!(e))?;
    }
    match cli.cmd {
        Cmd::Validate { file } => validate(&file),
        Cmd::SolveExact { file, budget } => solve_exact_cmd(&file, budget),
        Cmd::SolveApprox { file, approx } => solve_approx_cmd(&file, &approx),
        Cmd::LpBound { file, json } => lp_bound(&file, json),
        Cmd::HeavyCover { file, x, eps } => heavy_cover_cmd(&file, &x, &eps),
        Cmd::Decompose { file, approx, dump_tree } => decompose_cmd(&file, &approx, dump_tree.as_deref()),
        Cmd::VerifyBounds { b, grid, refine, json } => verify_bounds(b, grid, refine, json),
        Cmd::Gen { n, cycles, terminals, density, cost_lo, cost_hi, leaf_links, seed, dir, count } => {
            let spec = GenSpec { n, cycles, terminals, density, cost_lo, cost_hi, leaf_links, seed };
            gen_cmd(spec, dir.as_deref(), count)
        }
        Cmd::Bench { dir, approx, csv, json, exact_max_links } => {
            if !dir.is_dir() {
                bail!(Status::Input(format!("{} is not a directory", dir.display())));
            }
            bench_cmd(&dir, &approx, csv.as_deref(), json.as_deref(), exact_max_links)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Status>() {
                Some(Status::Input(_)) => 2,
                Some(Status::Infeasible(_)) => 1,
                Some(Status::Certification(_)) => 3,
                None => 2,
            };
            ExitCode::from(code)
        }
    }
}
