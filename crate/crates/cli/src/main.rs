use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jobshop::bench::{
    bundled_instances, bundled_optima, load_optima_registry, run_suite, BenchConfig, Heuristic, OptimaSource,
};
use jobshop::dd::{self, a_star_search, dd_branch_and_bound, full_expansion, node_stats_csv, AStarHeuristic, Model};
use jobshop::export::{export_disjunctive_lp, export_start_vector};
use jobshop::{lns1_refine, DisjunctiveGraph, Instance, Lns1Config, Schedule};

#[derive(Parser)]
#[command(name = "jobshop", version, about = "Job-shop heuristics, exact search and model export")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded random instances in JSPLIB format.
    Gen(GenArgs),
    /// Run one heuristic on one instance and print the schedule.
    Solve(SolveArgs),
    /// Run heuristics over an instance set and report overages.
    Bench(BenchArgs),
    /// Write the disjunctive MIP as an LP file, plus a start vector.
    Export(ExportArgs),
    /// Solve a small instance exactly.
    Exact(ExactArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    jobs: usize,
    #[arg(long, default_value_t = 10)]
    machines: usize,
    /// First seed; instance `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    min_duration: i64,
    #[arg(long, default_value_t = 99)]
    max_duration: i64,
    /// Output directory; instances go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct HeuristicArgs {
    /// spt, mwr, mor, sb, sb-re, dd, or dd:<width>[:m1|m2]. Comma separated
    /// lists are accepted by `bench`.
    #[arg(long, default_value = "dd")]
    rule: String,
    /// Width used by a bare `dd`.
    #[arg(long, default_value_t = 200)]
    width: usize,
    /// State model used by a bare `dd`.
    #[arg(long, default_value = "m2")]
    model: Model,
    /// Refine with critical-arc reversal.
    #[arg(long)]
    refine: bool,
    /// Graph evaluations allowed per refinement.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
}

impl HeuristicArgs {
    fn heuristics(&self) -> Result<Vec<Heuristic>> {
        self.rule
            .split(',')
            .map(|s| {
                let s = s.trim();
                let spec = if s.eq_ignore_ascii_case("dd") {
                    format!("dd:{}:{}", self.width, self.model)
                } else {
                    s.to_string()
                };
                spec.parse::<Heuristic>().map_err(anyhow::Error::msg)
            })
            .collect()
    }

    fn lns1(&self) -> Lns1Config {
        Lns1Config { budget: self.budget, ..Lns1Config::default() }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    heuristic: HeuristicArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files; see also --jsplib and --generate.
    instances: Vec<PathBuf>,
    /// Include the bundled 10x10 benchmark instances.
    #[arg(long)]
    jsplib: bool,
    /// Generate `--count` random instances of this size, e.g. 10x10.
    #[arg(long)]
    generate: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: u64,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    /// Registry file, `bundled`, `exact` or `none`. Defaults to `bundled`
    /// with --jsplib and `none` otherwise.
    #[arg(long)]
    optima: Option<String>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    /// Output prefix: writes `<prefix>.lp` and, with --start, `<prefix>.start`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a start vector from the heuristic chosen by --rule.
    #[arg(long)]
    start: bool,
    #[command(flatten)]
    heuristic: HeuristicArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Full,
    Bnb,
    Astar,
}

#[derive(Args)]
struct ExactArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "bnb")]
    method: Method,
    #[arg(long, default_value = "m2")]
    model: Model,
    /// Diagram width for branch and bound.
    #[arg(long, default_value_t = 16)]
    width: usize,
    /// Print per-layer node statistics (full expansion only).
    #[arg(long)]
    stats: bool,
}

fn load(path: &Path) -> Result<Instance> {
    Instance::from_file(path).with_context(|| format!("reading {}", path.display()))
}

/// Best schedule of the heuristic, refined when requested.
fn solve_one(inst: &Instance, args: &HeuristicArgs) -> Result<Schedule> {
    let hs = args.heuristics()?;
    let [h] = hs.as_slice() else { bail!("give exactly one rule") };
    let schedules = h.run(inst)?;
    let mut best = schedules.iter().min_by_key(|s| s.makespan()).context("no schedule produced")?.clone();
    if args.refine {
        for s in &schedules {
            let g = DisjunctiveGraph::build(inst, &s.machine_orders(inst))?;
            let out = lns1_refine(&g, args.lns1())?;
            if out.makespan < best.makespan() {
                best = out.graph.to_schedule()?;
            }
        }
    }
    Ok(best)
}

fn gen(args: GenArgs) -> Result<()> {
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    for seed in args.seed..args.seed + args.count {
        let inst = Instance::random(args.jobs, args.machines, seed, args.min_duration, args.max_duration)?;
        match &args.out {
            Some(dir) => {
                let path = dir.join(format!("{}.txt", inst.name()));
                fs::write(&path, inst.to_jsplib()).with_context(|| format!("writing {}", path.display()))?;
            }
            None => print!("{}", inst.to_jsplib()),
        }
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = load(&args.instance)?;
    let clock = Instant::now();
    let s = solve_one(&inst, &args.heuristic)?;
    let secs = clock.elapsed().as_secs_f64();
    println!("instance {}", inst.name());
    println!("makespan {}", s.makespan());
    println!("time_s {secs:.3}");
    for (m, ops) in s.machine_orders(&inst).iter().enumerate() {
        let cells: Vec<String> = ops.iter().map(|&op| format!("{op}@{}", s.start(op))).collect();
        println!("m{m}: {}", cells.join(" "));
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut instances: Vec<Instance> = args.instances.iter().map(|p| load(p)).collect::<Result<_>>()?;
    if args.jsplib {
        instances.extend(bundled_instances());
    }
    if let Some(size) = &args.generate {
        let (n, m) = size
            .split_once(['x', 'X'])
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
            .with_context(|| format!("size {size:?} is not of the form NxM"))?;
        instances.extend(jobshop::bench::generate_instances(n, m, args.seed..args.seed + args.count)?);
    }
    if instances.is_empty() {
        bail!("no instances: pass files, --jsplib or --generate");
    }
    let optima = match args.optima.as_deref() {
        None if args.jsplib => OptimaSource::Registry(bundled_optima()),
        None | Some("none") => OptimaSource::None,
        Some("bundled") => OptimaSource::Registry(bundled_optima()),
        Some("exact") => OptimaSource::Exact,
        Some(path) => OptimaSource::Registry(load_optima_registry(path)?),
    };
    let report = run_suite(&BenchConfig {
        instances,
        heuristics: args.heuristic.heuristics()?,
        refine: args.heuristic.refine,
        lns1: args.heuristic.lns1(),
        optima,
        workers: args.workers,
    })?;
    let text = match args.format {
        Format::Csv => report.to_csv(),
        Format::Table => report.to_table(),
    };
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    let failures: Vec<_> = report.rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failures {
        eprintln!("{} {}: {}", r.instance, r.heuristic, r.error.as_deref().unwrap_or_default());
    }
    if !failures.is_empty() {
        bail!("{} of {} runs failed", failures.len(), report.rows.len());
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let inst = load(&args.instance)?;
    let lp = export_disjunctive_lp(&inst);
    let start = if args.start {
        Some(export_start_vector(&inst, &solve_one(&inst, &args.heuristic)?)?)
    } else {
        None
    };
    match &args.out {
        Some(prefix) => {
            fs::write(prefix.with_extension("lp"), lp)?;
            if let Some(s) = start {
                fs::write(prefix.with_extension("start"), s)?;
            }
        }
        None => {
            print!("{lp}");
            if let Some(s) = start {
                print!("{s}");
            }
        }
    }
    Ok(())
}

fn exact(args: ExactArgs) -> Result<()> {
    let inst = load(&args.instance)?;
    let clock = Instant::now();
    match args.method {
        Method::Full => {
            let out = full_expansion(&inst, args.model, dd::FULL_EXPANSION_CAP)?;
            println!("optimum {}", out.optimum);
            println!("valid_nodes {}", out.valid_nodes);
            println!("duplicates_folded {}", out.duplicates_folded);
            if args.stats {
                print!("{}", node_stats_csv(inst.name(), args.model, &out.stats));
            }
        }
        Method::Bnb => {
            let out = dd_branch_and_bound(&inst, args.width)?;
            println!("optimum {}", out.optimum);
            println!("nodes {}", out.nodes);
        }
        Method::Astar => {
            let out = a_star_search(&inst, AStarHeuristic::TrailerMax, dd::A_STAR_CAP)?;
            println!("optimum {}", out.optimum);
            println!("expansions {}", out.expansions);
        }
    }
    println!("time_s {:.3}", clock.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Export(a) => export(a),
        Command::Exact(a) => exact(a),
    }
}
