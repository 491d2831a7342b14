//! Heuristic portfolios over instance sets, with optional critical-arc
//! refinement and overages against known or computed optima.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::dd::{self, compile_restricted, Model, Rank, RestrictedConfig};
use crate::dispatch::{dispatch, shifting_bottleneck, Rule};
use crate::error::{Error, Result};
use crate::graph::{lns1_refine, DisjunctiveGraph, Lns1Config};
use crate::instance::{schedule_from_order, validate_schedule, Instance, Schedule, Time};

/// Instances with more operations than this are not solved exactly.
pub const EXACT_OPS_LIMIT: usize = 14;

/// Terminal solutions handed to refinement by restricted diagrams.
pub const DEFAULT_COLLECT: usize = 32;

/// Percentage excess of `makespan` over `optimum`, rounded to 0.1.
pub fn compute_overage(makespan: Time, optimum: Time) -> Result<f64> {
    if optimum < 1 {
        return Err(Error::InvalidArgument(format!("optimum {optimum} must be positive")));
    }
    if makespan < optimum {
        return Err(Error::BelowOptimum { makespan, optimum });
    }
    let pct = 100.0 * (makespan - optimum) as f64 / optimum as f64;
    Ok((pct * 10.0).round() / 10.0)
}

/// Parses `name value` lines; blank lines and `#` comments are skipped.
pub fn parse_optima_registry(text: &str) -> Result<BTreeMap<String, Time>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: i + 1, message };
        let mut it = line.split_whitespace();
        let (Some(name), Some(value), None) = (it.next(), it.next(), it.next()) else {
            return Err(err(format!("expected \"name optimum\", got {line:?}")));
        };
        let value: Time = value.parse().map_err(|_| err(format!("invalid optimum {value:?}")))?;
        if value < 1 {
            return Err(err(format!("optimum {value} must be positive")));
        }
        map.insert(name.to_string(), value);
    }
    Ok(map)
}

pub fn load_optima_registry(path: impl AsRef<Path>) -> Result<BTreeMap<String, Time>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_optima_registry(&text)
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../data/jsplib/", $name, ".txt")))),*]
    };
}

const JSPLIB: [(&str, &str); 18] = bundled!(
    "abz5", "abz6", "ft10", "la16", "la17", "la18", "la19", "la20", "orb01", "orb02", "orb03",
    "orb04", "orb05", "orb06", "orb07", "orb08", "orb09", "orb10",
);

/// The eighteen classic 10x10 benchmark instances.
pub fn bundled_instances() -> Vec<Instance> {
    JSPLIB
        .iter()
        .map(|(name, text)| {
            let mut inst = Instance::parse(text).expect("bundled instances parse");
            if inst.name().is_empty() {
                inst.set_name(*name);
            }
            inst
        })
        .collect()
}

/// Proven optima of [`bundled_instances`].
pub fn bundled_optima() -> BTreeMap<String, Time> {
    parse_optima_registry(include_str!("../data/jsplib/optima.txt")).expect("bundled registry parses")
}

/// Seeded random instances with durations in `1..=99`.
pub fn generate_instances(n_jobs: usize, n_machines: usize, seeds: impl IntoIterator<Item = u64>) -> Result<Vec<Instance>> {
    seeds
        .into_iter()
        .map(|s| Instance::random(n_jobs, n_machines, s, 1, 99))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    Rule(Rule),
    ShiftingBottleneck { reoptimize: bool },
    Restricted { width: usize, model: Model, rank: Rank, collect: usize },
}

impl Heuristic {
    pub fn restricted(width: usize) -> Self {
        Heuristic::Restricted {
            width,
            model: Model::M2,
            rank: Rank::Cost,
            collect: DEFAULT_COLLECT,
        }
    }

    /// Every schedule this heuristic produces, best first.
    pub fn run(&self, inst: &Instance) -> Result<Vec<Schedule>> {
        Ok(match *self {
            Heuristic::Rule(rule) => vec![dispatch(inst, rule)],
            Heuristic::ShiftingBottleneck { reoptimize } => vec![shifting_bottleneck(inst, reoptimize)],
            Heuristic::Restricted { width, model, rank, collect } => {
                let out = compile_restricted(inst, &RestrictedConfig { model, width, rank, collect })?;
                out.solutions
                    .iter()
                    .map(|s| {
                        let idx: Vec<usize> = s.order.as_slice().iter().map(|&op| inst.index(op)).collect();
                        schedule_from_order(inst, &idx)
                    })
                    .collect::<Result<_>>()?
            }
        })
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Heuristic::Rule(r) => write!(f, "{r}"),
            Heuristic::ShiftingBottleneck { reoptimize: false } => f.write_str("SB"),
            Heuristic::ShiftingBottleneck { reoptimize: true } => f.write_str("SB-re"),
            Heuristic::Restricted { width, model, rank, .. } => {
                write!(f, "DD-W{width}-{model}")?;
                if *rank == Rank::CostPlusTrailer {
                    f.write_str("-lb")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Heuristic {
    type Err = String;

    /// Accepts `spt`, `mwr`, `mor`, `sb`, `sb-re` and `dd:<width>[:m1|m2][:lb]`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "sb" => return Ok(Heuristic::ShiftingBottleneck { reoptimize: false }),
            "sb-re" => return Ok(Heuristic::ShiftingBottleneck { reoptimize: true }),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix("dd:") {
            let mut parts = rest.split(':');
            let width = parts
                .next()
                .and_then(|w| w.parse::<usize>().ok())
                .filter(|&w| w > 0)
                .ok_or_else(|| format!("invalid width in {s:?}"))?;
            let Heuristic::Restricted { mut model, mut rank, collect, .. } = Heuristic::restricted(width) else {
                unreachable!()
            };
            for p in parts {
                match p {
                    "lb" => rank = Rank::CostPlusTrailer,
                    other => model = other.parse()?,
                }
            }
            return Ok(Heuristic::Restricted { width, model, rank, collect });
        }
        lower.parse::<Rule>().map(Heuristic::Rule)
    }
}

#[derive(Clone, Debug, Default)]
pub enum OptimaSource {
    Registry(BTreeMap<String, Time>),
    /// Solve instances of at most [`EXACT_OPS_LIMIT`] operations exactly.
    Exact,
    #[default]
    None,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub instances: Vec<Instance>,
    pub heuristics: Vec<Heuristic>,
    pub refine: bool,
    pub lns1: Lns1Config,
    pub optima: OptimaSource,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            instances: Vec::new(),
            heuristics: Vec::new(),
            refine: false,
            lns1: Lns1Config::default(),
            optima: OptimaSource::None,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub heuristic: String,
    pub makespan: Option<Time>,
    pub refined: Option<Time>,
    pub optimum: Option<Time>,
    pub overage: Option<f64>,
    pub refined_overage: Option<f64>,
    /// Seconds spent by the heuristic itself, refinement excluded.
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Per-heuristic averages over rows without errors.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub heuristic: String,
    pub runs: usize,
    pub mean_seconds: f64,
    pub mean_overage: Option<f64>,
    pub mean_refined_overage: Option<f64>,
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let xs: Option<Vec<f64>> = xs.collect();
    let xs = xs?;
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl BenchReport {
    pub fn summary(&self) -> Vec<Summary> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.heuristic.as_str()) {
                names.push(&r.heuristic);
            }
        }
        names
            .into_iter()
            .map(|h| {
                let ok: Vec<&BenchRow> = self.rows.iter().filter(|r| r.heuristic == h && r.error.is_none()).collect();
                Summary {
                    heuristic: h.to_string(),
                    runs: ok.len(),
                    mean_seconds: ok.iter().map(|r| r.seconds).sum::<f64>() / ok.len().max(1) as f64,
                    mean_overage: mean(ok.iter().map(|r| r.overage)),
                    mean_refined_overage: mean(ok.iter().map(|r| r.refined_overage)),
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "instance",
            "heuristic",
            "makespan",
            "makespan_after_lns1",
            "optimum",
            "overage_pct",
            "overage_after_lns1_pct",
            "time_s",
            "error",
        ])
        .expect("writing to memory");
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.heuristic.clone(),
                opt(r.makespan),
                opt(r.refined),
                opt(r.optimum),
                pct(r.overage),
                pct(r.refined_overage),
                format!("{:.4}", r.seconds),
                r.error.clone().unwrap_or_default(),
            ])
            .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }

    /// Per-run rows followed by per-heuristic averages, space aligned.
    pub fn to_table(&self) -> String {
        let head = ["instance", "heuristic", "makespan", "after LNS1", "optimum", "overage", "after LNS1", "time (s)"];
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| match &r.error {
                Some(e) => vec![r.instance.clone(), r.heuristic.clone(), format!("error: {e}")],
                None => vec![
                    r.instance.clone(),
                    r.heuristic.clone(),
                    opt(r.makespan),
                    opt(r.refined),
                    opt(r.optimum),
                    pct_sign(r.overage),
                    pct_sign(r.refined_overage),
                    format!("{:.3}", r.seconds),
                ],
            })
            .collect();
        let mut out = align(&head, &body);
        let sums = self.summary();
        let head = ["heuristic", "runs", "time (s)", "overage", "after LNS1"];
        let body: Vec<Vec<String>> = sums
            .iter()
            .map(|s| {
                vec![
                    s.heuristic.clone(),
                    s.runs.to_string(),
                    format!("{:.3}", s.mean_seconds),
                    pct_sign(s.mean_overage.map(|x| (x * 10.0).round() / 10.0)),
                    pct_sign(s.mean_refined_overage.map(|x| (x * 10.0).round() / 10.0)),
                ]
            })
            .collect();
        out.push('\n');
        out.push_str(&align(&head, &body));
        out
    }
}

fn opt(v: Option<Time>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.1}")).unwrap_or_default()
}

fn pct_sign(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.1}%")).unwrap_or_default()
}

fn align(head: &[&str], body: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = head.iter().map(|h| h.len()).collect();
    for row in body {
        // Error rows span the trailing columns and do not set widths.
        if row.len() == head.len() {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, c) in cells.enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let w = width.get(i).copied().unwrap_or(0);
            if i < 2 || i >= width.len() {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "{c:>w$}");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut head.iter().copied());
    for row in body {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

fn exact_optimum(inst: &Instance) -> Result<Time> {
    if inst.n_ops() > EXACT_OPS_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "exact optimum needs at most {EXACT_OPS_LIMIT} operations, {} has {}",
            inst.name(),
            inst.n_ops()
        )));
    }
    Ok(dd::full_expansion(inst, Model::M2, dd::FULL_EXPANSION_CAP)?.optimum)
}

fn refine(inst: &Instance, schedules: &[Schedule], cfg: Lns1Config) -> Result<Time> {
    let mut best = Time::MAX;
    for s in schedules {
        let graph = DisjunctiveGraph::build(inst, &s.machine_orders(inst))?;
        let out = lns1_refine(&graph, cfg)?;
        validate_schedule(inst, &out.graph.to_schedule()?).map_err(Error::Infeasible)?;
        best = best.min(out.makespan);
    }
    Ok(best)
}

fn run_one(inst: &Instance, h: &Heuristic, optimum: &Result<Option<Time>>, config: &BenchConfig) -> BenchRow {
    let mut row = BenchRow {
        instance: inst.name().to_string(),
        heuristic: h.to_string(),
        makespan: None,
        refined: None,
        optimum: None,
        overage: None,
        refined_overage: None,
        seconds: 0.0,
        error: None,
    };
    let result = (|| -> Result<()> {
        let optimum = optimum.clone()?;
        row.optimum = optimum;
        let clock = Instant::now();
        let schedules = h.run(inst)?;
        row.seconds = clock.elapsed().as_secs_f64();
        for s in &schedules {
            validate_schedule(inst, s).map_err(Error::Infeasible)?;
        }
        let best = schedules.iter().map(Schedule::makespan).min().expect("heuristics yield a schedule");
        row.makespan = Some(best);
        if config.refine {
            row.refined = Some(refine(inst, &schedules, config.lns1)?.min(best));
        }
        if let Some(o) = optimum {
            row.overage = Some(compute_overage(best, o)?);
            row.refined_overage = row.refined.map(|r| compute_overage(r, o)).transpose()?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Runs every heuristic on every instance. Instances are processed in
/// parallel; rows come back in (instance, heuristic) input order. A failing
/// row records its error and the suite continues.
pub fn run_suite(config: &BenchConfig) -> Result<BenchReport> {
    let work = || -> Vec<BenchRow> {
        config
            .instances
            .par_iter()
            .flat_map_iter(|inst| {
                let optimum = match &config.optima {
                    OptimaSource::None => Ok(None),
                    OptimaSource::Registry(map) => Ok(map.get(inst.name()).copied()),
                    OptimaSource::Exact => exact_optimum(inst).map(Some),
                };
                config
                    .heuristics
                    .iter()
                    .map(|h| run_one(inst, h, &optimum, config))
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let rows = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(BenchReport { rows })
}
