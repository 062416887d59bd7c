//! `rlpe`: explain why an RL agent's policy differs from an observer's expectation.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use rlpe::domains::{self, BUILTIN_NAMES, SUITE_NAMES};
use rlpe::report::{write_atomic, Report};
use rlpe::search::{Explanation, RlpeInstance, Strategy};
use rlpe::{Catalog, FactoredMdp, PartialPolicy, SolverConfig, SolverKind};

use config::RunConfig;

const WORKERS_ENV: &str = "RLPE_WORKERS";

#[derive(Parser)]
#[command(name = "rlpe", version, about = "Explain policy gaps with minimal MDP transform sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for an explanation on one instance.
    Explain(ExplainArgs),
    /// Run every strategy over the fixture suite and write one CSV row per run.
    Suite(SuiteArgs),
    /// Write a builtin fixture's domain, policy and catalog files.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Structured,
    Text,
}

#[derive(Args)]
struct ExplainArgs {
    /// Run-config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "builtin")]
    domain: Option<PathBuf>,
    #[arg(long, value_parser = builtin_name)]
    builtin: Option<String>,
    /// Anticipated policy file (defaults to the builtin's).
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Transform catalog file (defaults to the builtin's).
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds; checked between node evaluations.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    format: Format,
    /// Also write a one-row CSV in the suite's schema.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Include wall time in the structured report.
    #[arg(long)]
    wall_time: bool,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value = "vi")]
    solver: SolverKind,
    #[arg(long, default_value_t = rlpe::search::DEFAULT_DEPTH)]
    depth: usize,
    /// Defaults to standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, value_parser = builtin_name)]
    builtin: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn builtin_name(s: &str) -> std::result::Result<String, String> {
    if BUILTIN_NAMES.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("unknown builtin `{s}` (expected one of {})", BUILTIN_NAMES.join(", ")))
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    domain: &'a str,
    strategy: Strategy,
    seed: u64,
    wall_time: String,
    nodes_expanded: u64,
    solver_steps: u64,
    satisfaction_ratio: f64,
}

impl<'a> CsvRow<'a> {
    fn new(domain: &'a str, seed: u64, e: &Explanation) -> Self {
        CsvRow {
            domain,
            strategy: e.strategy,
            seed,
            wall_time: format!("{:.6}", e.stats.wall_time.as_secs_f64()),
            nodes_expanded: e.stats.nodes_expanded,
            solver_steps: e.stats.solver_steps,
            satisfaction_ratio: e.report.ratio,
        }
    }
}

fn write_csv(rows: &[CsvRow], path: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let text = String::from_utf8(w.into_inner()?)?;
    match path {
        Some(p) => write_atomic(p, &text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn workers() -> usize {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(1).max(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Explain(args) => explain(args),
        Command::Suite(args) => suite(args).map(|()| ExitCode::SUCCESS),
        Command::Export(args) => export(args).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}

fn explain(args: ExplainArgs) -> Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if args.domain.is_some() {
        cfg.builtin = None;
        cfg.domain = args.domain;
    }
    if args.builtin.is_some() {
        cfg.domain = None;
        cfg.builtin = args.builtin;
    }
    cfg.policy = args.policy.or(cfg.policy);
    cfg.catalog = args.catalog.or(cfg.catalog);
    cfg.strategy = args.strategy.unwrap_or(cfg.strategy);
    cfg.depth = args.depth.unwrap_or(cfg.depth);
    if let Some(kind) = args.solver {
        cfg.solver.kind = kind;
    }
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.timeout = args.timeout.or(cfg.timeout);

    let (name, inst) = instance(&cfg)?;
    let e = inst.solve(cfg.strategy)?;
    let report = Report::new(&e, &inst.model, args.wall_time);
    let text = report.to_text();
    print!("{text}");
    if let Some(out) = &args.out {
        let body = match args.format {
            Format::Structured => report.to_json(),
            Format::Text => text,
        };
        write_atomic(out, &body).with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(csv) = &args.csv {
        write_csv(&[CsvRow::new(&name, cfg.seed, &e)], Some(csv))?;
    }
    Ok(if e.satisfied() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

/// Resolves the model, anticipated policy and catalog named by `cfg`.
fn instance(cfg: &RunConfig) -> Result<(String, RlpeInstance)> {
    let fixture = match &cfg.builtin {
        Some(name) => Some(domains::fixture(name).with_context(|| format!("unknown builtin `{name}`"))?),
        None => None,
    };
    let model = match (&cfg.domain, &fixture) {
        (Some(p), _) => FactoredMdp::load(p).with_context(|| format!("domain file {}", p.display()))?,
        (None, Some(f)) => f.model.clone(),
        (None, None) => bail!("one of --domain or --builtin is required"),
    };
    let anticipated = match (&cfg.policy, &fixture) {
        (Some(p), _) => PartialPolicy::load(p, &model).with_context(|| format!("policy file {}", p.display()))?,
        (None, Some(f)) => f.anticipated.clone(),
        (None, None) => bail!("--policy is required with --domain"),
    };
    let catalog = match (&cfg.catalog, &fixture) {
        (Some(p), _) => Catalog::load(p).with_context(|| format!("catalog file {}", p.display()))?,
        (None, Some(f)) => f.catalog.clone(),
        (None, None) => bail!("--catalog is required with --domain"),
    };
    let mut inst = RlpeInstance::new(model, anticipated, catalog.schemas)
        .with_actor(SolverConfig { seed: cfg.seed, ..cfg.solver.clone() })
        .with_depth(cfg.depth)
        .with_workers(workers());
    if let Some(t) = cfg.timeout {
        if !(t >= 0.0 && t.is_finite()) {
            bail!("timeout must be a non-negative number of seconds");
        }
        inst = inst.with_timeout(Duration::from_secs_f64(t));
    }
    inst.validate()?;
    Ok((inst.model.name().to_string(), inst))
}

fn suite(args: SuiteArgs) -> Result<()> {
    let runs: Vec<(&str, Strategy, u64)> = SUITE_NAMES
        .iter()
        .flat_map(|d| Strategy::ALL.into_iter().flat_map(move |s| (0..args.seeds).map(move |seed| (*d, s, seed))))
        .collect();
    let actor = SolverConfig::new(args.solver);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers()).build()?;
    let results: Vec<Result<Explanation>> = pool.install(|| {
        runs.par_iter()
            .map(|&(d, s, seed)| {
                let f = domains::fixture(d).expect("suite names are builtins");
                let inst =
                    RlpeInstance::from_fixture(f).with_actor(actor.clone().with_seed(seed)).with_depth(args.depth);
                Ok(inst.solve(s)?)
            })
            .collect()
    });
    let mut explanations = Vec::new();
    for r in results {
        explanations.push(r?);
    }
    let rows: Vec<CsvRow> = runs.iter().zip(&explanations).map(|(&(d, _, seed), e)| CsvRow::new(d, seed, e)).collect();
    write_csv(&rows, args.csv.as_deref())
}

fn export(args: ExportArgs) -> Result<()> {
    let f = domains::fixture(&args.builtin).expect("validated by clap");
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let name = &args.builtin;
    let path = |suffix: &str| args.out_dir.join(format!("{name}.{suffix}.json"));
    write_atomic(&path("domain"), &format!("{}\n", f.model.to_json()))?;
    write_atomic(&path("policy"), &format!("{}\n", f.anticipated.to_json(&f.model)))?;
    write_atomic(&path("catalog"), &format!("{}\n", f.catalog.to_json()))?;
    let cfg = RunConfig {
        domain: Some(PathBuf::from(format!("{name}.domain.json"))),
        policy: Some(PathBuf::from(format!("{name}.policy.json"))),
        catalog: Some(PathBuf::from(format!("{name}.catalog.json"))),
        ..RunConfig::default()
    };
    write_atomic(&path("run"), &cfg.to_json())?;
    Ok(())
}
