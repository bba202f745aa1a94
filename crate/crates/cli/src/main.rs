//! Command-line front end: parse configuration, run experiments, emit
//! result files and plot-ready data.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mtcsim_core::config::{AllocationMode, SimConfig};
use mtcsim_core::engine::{drop_roster, run_campaign};
use mtcsim_core::metrics::{MetricsReport, PopulationStats};

#[derive(Parser)]
#[command(
    name = "mtcsim",
    about = "System-level simulator for mixed H2H/M2M traffic in LTE-Advanced cellular networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write result files
    Run(RunArgs),
    /// Emit (rate, utility) sweep tables for the configured populations
    UtilitySweep(UtilitySweepArgs),
    /// Emit the node roster of one drop as flat records
    Layout(LayoutArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Experiment {
    /// Campaigns over lambda in {0, 0.1, ..., 1.0}
    LambdaSweep,
    /// Paired campaigns with M2M enabled and disabled
    WithWithoutM2m,
    /// Paired campaigns under graph-based and full-reuse pair allocation
    GraphVsReuse,
    /// Single campaign with the configuration as given
    Custom,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::LambdaSweep => "lambda_sweep",
            Experiment::WithWithoutM2m => "with_without_m2m",
            Experiment::GraphVsReuse => "graph_vs_reuse",
            Experiment::Custom => "custom",
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment to run
    #[arg(long, value_enum, default_value = "custom")]
    experiment: Experiment,
    /// Output directory (created; must not already contain files)
    #[arg(long)]
    output: PathBuf,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel drop workers (defaults to the available cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Print per-campaign progress to stderr (-v) and per-variant
    /// percentile detail (-vv)
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Configuration overrides, e.g. scheduler.lambda=0.5 or lambda=0.5
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct UtilitySweepArgs {
    /// Configuration file (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Lowest rate of the sweep [bit/s]
    #[arg(long, default_value_t = 1e3)]
    min_rate: f64,
    /// Highest rate of the sweep [bit/s]
    #[arg(long, default_value_t = 1e8)]
    max_rate: f64,
    /// Number of log-spaced sweep points
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Configuration overrides, e.g. utility.ue.r_max=2e7
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct LayoutArgs {
    /// Configuration file (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Drop index to place
    #[arg(long, default_value_t = 0)]
    drop: u64,
    /// Output CSV file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Configuration overrides, e.g. layout.num_sites=7
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::UtilitySweep(args) => cmd_utility_sweep(args),
        Command::Layout(args) => cmd_layout(args),
    }
}

/// Parses a TOML value from the raw override text; bare words fall back
/// to strings so enum values need no quoting on the command line.
fn parse_override_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies one `key=value` override to the configuration tree. Keys are
/// dotted paths; a bare key is resolved against the top level first and
/// then searched for in the sections, requiring a unique match.
fn apply_override(tree: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .with_context(|| format!("override '{spec}' is not of the form key=value"))?;
    let value = parse_override_value(raw);
    let mut path: Vec<String> = key.split('.').map(str::to_string).collect();
    if path.len() == 1 && !tree.contains_key(&path[0]) {
        let sections: Vec<String> = tree
            .iter()
            .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(&path[0])))
            .map(|(k, _)| k.clone())
            .collect();
        match sections.as_slice() {
            [section] => path.insert(0, section.clone()),
            [] => bail!("unknown configuration key '{key}'"),
            many => bail!(
                "ambiguous configuration key '{key}' (found in sections: {})",
                many.join(", ")
            ),
        }
    }
    let (last, parents) = path.split_last().expect("split_once yields a key");
    let mut table = &mut *tree;
    for part in parents {
        table = table
            .get_mut(part)
            .and_then(|v| v.as_table_mut())
            .with_context(|| format!("unknown configuration section '{part}' in '{key}'"))?;
    }
    if !table.contains_key(last) && last != "num_colors" {
        bail!("unknown configuration key '{key}'");
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Loads the configuration file (defaults when absent), applies
/// overrides and the seed flag, and validates the result.
fn load_config(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<SimConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p)
            .with_context(|| format!("cannot read configuration file {}", p.display()))?,
        None => String::new(),
    };
    let base: SimConfig = toml::from_str(&text).context("configuration parse error")?;
    let mut tree = toml::Table::try_from(&base).context("configuration serialization")?;
    for spec in overrides {
        apply_override(&mut tree, spec)?;
    }
    let mut cfg: SimConfig = tree.try_into().context("configuration override error")?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Builds the (label, config) campaigns of an experiment.
fn experiment_variants(experiment: Experiment, base: &SimConfig) -> Vec<(String, SimConfig)> {
    match experiment {
        Experiment::LambdaSweep => (0..=10)
            .map(|k| {
                let mut cfg = base.clone();
                cfg.scheduler.lambda = k as f64 / 10.0;
                (format!("lambda_{:.1}", cfg.scheduler.lambda), cfg)
            })
            .collect(),
        Experiment::WithWithoutM2m => {
            let mut with = base.clone();
            with.run.m2m_enabled = true;
            let mut without = base.clone();
            without.run.m2m_enabled = false;
            vec![("with_m2m".into(), with), ("without_m2m".into(), without)]
        }
        Experiment::GraphVsReuse => {
            let mut graph = base.clone();
            graph.run.allocation_mode = AllocationMode::GraphBased;
            let mut reuse = base.clone();
            reuse.run.allocation_mode = AllocationMode::FullReuse;
            vec![("graph_based".into(), graph), ("full_reuse".into(), reuse)]
        }
        Experiment::Custom => vec![("run".into(), base.clone())],
    }
}

fn push_population(out: &mut String, label: &str, name: &str, stats: Option<&PopulationStats>) {
    if let Some(s) = stats {
        out.push_str(&format!("{label}.{name}.p10 = {}\n", s.p10));
        out.push_str(&format!("{label}.{name}.p50 = {}\n", s.p50));
        out.push_str(&format!("{label}.{name}.p90 = {}\n", s.p90));
        out.push_str(&format!("{label}.{name}.samples = {}\n", s.samples.len()));
    }
}

fn summarize(
    experiment: Experiment,
    cfg: &SimConfig,
    results: &[(String, MetricsReport)],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("experiment = {}\n", experiment.name()));
    out.push_str(&format!("seed = {}\n", cfg.run.seed));
    out.push_str(&format!("num_drops = {}\n", cfg.run.num_drops));
    out.push_str(&format!("variants = {}\n", results.len()));
    for (label, report) in results {
        out.push_str(&format!(
            "{label}.aggregate_cell_utility = {}\n",
            report.aggregate_cell_utility
        ));
        push_population(&mut out, label, "h2h", report.h2h.as_ref());
        push_population(&mut out, label, "m2m_direct", report.m2m_direct.as_ref());
        push_population(&mut out, label, "pairs", report.pairs.as_ref());
    }
    match experiment {
        Experiment::WithWithoutM2m => {
            let with = results[0].1.aggregate_cell_utility;
            let without = results[1].1.aggregate_cell_utility;
            out.push_str(&format!("aggregate_difference = {}\n", with - without));
            out.push_str(&format!(
                "aggregate_difference_sign = {}\n",
                if with > without { "positive" } else { "nonpositive" }
            ));
        }
        Experiment::GraphVsReuse => {
            let p10 = |r: &MetricsReport| r.pairs.as_ref().map_or(f64::NAN, |s| s.p10);
            let (graph, reuse) = (p10(&results[0].1), p10(&results[1].1));
            out.push_str(&format!(
                "pairs_p10_winner = {}\n",
                if graph > reuse {
                    "graph_based"
                } else if reuse > graph {
                    "full_reuse"
                } else {
                    "tie"
                }
            ));
        }
        _ => {}
    }
    out
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), &args.overrides, args.seed)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    if args.output.exists() && fs::read_dir(&args.output)?.next().is_some() {
        bail!(
            "output directory {} already contains files",
            args.output.display()
        );
    }
    fs::create_dir_all(&args.output)
        .with_context(|| format!("cannot create output directory {}", args.output.display()))?;
    let outcome = run_to_dir(&args, &cfg, workers);
    if outcome.is_err() {
        // a failed run leaves no partial outputs behind
        let _ = fs::remove_dir_all(&args.output);
    }
    outcome
}

fn run_to_dir(args: &RunArgs, cfg: &SimConfig, workers: usize) -> Result<()> {
    let echo = toml::to_string_pretty(cfg).context("configuration echo")?;
    fs::write(args.output.join("config.toml"), echo)?;

    let mut results = Vec::new();
    for (label, variant) in experiment_variants(args.experiment, cfg) {
        if args.verbose > 0 {
            eprintln!("running {label} ({} drops, {workers} workers)", variant.run.num_drops);
        }
        let report = run_campaign(&variant, workers)
            .with_context(|| format!("campaign '{label}' failed"))?;
        fs::write(
            args.output.join(format!("{label}_samples.csv")),
            report.samples_csv(),
        )?;
        fs::write(args.output.join(format!("{label}_cdf.csv")), report.cdf_csv()?)?;
        if args.verbose > 1 {
            for line in summarize(Experiment::Custom, &variant, &[(label.clone(), report.clone())])
                .lines()
                .skip(4)
            {
                eprintln!("  {line}");
            }
        }
        results.push((label, report));
    }
    fs::write(
        args.output.join("summary.txt"),
        summarize(args.experiment, cfg, &results),
    )?;
    Ok(())
}

fn write_or_print(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_utility_sweep(args: UtilitySweepArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), &args.overrides, None)?;
    if args.points < 2 || args.min_rate <= 0.0 || args.max_rate <= args.min_rate {
        bail!("sweep requires points >= 2 and 0 < min_rate < max_rate");
    }
    let mut out = String::from("population,rate,utility\n");
    let ratio = args.max_rate / args.min_rate;
    for (name, spec) in [
        ("ue", &cfg.utility.ue),
        ("mtcd", &cfg.utility.mtcd),
        ("pair", &cfg.utility.pair),
    ] {
        for k in 0..args.points {
            let rate = args.min_rate * ratio.powf(k as f64 / (args.points - 1) as f64);
            let u = spec.eval(rate)?;
            out.push_str(&format!("{name},{rate},{u}\n"));
        }
    }
    write_or_print(args.output.as_deref(), &out)
}

fn cmd_layout(args: LayoutArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), &args.overrides, args.seed)?;
    let roster = drop_roster(&cfg, args.drop)?;
    write_or_print(args.output.as_deref(), &roster)
}
