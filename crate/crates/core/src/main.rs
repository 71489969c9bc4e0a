use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Deserialize;

use dynants::classify::{Boundary, ClassifierKind, MedianRule};
use dynants::colony::Variant;
use dynants::engine::{self, RunConfig, RunResult};
use dynants::report::{self, Format};
use dynants::tsplib::{self, Instance};

#[derive(Parser)]
#[command(name = "dynants", version, about = "Ant colony TSP solver with statistical elite selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over one or more seeds and print its summary row
    Run(RunArgs),
    /// Run a grid of configurations and print the full report
    Sweep(SweepArgs),
    /// Rebuild summary rows from saved traces
    Report(ReportArgs),
    /// Five-number summaries of the per-iteration elite counts
    Quartiles(QuartileArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TSPLIB file, or the name of a bundled instance (bays29, att48, eil51, st70)
    #[arg(long)]
    instance: Option<String>,
    #[arg(long, default_value = "dea")]
    variant: String,
    /// mrts | mts | mets (dynamic variants only)
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Trail persistence
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    #[arg(long, default_value_t = 100.0)]
    q: f64,
    #[arg(long, default_value_t = 10.0)]
    qstar: f64,
    /// Colony size; defaults per instance
    #[arg(long)]
    ants: Option<usize>,
    #[arg(long, default_value_t = 5000)]
    iters: usize,
    /// Fixed elite count for the static EA/RA baselines (default: all ants)
    #[arg(long)]
    sigma: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    stop_at_optimum: bool,
    /// strict | inclusive
    #[arg(long)]
    boundary: Option<String>,
    /// lower | average
    #[arg(long)]
    median: Option<String>,
    /// Report file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Directory receiving one trace per run
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON grid file; when absent the run flags describe a single point
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory written by --trace
    #[arg(long)]
    traces: PathBuf,
    #[arg(long, default_value_t = report::DEFAULT_WINDOW)]
    window: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct QuartileArgs {
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

/// Sweep grid file. Omitted keys fall back to the command-line values.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Grid {
    instances: Option<Vec<String>>,
    variants: Option<Vec<String>>,
    classifiers: Option<Vec<String>>,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    rho: Option<Vec<f64>>,
    ants: Option<usize>,
    iters: Option<usize>,
    seeds: Option<usize>,
    seed_base: Option<u64>,
    q: Option<f64>,
    qstar: Option<f64>,
    stop_at_optimum: Option<bool>,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ArgumentConflict, msg).exit()
}

fn parse_or_usage<T: std::str::FromStr>(value: &str) -> T
where
    T::Err: std::fmt::Display,
{
    value.parse().unwrap_or_else(|e| usage_error(e))
}

fn build_config(
    inst: &Instance,
    args: &RunArgs,
    variant: Variant,
    classifier: Option<ClassifierKind>,
) -> RunConfig {
    let mut c = RunConfig::new(inst, variant, classifier);
    c.params.alpha = args.alpha;
    c.params.beta = args.beta;
    c.params.rho = args.rho;
    c.params.q_deposit = args.q;
    c.params.q_punish = args.qstar;
    if let Some(m) = args.ants {
        c.params.num_ants = m;
    }
    c.params.max_iterations = args.iters;
    c.params.sigma_fixed = args.sigma;
    c.stop_at_optimum = args.stop_at_optimum;
    if let Some(b) = &args.boundary {
        c.options.boundary = match b.as_str() {
            "strict" => Boundary::Strict,
            "inclusive" => Boundary::Inclusive,
            other => usage_error(format!("unknown boundary `{other}`")),
        };
    }
    if let Some(m) = &args.median {
        c.options.median_rule = match m.as_str() {
            "lower" => MedianRule::Lower,
            "average" => MedianRule::Average,
            other => usage_error(format!("unknown median rule `{other}`")),
        };
    }
    c
}

fn checked_pair(variant: Variant, classifier: Option<ClassifierKind>) -> Option<ClassifierKind> {
    match (variant.is_dynamic(), classifier) {
        (false, Some(k)) => usage_error(format!(
            "--classifier {k} requires a dynamic variant (dea, dra, dea-pun, dra-pun), got {variant}"
        )),
        (true, None) => usage_error(format!("--variant {variant} needs --classifier")),
        (_, k) => k,
    }
}

fn execute(inst: &Instance, configs: &[RunConfig], trace: Option<&Path>) -> anyhow::Result<Vec<RunResult>> {
    let mut results = Vec::with_capacity(configs.len());
    for (config, outcome) in configs.iter().zip(engine::sweep(inst, configs)) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => eprintln!("run {} seed {} failed: {e}", config.label(), config.seed),
        }
    }
    if let Some(dir) = trace {
        for r in &results {
            report::save_run(dir, r)?;
        }
    }
    Ok(results)
}

fn emit_rows(results: &[RunResult], out: Option<&Path>, format: Format) -> anyhow::Result<()> {
    let rows = report::summarize(results, report::DEFAULT_WINDOW)?;
    report::emit(out, &report::render(&rows, format)?)?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let variant: Variant = parse_or_usage(&args.variant);
    let classifier = args.classifier.as_deref().map(parse_or_usage::<ClassifierKind>);
    let classifier = checked_pair(variant, classifier);
    let format: Format = parse_or_usage(&args.format);
    let Some(name) = args.instance.as_deref() else {
        usage_error("--instance is required");
    };
    let inst = tsplib::resolve(name)?;
    let base = build_config(&inst, &args, variant, classifier);
    base.validate().unwrap_or_else(|e| usage_error(e));
    let configs = engine::seeded(&base, args.seeds.max(1), args.seed_base);
    let results = execute(&inst, &configs, args.trace.as_deref())?;
    if results.is_empty() {
        anyhow::bail!("every run failed");
    }
    emit_rows(&results, args.out.as_deref(), format)
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let grid: Grid = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)?
        }
        None => Grid::default(),
    };
    let run = &args.run;
    let format: Format = parse_or_usage(&run.format);
    let instances = match (grid.instances.clone(), run.instance.clone()) {
        (Some(list), _) => list,
        (None, Some(name)) => vec![name],
        (None, None) => usage_error("no instance given (use --instance or an `instances` list)"),
    };
    let variants: Vec<Variant> = grid
        .variants
        .clone()
        .unwrap_or_else(|| vec![run.variant.clone()])
        .iter()
        .map(|v| parse_or_usage(v))
        .collect();
    let classifiers: Vec<ClassifierKind> = grid
        .classifiers
        .clone()
        .or_else(|| run.classifier.clone().map(|c| vec![c]))
        .unwrap_or_default()
        .iter()
        .map(|c| parse_or_usage(c))
        .collect();
    if grid.variants.is_none() && grid.classifiers.is_none() {
        checked_pair(variants[0], classifiers.first().copied());
    }
    let mut effective = run.clone();
    if let Some(m) = grid.ants {
        effective.ants = Some(m);
    }
    if let Some(i) = grid.iters {
        effective.iters = i;
    }
    if let Some(q) = grid.q {
        effective.q = q;
    }
    if let Some(q) = grid.qstar {
        effective.qstar = q;
    }
    if let Some(s) = grid.stop_at_optimum {
        effective.stop_at_optimum = s;
    }
    let seeds = grid.seeds.unwrap_or(run.seeds).max(1);
    let seed_base = grid.seed_base.unwrap_or(run.seed_base);
    let alphas = grid.alpha.clone().unwrap_or_else(|| vec![run.alpha]);
    let betas = grid.beta.clone().unwrap_or_else(|| vec![run.beta]);
    let rhos = grid.rho.clone().unwrap_or_else(|| vec![run.rho]);

    let mut all = Vec::new();
    for name in &instances {
        let inst = tsplib::resolve(name)?;
        let mut configs = Vec::new();
        for &variant in &variants {
            let kinds: Vec<Option<ClassifierKind>> = if variant.is_dynamic() {
                if classifiers.is_empty() {
                    usage_error(format!("variant {variant} needs at least one classifier"));
                }
                classifiers.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for kind in kinds {
                let base = build_config(&inst, &effective, variant, kind);
                for point in engine::param_grid(&base, &alphas, &betas, &rhos) {
                    if let Err(e) = point.validate() {
                        eprintln!("skipping {} (a={}, b={}, r={}): {e}", point.label(), point.params.alpha, point.params.beta, point.params.rho);
                        continue;
                    }
                    configs.extend(engine::seeded(&point, seeds, seed_base));
                }
            }
        }
        all.extend(execute(&inst, &configs, run.trace.as_deref())?);
    }
    if all.is_empty() {
        anyhow::bail!("no run completed");
    }
    emit_rows(&all, run.out.as_deref(), format)
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<()> {
    let format: Format = parse_or_usage(&args.format);
    let runs = report::load_runs(&args.traces)?;
    if runs.is_empty() {
        anyhow::bail!("no saved runs in {}", args.traces.display());
    }
    let rows = report::summarize(&runs, args.window)?;
    report::emit(args.out.as_deref(), &report::render(&rows, format)?)?;
    Ok(())
}

fn cmd_quartiles(args: QuartileArgs) -> anyhow::Result<()> {
    let format: Format = parse_or_usage(&args.format);
    let runs = report::load_runs(&args.traces)?;
    if runs.is_empty() {
        anyhow::bail!("no saved runs in {}", args.traces.display());
    }
    let rows = report::quartile_rows(&runs)?;
    report::emit(args.out.as_deref(), &report::render_quartiles(&rows, format)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
        Command::Quartiles(a) => cmd_quartiles(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
