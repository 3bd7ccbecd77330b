mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use benchgen::behavior::{DistanceMode, PairSettings};
use benchgen::bench::{self, lift};
use benchgen::engine::{
    best_separating, evolve, ArchiveFile, CellRecord, EngineConfig, ProgressRecord,
};
use benchgen::evaluate_pair;
use benchgen::expr::{Domain, ExprTree};
use benchgen::fla::{self, Bin, DescriptorSettings};
use benchgen::optim::{Objective, OptimizerConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{parse_optimizer, RunConfig};
use crate::output::{emit, write_atomic};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input files. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Failure while running. Exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "benchgen",
    version,
    about = "Evolve 2-D benchmark functions that tell two optimizers apart"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for `evolve`, output file for the other commands.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run MAP-Elites and write the archive and progress log.
    Evolve,
    /// Behavioural distance of two optimizers on one function.
    Distance {
        /// File holding the expression.
        #[arg(long)]
        expr: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Landscape descriptors and archive bin of one function.
    Descriptors {
        /// File holding the expression.
        #[arg(long)]
        expr: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        /// Uniform samples for fitness distance correlation.
        #[arg(long)]
        samples: Option<usize>,
        /// Random-walk length for neutrality.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Delta-x / delta-f comparison of two optimizers, optionally lifted to D dimensions.
    Validate {
        /// File holding a 2-D expression, lifted to `--dimension`.
        #[arg(
            long,
            conflicts_with = "baseline",
            required_unless_present = "baseline"
        )]
        expr: Option<PathBuf>,
        /// sphere, rastrigin, ackley, rosenbrock or griewank.
        #[arg(long)]
        baseline: Option<String>,
        /// Problem dimension.
        #[arg(long, default_value_t = 10)]
        dimension: usize,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// 20 x 20 CSV of archive distances for one equal-best layer.
    ExportHeatmap {
        /// Archive JSON written by `evolve`.
        #[arg(long)]
        archive: PathBuf,
        /// 0: optimizers reached different bests, 1: equal bests.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        layer: u8,
    },
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Preset name or inline JSON.
    #[arg(long)]
    opt1: Option<String>,
    /// Preset name or inline JSON.
    #[arg(long)]
    opt2: Option<String>,
    /// Evaluation budget for both optimizers.
    #[arg(long)]
    budget: Option<usize>,
    /// Repetitions (default: 3, or 21 for `validate`).
    #[arg(long)]
    reps: Option<usize>,
    /// How repetitions are combined into one distance.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    PerRepetition,
    Pooled,
}

impl From<ModeArg> for DistanceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PerRepetition => DistanceMode::PerRepetition,
            ModeArg::Pooled => DistanceMode::Pooled,
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn runtime(msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    text
}

fn read_expr(path: &Path) -> Result<ExprTree, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    text.trim()
        .parse()
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Settings shared by the single-function commands: the optional config file
/// supplies defaults, flags override them.
struct Context {
    seed: Option<u64>,
    base: Option<EngineConfig>,
}

impl Context {
    fn new(global: &Global) -> Result<Self, CliError> {
        let base = match &global.config {
            Some(path) => Some(RunConfig::load(path, global.seed)?.engine),
            None => None,
        };
        Ok(Context {
            seed: global.seed.or(base.as_ref().map(|b| b.seed)),
            base,
        })
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| usage("seed required"))
    }

    fn domain(&self) -> Domain {
        self.base.as_ref().map(|b| b.domain).unwrap_or_default()
    }

    fn descriptors(&self) -> DescriptorSettings {
        self.base
            .as_ref()
            .map(|b| b.descriptors)
            .unwrap_or_default()
    }

    fn optimizers(
        &self,
        pair: &PairArgs,
    ) -> Result<Option<(OptimizerConfig, OptimizerConfig)>, CliError> {
        let pick = |flag: &Option<String>, fallback: Option<OptimizerConfig>| match flag {
            Some(text) => parse_optimizer(text).map(Some),
            None => Ok(fallback),
        };
        let o1 = pick(&pair.opt1, self.base.as_ref().map(|b| b.opt1))?;
        let o2 = pick(&pair.opt2, self.base.as_ref().map(|b| b.opt2))?;
        match (o1, o2) {
            (Some(a), Some(b)) => {
                let a = pair.budget.map_or(a, |n| a.with_budget(n));
                let b = pair.budget.map_or(b, |n| b.with_budget(n));
                for o in [&a, &b] {
                    o.validate().map_err(usage)?;
                }
                Ok(Some((a, b)))
            }
            (None, None) => Ok(None),
            _ => Err(usage("--opt1 and --opt2 must be given together")),
        }
    }

    fn required_optimizers(
        &self,
        pair: &PairArgs,
    ) -> Result<(OptimizerConfig, OptimizerConfig), CliError> {
        self.optimizers(pair)?
            .ok_or_else(|| usage("--opt1 and --opt2 required"))
    }

    fn pair_settings(&self, pair: &PairArgs) -> Result<PairSettings, CliError> {
        let mut s = self
            .base
            .as_ref()
            .map(|b| b.pair_settings())
            .unwrap_or_default();
        if let Some(r) = pair.reps {
            if r == 0 {
                return Err(usage("--reps must be at least 1"));
            }
            s.repetitions = r;
        }
        if let Some(m) = pair.mode {
            s.mode = m.into();
        }
        Ok(s)
    }
}

fn cmd_evolve(global: &Global) -> Result<(), CliError> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| usage("evolve needs --config"))?;
    let run = RunConfig::load(path, global.seed)?;
    let dir = global.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let outcome = evolve(&run.engine, |r: &ProgressRecord, _| {
        eprintln!(
            "generation {:>4}  cells {:>3}  max_d {:.4}  mean_d {:.4}",
            r.generation, r.filled_cells, r.max_d, r.mean_d
        );
    })
    .map_err(runtime)?;

    let archive_path = dir.join(&run.output.archive);
    write_atomic(
        &archive_path,
        to_json(&outcome.archive.to_file(&run.engine)).as_bytes(),
    )?;
    let mut csv = format!("{}\n", ProgressRecord::CSV_HEADER);
    for r in &outcome.progress {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_atomic(&dir.join(&run.output.progress), csv.as_bytes())?;
    if run.output.heatmaps {
        for layer in 0..=1u8 {
            let mut buf = Vec::new();
            outcome
                .archive
                .write_heatmap_csv(layer, &mut buf)
                .map_err(runtime)?;
            write_atomic(&dir.join(format!("heatmap_layer{layer}.csv")), &buf)?;
        }
    }

    let summary = |require_unequal: bool| {
        best_separating(&outcome.archive, require_unequal)
            .ok()
            .map(CellRecord::from)
    };
    let report = json!({
        "archive": archive_path,
        "filled_cells": outcome.archive.len(),
        "max_d": outcome.archive.max_d(),
        "mean_d": outcome.archive.mean_d(),
        "best_separating": summary(true),
        "best_overall": summary(false),
    });
    print!("{}", to_json(&report));
    Ok(())
}

#[derive(Serialize)]
struct DistanceReport {
    d: f64,
    best_f1: f64,
    best_f2: f64,
    equal_best: bool,
}

fn cmd_distance(
    ctx: &Context,
    expr: &Path,
    pair: &PairArgs,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let tree = read_expr(expr)?;
    let domain = ctx.domain();
    tree.check_dimension(domain.dimension).map_err(usage)?;
    let (o1, o2) = ctx.required_optimizers(pair)?;
    let settings = ctx.pair_settings(pair)?;
    let score = evaluate_pair(&tree, &o1, &o2, &domain, &settings, ctx.seed()?).map_err(runtime)?;
    if !score.valid {
        return Err(runtime(
            "optimizers produced non-finite values on this function",
        ));
    }
    let report = DistanceReport {
        d: score.d,
        best_f1: score.best_f1,
        best_f2: score.best_f2,
        equal_best: score.equal_best,
    };
    emit(out, &to_json(&report))
}

#[derive(Serialize)]
struct DescriptorReport {
    fdc: f64,
    neutrality: f64,
    /// Only known when two optimizers were given.
    #[serde(skip_serializing_if = "Option::is_none")]
    equal_best: Option<bool>,
    bin: Bin,
}

fn cmd_descriptors(
    ctx: &Context,
    expr: &Path,
    pair: &PairArgs,
    samples: Option<usize>,
    steps: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let tree = read_expr(expr)?;
    let domain = ctx.domain();
    tree.check_dimension(domain.dimension).map_err(usage)?;
    let seed = ctx.seed()?;
    let mut settings = ctx.descriptors();
    settings.fdc_samples = samples.unwrap_or(settings.fdc_samples);
    settings.walk_steps = steps.unwrap_or(settings.walk_steps);
    if settings.fdc_samples < 2 || settings.walk_steps < 2 {
        return Err(usage("--samples and --steps must be at least 2"));
    }
    let equal_best = match ctx.optimizers(pair)? {
        Some((o1, o2)) => {
            let score = evaluate_pair(&tree, &o1, &o2, &domain, &ctx.pair_settings(pair)?, seed)
                .map_err(runtime)?;
            Some(score.equal_best)
        }
        None => None,
    };
    let d = fla::describe(&tree, &domain, &settings, equal_best.unwrap_or(false), seed)
        .map_err(runtime)?;
    let report = DescriptorReport {
        fdc: d.fdc,
        neutrality: d.neutrality,
        equal_best,
        bin: d.bin,
    };
    emit(out, &to_json(&report))
}

fn cmd_validate(
    ctx: &Context,
    expr: Option<&Path>,
    baseline: Option<&str>,
    dimension: usize,
    pair: &PairArgs,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (o1, o2) = ctx.required_optimizers(pair)?;
    let domain = ctx.domain().with_dimension(dimension);
    domain.validate().map_err(usage)?;
    let (function, label): (Box<dyn Objective>, String) = match (expr, baseline) {
        (Some(path), _) => {
            let tree = read_expr(path)?;
            let label = tree.to_string();
            (Box::new(lift(tree, dimension).map_err(usage)?), label)
        }
        (None, Some(name)) => (
            Box::new(bench::baseline(name).map_err(usage)?),
            name.to_string(),
        ),
        (None, None) => return Err(usage("--expr or --baseline required")),
    };
    let reps = pair.reps.unwrap_or(21);
    if reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let budget = pair.budget.unwrap_or(o1.budget.max(o2.budget));
    let report = bench::validate(
        function.as_ref(),
        &label,
        &o1,
        &o2,
        &domain,
        reps,
        budget,
        ctx.seed()?,
    )
    .map_err(runtime)?;
    emit(out, &to_json(&report))
}

fn cmd_export_heatmap(archive: &Path, layer: u8, out: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(archive)
        .map_err(|e| usage(format!("cannot read {}: {e}", archive.display())))?;
    let file: ArchiveFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", archive.display())))?;
    let archive = file.archive().map_err(usage)?;
    let mut buf = Vec::new();
    archive
        .write_heatmap_csv(layer, &mut buf)
        .map_err(runtime)?;
    emit(out, &String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::Evolve => cmd_evolve(g),
        Command::Distance { expr, pair } => cmd_distance(&Context::new(g)?, expr, pair, out),
        Command::Descriptors {
            expr,
            pair,
            samples,
            steps,
        } => cmd_descriptors(&Context::new(g)?, expr, pair, *samples, *steps, out),
        Command::Validate {
            expr,
            baseline,
            dimension,
            pair,
        } => cmd_validate(
            &Context::new(g)?,
            expr.as_deref(),
            baseline.as_deref(),
            *dimension,
            pair,
            out,
        ),
        Command::ExportHeatmap { archive, layer } => cmd_export_heatmap(archive, *layer, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.global.threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(runtime)
            .and_then(|pool| pool.install(|| run(&cli))),
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
