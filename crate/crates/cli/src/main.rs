//! `gfnn` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfnn::data::{
    erdos_renyi, knn_graph, load_dataset, resolve_dataset_dir, save_dataset, two_circles,
    two_circles_dataset, Dataset, Split, DATA_DIR_ENV, DEFAULT_NOISE_SD,
};
use gfnn::exec::Execution;
use gfnn::experiments::{
    benchmark_table, freq_sweep, noise_sweep, theory_checks, two_circles_experiment,
    ExperimentReport, ReportRow, RunConfig, TheoryCheckConfig, TwoCirclesConfig,
    DEFAULT_K_FRACTIONS, DEFAULT_NOISE_SIGMAS, FREQ_SWEEP_EPOCHS,
};
use gfnn::filters::{FilterKind, FilterSpec};
use gfnn::graph::Graph;
use gfnn::models::{evaluate, train_prepared, ModelInput, ModelKind, TrainConfig};
use gfnn::spectral::{eigenbasis, EigenMode, DEFAULT_TAU};
use gfnn::Error;

#[derive(Parser, Debug)]
#[command(name = "gfnn", version, about = "Graph filter experiments")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a two-circles dataset with its k-NN graph.
    GenTwoCircles(GenArgs),
    /// Eigen-decompose a dataset graph and report the feature energy per frequency.
    Spectral(SpectralArgs),
    /// Train one model on a dataset split and report its accuracy.
    Train(TrainArgs),
    /// Accuracy of an MLP on frequency-truncated, optionally noisy features.
    FreqSweep(FreqArgs),
    /// Accuracy of several models under white feature noise.
    NoiseSweep(NoiseArgs),
    /// MLP, GCN, SGC and gfNN on synthetic two-circles data.
    TwoCircles(CirclesArgs),
    /// Mean accuracy over random splits for several datasets and models.
    Benchmark(BenchArgs),
    /// Empirical checks of the spectral and network bounds on a graph.
    TheoryCheck(TheoryArgs),
}

#[derive(Args, Debug, Clone)]
struct TrainFlags {
    /// Adam learning rate.
    #[arg(long, default_value_t = 0.2)]
    lr: f64,
    /// Training epochs [default: 50, 20 for freq-sweep].
    #[arg(long)]
    epochs: Option<usize>,
    /// Hidden units of two-layer models.
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    /// Self-loop weight of the propagation (also used by the filter).
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Add trainable biases to every layer.
    #[arg(long)]
    bias: bool,
}

impl TrainFlags {
    fn config(&self) -> TrainConfig {
        self.config_with_epochs(TrainConfig::default().epochs)
    }

    fn config_with_epochs(&self, default_epochs: usize) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            epochs: self.epochs.unwrap_or(default_epochs),
            hidden: self.hidden,
            weight_decay: self.weight_decay,
            gamma: self.gamma,
            bias: self.bias,
            ..TrainConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct FilterFlags {
    /// gfNN filter: leftnorm, augnorm or bilateral.
    #[arg(long, default_value = "leftnorm")]
    filter: FilterKind,
    /// Filter depth.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Scale of the bilateral filter.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

impl FilterFlags {
    fn spec(&self, gamma: f64) -> FilterSpec {
        let kind = match self.filter {
            FilterKind::Bilateral { .. } => FilterKind::Bilateral { alpha: self.alpha },
            other => other,
        };
        FilterSpec::new(kind, gamma, self.k)
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 4000)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_NOISE_SD)]
    noise_sd: f64,
    /// Neighbors per vertex.
    #[arg(long, default_value_t = 5)]
    knn: usize,
    #[arg(long, default_value_t = 80)]
    train: usize,
    #[arg(long, default_value_t = 80)]
    val: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset directory to create.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    /// Dataset directory or name under $GFNN_DATA_DIR.
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Compute only this many lowest frequencies.
    #[arg(long)]
    partial: Option<usize>,
    /// Energy tail fraction defining the cutoff frequency.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long, default_value = "results/spectral")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    dataset: String,
    /// mlp, lr, gcn, gcn-sym, sgc or gfnn.
    #[arg(long, default_value = "gfnn")]
    model: String,
    #[command(flatten)]
    filter: FilterFlags,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results/train")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FreqArgs {
    #[arg(long)]
    dataset: String,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.01, 0.05])]
    sigmas: Vec<f64>,
    /// Comma-separated fractions of the spectrum kept.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_K_FRACTIONS)]
    k_fractions: Vec<f64>,
    #[command(flatten)]
    train: TrainFlags,
    /// Seeds as `a..b` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0..4", value_parser = parse_seeds)]
    seeds: Seeds,
    #[arg(long, default_value = "results/freq-sweep")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_NOISE_SIGMAS)]
    sigmas: Vec<f64>,
    /// Comma-separated models.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "mlp,gcn,sgc,gfnn-leftnorm,gfnn-augnorm,gfnn-bilateral"
    )]
    models: Vec<String>,
    #[command(flatten)]
    filter: FilterFlags,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long, default_value = "0..4", value_parser = parse_seeds)]
    seeds: Seeds,
    #[arg(long, default_value = "results/noise-sweep")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CirclesArgs {
    #[arg(long, default_value_t = 4000)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_NOISE_SD)]
    noise_sd: f64,
    #[arg(long, default_value_t = 5)]
    knn: usize,
    #[arg(long, default_value_t = 80)]
    train_size: usize,
    #[arg(long, default_value_t = 80)]
    val_size: usize,
    #[command(flatten)]
    filter: FilterFlags,
    #[command(flatten)]
    train: TrainFlags,
    /// Train without biases (they are on by default here).
    #[arg(long)]
    no_bias: bool,
    #[arg(long, default_value = "0..4", value_parser = parse_seeds)]
    seeds: Seeds,
    #[arg(long, default_value = "results/two-circles")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated dataset directories or names under $GFNN_DATA_DIR.
    #[arg(long, value_delimiter = ',', default_value = "cora,citeseer,pubmed")]
    datasets: Vec<String>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "gcn,sgc,gfnn-leftnorm,gfnn-augnorm,gfnn-bilateral"
    )]
    models: Vec<String>,
    #[command(flatten)]
    filter: FilterFlags,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long, default_value = "0..4", value_parser = parse_seeds)]
    seeds: Seeds,
    #[arg(long, default_value = "results/benchmark")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    /// p2, k3, er, circles, or a dataset directory.
    #[arg(long, default_value = "er")]
    graph: String,
    /// Vertices for generated graphs.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Edge probability for `er`.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// Seed of the generated graph.
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
    /// Trial seeds.
    #[arg(long, default_value = "0..19", value_parser = parse_seeds)]
    seeds: Seeds,
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value = "results/theory-check")]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let bad = |e: std::num::ParseIntError| format!("bad seed in `{s}`: {e}");
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        if a > b {
            return Err(format!("empty seed range `{s}`"));
        }
        return Ok(Seeds((a..=b).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(bad))
        .collect::<Result<Vec<_>, _>>()
        .map(Seeds)
}

/// Failures sorted into invalid input (exit 1) and runtime trouble (exit 2).
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::VertexOutOfRange { .. }
            | Error::SelfLoop(_)
            | Error::DimensionMismatch { .. }
            | Error::IsolatedVertex(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses model names. Plain `gfnn` takes the filter from the flags;
/// `gfnn-<kind>` fixes the kind and takes depth, `γ` and `α` from the flags.
fn parse_models(names: &[String], flags: &FilterFlags, gamma: f64) -> CliResult<Vec<ModelKind>> {
    let base = flags.spec(gamma);
    base.validate()?;
    names
        .iter()
        .map(|n| {
            if n.eq_ignore_ascii_case("gfnn") {
                return Ok(ModelKind::Gfnn { filter: base });
            }
            Ok(match n.parse()? {
                ModelKind::Gfnn { filter } => {
                    let kind = match filter.kind {
                        FilterKind::Bilateral { .. } => FilterKind::Bilateral { alpha: flags.alpha },
                        other => other,
                    };
                    ModelKind::Gfnn {
                        filter: FilterSpec { kind, ..base },
                    }
                }
                other => other,
            })
        })
        .collect()
}

fn open_dataset(name: &str) -> CliResult<Dataset> {
    let dir = resolve_dataset_dir(name).ok_or_else(|| {
        Failure::Runtime(format!(
            "dataset `{name}` not found (checked the path, ${DATA_DIR_ENV}/{name} and data/{name})"
        ))
    })?;
    Ok(load_dataset(dir)?)
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Failure::Runtime(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn emit(report: &ExperimentReport, out: &Path) -> CliResult {
    report.write(out)?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}

fn run_config(train: &TrainFlags, seeds: &Seeds, exec: Execution) -> RunConfig {
    RunConfig {
        train: train.config(),
        seeds: seeds.0.clone(),
        exec,
    }
}

fn run(cli: Cli) -> CliResult {
    if cli.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let exec = if cli.jobs == 1 {
        Execution::Sequential
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        Execution::Parallel
    };

    match cli.command {
        Command::GenTwoCircles(a) => {
            let ds = two_circles_dataset(a.n, a.noise_sd, a.knn, (a.train, a.val), a.seed)?;
            save_dataset(&ds, &a.out)?;
            println!(
                "two-circles n={} edges={} train/val/test={}/{}/{} -> {}",
                ds.n(),
                ds.graph.num_edges(),
                ds.splits.train.len(),
                ds.splits.val.len(),
                ds.splits.test.len(),
                a.out.display()
            );
        }
        Command::Spectral(a) => {
            if a.gamma.is_nan() || a.gamma < 0.0 {
                return Err(usage("--gamma must be non-negative"));
            }
            let ds = open_dataset(&a.dataset)?;
            let mode = a.partial.map_or(EigenMode::Full, EigenMode::Partial);
            let basis = eigenbasis(&ds.graph, a.gamma, mode)?;
            let profile = basis.frequency_profile(ds.features.view(), a.tau)?;
            let json = serde_json::json!({
                "dataset": ds.name,
                "gamma": a.gamma,
                "frequencies": basis.len(),
                "profile": profile,
            });
            write_file(&a.out.join("report.json"), &serde_json::to_string_pretty(&json).unwrap())?;
            write_file(&a.out.join("spectrum.csv"), &profile.to_csv())?;
            println!(
                "{} frequencies={} max_lambda={:.6} cutoff={:.6} total_energy={:.6}",
                ds.name,
                basis.len(),
                basis.max_frequency(),
                profile.cutoff,
                profile.total_energy
            );
        }
        Command::Train(a) => {
            let config = TrainConfig {
                seed: a.seed,
                ..a.train.config()
            };
            config.validate()?;
            let kind = parse_models(std::slice::from_ref(&a.model), &a.filter, config.gamma)?[0];
            let ds = open_dataset(&a.dataset)?;
            let input = ModelInput::prepare(kind, &ds.graph, config.gamma, ds.features.view())?;
            let outcome = train_prepared(&input, &ds, &config)?;
            let test = evaluate(&input, &outcome.params, &ds, Split::Test)?;
            let mut report = ExperimentReport::new(
                "train",
                serde_json::json!({ "dataset": ds.name, "model": kind, "train": config }),
            );
            let row = |metric: &str, v: f64| {
                ReportRow::new(&ds.name, kind.label(), metric, vec![a.seed], vec![v])
            };
            if !ds.splits.val.is_empty() {
                let val = evaluate(&input, &outcome.params, &ds, Split::Val)?;
                report.rows.push(row("val_accuracy", val));
            }
            report.rows.push(row("test_accuracy", test));
            if let Some(last) = outcome.history.last() {
                report.rows.push(row("final_train_loss", last.train_loss));
            }
            write_file(&a.out.join("params.json"), &outcome.params.to_json())?;
            emit(&report, &a.out)?;
        }
        Command::FreqSweep(a) => {
            let config = RunConfig {
                train: a.train.config_with_epochs(FREQ_SWEEP_EPOCHS),
                seeds: a.seeds.0.clone(),
                exec,
            };
            config.validate()?;
            let ds = open_dataset(&a.dataset)?;
            emit(&freq_sweep(&ds, &a.sigmas, &a.k_fractions, &config)?, &a.out)?;
        }
        Command::NoiseSweep(a) => {
            let config = run_config(&a.train, &a.seeds, exec);
            config.validate()?;
            let models = parse_models(&a.models, &a.filter, config.train.gamma)?;
            let ds = open_dataset(&a.dataset)?;
            emit(&noise_sweep(&ds, &a.sigmas, &models, &config)?, &a.out)?;
        }
        Command::TwoCircles(a) => {
            let mut train = a.train.config();
            train.bias = !a.no_bias;
            let config = TwoCirclesConfig {
                noise_sd: a.noise_sd,
                knn: a.knn,
                train_size: a.train_size,
                val_size: a.val_size,
                filter: a.filter.spec(train.gamma),
                run: RunConfig {
                    train,
                    seeds: a.seeds.0.clone(),
                    exec,
                },
            };
            let out = two_circles_experiment(a.n, &config)?;
            write_file(&a.out.join("predictions.csv"), &out.predictions_csv)?;
            emit(&out.report, &a.out)?;
        }
        Command::Benchmark(a) => {
            let config = run_config(&a.train, &a.seeds, exec);
            config.validate()?;
            let models = parse_models(&a.models, &a.filter, config.train.gamma)?;
            let mut found = Vec::new();
            let mut skipped = Vec::new();
            for name in &a.datasets {
                match resolve_dataset_dir(name) {
                    Some(dir) => found.push(load_dataset(dir)?),
                    None => {
                        let note = format!("{name}: dataset directory not found");
                        eprintln!("notice: {note}");
                        skipped.push(note);
                    }
                }
            }
            let mut report = benchmark_table(&found, &models, &config)?;
            report.skipped = skipped;
            emit(&report, &a.out)?;
        }
        Command::TheoryCheck(a) => {
            let cfg = TheoryCheckConfig {
                seeds: a.seeds.0.clone(),
                delta: a.delta,
                rho: a.rho,
                ..TheoryCheckConfig::default()
            };
            cfg.validate()?;
            let graph = match a.graph.as_str() {
                "p2" => Graph::from_edges(2, [(0, 1)])?,
                "k3" => Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)])?,
                "er" => erdos_renyi(a.n, a.p, a.graph_seed)?,
                "circles" => {
                    let (points, _) = two_circles(a.n, DEFAULT_NOISE_SD, a.graph_seed)?;
                    knn_graph(&points, 5)?
                }
                other => open_dataset(other)?.graph,
            };
            let report = theory_checks(&graph, &cfg)?;
            emit(&report, &a.out)?;
            if !report.all_checks_pass() {
                return Err(Failure::Runtime("some theory checks failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
