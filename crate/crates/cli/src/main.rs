//! `sht-auc`: dataset generation, training sweeps, theory reports and evaluation.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 some sweep
//! runs failed.

use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sht_auc::data::libsvm::load_libsvm;
use sht_auc::experiment::generate::{generate_files, GenerateSpec, TruthFile};
use sht_auc::experiment::output::write_json;
use sht_auc::experiment::report::{evaluate_models, load_model, theory_report, TheoryRequest};
use sht_auc::experiment::{run_sweep, write_outputs, ExperimentConfig};
use sht_auc::Error;

#[derive(Parser)]
#[command(name = "sht-auc", version, about = "Sparse AUC maximization by stochastic hard thresholding")]
struct Cli {
    /// Input config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (generate, train) or file (theory, eval).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Override the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic libsvm datasets and truth sidecars from a spec grid.
    Generate,
    /// Run a training sweep and write results, summary and traces.
    Train,
    /// Evaluate the convergence constants and optional curvature probes.
    Theory,
    /// Score saved models on a libsvm dataset.
    Eval {
        /// Model JSON: a dense array, a sparse model, or a trace file.
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        /// libsvm dataset.
        #[arg(long)]
        data: PathBuf,
        /// Truth sidecar written by `generate`.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Pad the dataset to at least this many features.
        #[arg(long)]
        d_hint: Option<usize>,
        /// Weights with |w_i| <= eps count as zero.
        #[arg(long, default_value_t = 0.0)]
        truncate_eps: f64,
    },
}

enum Failure {
    Config(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Argument(_) | Error::Domain(_) => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn require_config(cli: &Cli) -> Result<&Path, Failure> {
    cli.config.as_deref().ok_or_else(|| Failure::Config("--config is required".into()))
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn emit_json<T: serde::Serialize>(value: &T, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => write_json(path, value)?,
        None => {
            let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => return Err(Error::from(e).into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn generate(cli: &Cli) -> Result<u8, Failure> {
    let mut spec = GenerateSpec::load(require_config(cli)?)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("data"));
    let files = generate_files(&spec, &dir)?;
    eprintln!("wrote {} datasets to {}", files.len(), dir.display());
    Ok(0)
}

fn train(cli: &Cli) -> Result<u8, Failure> {
    let path = require_config(cli)?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = Some(threads);
    }
    config.validate()?;
    let dir = cli.output.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let outcome = run_sweep(&config, &parent_dir(path))?;
    write_outputs(&outcome, &dir)?;
    for s in &outcome.summary {
        let fmt = |m: Option<f64>, sd: Option<f64>| match (m, sd) {
            (Some(m), Some(sd)) => format!("{m:.3}±{sd:.3}"),
            _ => "-".into(),
        };
        eprintln!(
            "cell {} r={:?} k*={:?}: AUC {} F1 {}",
            s.data_cell,
            s.r,
            s.k_star,
            fmt(s.auc_mean, s.auc_std),
            fmt(s.f1_mean, s.f1_std)
        );
    }
    let failed = outcome.failed_runs();
    eprintln!("{} runs, {failed} failed; results in {}", outcome.rows.len(), dir.display());
    Ok(if failed > 0 { 3 } else { 0 })
}

fn theory(cli: &Cli) -> Result<u8, Failure> {
    let path = require_config(cli)?;
    let mut req = TheoryRequest::load(path)?;
    if let (Some(seed), Some(probe)) = (cli.seed, req.probe.as_mut()) {
        probe.seed = seed;
    }
    let report = theory_report(&req, &parent_dir(path))?;
    emit_json(&report, cli.output.as_deref())?;
    Ok(0)
}

fn eval(
    cli: &Cli,
    models: &[PathBuf],
    data: &Path,
    truth: Option<&Path>,
    d_hint: Option<usize>,
    truncate_eps: f64,
) -> Result<u8, Failure> {
    if truncate_eps.is_nan() || truncate_eps < 0.0 {
        return Err(Failure::Config("--truncate-eps must be nonnegative".into()));
    }
    let truth = truth.map(TruthFile::load).transpose()?;
    let d_hint = d_hint.or(truth.as_ref().map(|t| t.d));
    let dataset = load_libsvm(data, d_hint)?.data;
    let weights = models.iter().map(load_model).collect::<Result<Vec<_>, _>>()?;
    let support = truth.as_ref().map(TruthFile::support_set).transpose()?;
    let out = evaluate_models(&weights, &dataset, support.as_ref(), truncate_eps)?;
    emit_json(&out, cli.output.as_deref())?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate => generate(&cli),
        Command::Train => train(&cli),
        Command::Theory => theory(&cli),
        Command::Eval { models, data, truth, d_hint, truncate_eps } => {
            eval(&cli, models, data, truth.as_deref(), *d_hint, *truncate_eps)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
