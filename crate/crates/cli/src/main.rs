//! Configuration-driven experiment runner with reproducible seeds and
//! persisted results. Exit codes: 0 ok, 1 invalid config, 2 runtime failure.

mod config;
mod output;
mod registry;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use output::{write_outputs, Manifest, ManifestFile};

#[derive(Parser)]
#[command(name = "randwave", version, about = "Spectral wave simulator and Monte Carlo verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
    /// Rayon thread count (default: available cores). Results do not depend
    /// on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Commands {
    /// Run one experiment from a TOML config (or re-run a manifest.json).
    Run {
        config: PathBuf,
        /// Where to write results; overrides the config and the
        /// RANDWAVE_OUTPUT_ROOT env var.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List known experiments, the statement each probes, and required keys.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match cli.command {
        Commands::List => {
            println!("{:<22} {:<20} required keys", "experiment", "anchor");
            for e in registry::EXPERIMENTS {
                println!("{:<22} {:<20} {}", e.name, e.anchor, e.required.join(", "));
                println!("{:<22} {:<20}   {}", "", "", e.description);
            }
            ExitCode::SUCCESS
        }
        Commands::Run {
            config,
            output_dir,
            seed,
        } => match run(&config, output_dir, seed, cli.threads) {
            Ok(dir) => {
                println!("ok: results in {}", dir.display());
                ExitCode::SUCCESS
            }
            Err(RunError::Validation(e)) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
            Err(RunError::Runtime(e)) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}

enum RunError {
    Validation(config::ValidationError),
    Runtime(anyhow::Error),
}

impl From<config::ValidationError> for RunError {
    fn from(e: config::ValidationError) -> Self {
        RunError::Validation(e)
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Runtime(e)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        RunError::Validation(config::ValidationError {
            key: path.display().to_string(),
            reason: e.to_string(),
        })
    })?;
    // A manifest re-run: pull the resolved config back out.
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            RunError::Validation(config::ValidationError {
                key: "<manifest>".into(),
                reason: e.to_string(),
            })
        })?;
        let resolved = manifest.get("resolved_config").ok_or_else(|| {
            RunError::Validation(config::ValidationError {
                key: "resolved_config".into(),
                reason: "manifest lacks a resolved config".into(),
            })
        })?;
        return serde_json::from_value(resolved.clone()).map_err(|e| {
            RunError::Validation(config::ValidationError {
                key: "resolved_config".into(),
                reason: e.to_string(),
            })
        });
    }
    ExperimentConfig::from_toml(&text).map_err(RunError::Validation)
}

fn run(
    path: &Path,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<PathBuf, RunError> {
    let mut config = load_config(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;

    let dir = output_dir
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| {
            let root = std::env::var("RANDWAVE_OUTPUT_ROOT").unwrap_or_else(|_| "runs".into());
            PathBuf::from(root).join(format!("{}_{}", config.experiment, config.seed))
        });
    config.output_dir = Some(dir.clone());

    let start = Instant::now();
    let result = runner::run_experiment(&config).map_err(RunError::Runtime)?;
    let wall_ms = start.elapsed().as_millis();

    let anchor = registry::find(&config.experiment)
        .map(|e| e.anchor)
        .unwrap_or_default();
    let files: Vec<ManifestFile> = result
        .files
        .iter()
        .map(|f| ManifestFile {
            name: f.name.clone(),
            sha256: output::sha256_hex(f.content.as_bytes()),
            bytes: f.content.len(),
            rows: f.rows,
        })
        .collect();
    let manifest = Manifest {
        experiment: config.experiment.clone(),
        anchor: anchor.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_ms,
        threads: threads.unwrap_or_else(rayon::current_num_threads),
        resolved_config: config,
        summary: result.summary,
        files,
    };
    write_outputs(&dir, &result.files, &manifest).map_err(RunError::Runtime)?;
    Ok(dir)
}
