use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use topmix_cli::{run_classify, run_diagrams, run_distances, run_inspect, ExperimentConfig, PipelineError};

#[derive(Parser)]
#[command(
    name = "topmix",
    version,
    about = "Topological k-NN classification of mixed tabular data"
)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, default_value = "topmix.toml")]
    config: PathBuf,
    /// Use this k instead of selecting one.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Wasserstein order.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Filtration cap as a multiple of the largest intra-cloud distance.
    #[arg(long, global = true)]
    maxscale_safety: Option<f64>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-row persistence diagrams.
    Diagrams,
    /// Compute the pairwise Wasserstein distance matrix.
    Distances,
    /// Run the full experiment and write the report.
    Classify,
    /// Show one row's cloud, diagram and nearest training rows (`--k`
    /// of them, default 5).
    Inspect {
        #[arg(long)]
        row: usize,
    },
}

fn load(cli: &Cli) -> Result<ExperimentConfig, PipelineError> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(k) = cli.k {
        cfg.knn.k = Some(k);
    }
    if let Some(seed) = cli.seed {
        cfg.split.seed = seed;
    }
    if let Some(p) = cli.p {
        cfg.p = p;
    }
    if let Some(s) = cli.maxscale_safety {
        cfg.maxscale.safety = s;
        cfg.maxscale.explicit = None;
    }
    if let Some(d) = &cli.cache_dir {
        cfg.cache_dir = d.clone();
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let cfg = load(&cli)?;
    match cli.command {
        Command::Diagrams => {
            for path in run_diagrams(cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Distances => {
            for path in run_distances(cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Classify => print!("{}", run_classify(cfg)?.report_text),
        Command::Inspect { row } => print!("{}", run_inspect(cfg, row, cli.k.unwrap_or(5))?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
