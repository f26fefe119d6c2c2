//! Benchmark CLI: runs the sparse-regression experiment and writes curve
//! CSVs, per-trial trace CSVs, and SVG plots.
//!
//! Exit codes: 0 success, 1 config error, 2 solver hard error in all runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nexpga::harness::{parse_config, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "bench", about = "Composite-optimization solver benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file and/or flag overrides.
    Run {
        /// Config file with line-oriented `key = value` entries.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Problem dimension n (m defaults to 0.1n, s to 0.2m).
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated regularization weights.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Per-method wall-clock budget in seconds.
        #[arg(long)]
        t_max: Option<f64>,
        /// Comma-separated method labels
        /// (nexPGA, NPG, nexPGA-DC, PGels, pDCAe).
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_config(
    config: Option<PathBuf>,
    n: Option<usize>,
    lambda: Option<String>,
    trials: Option<usize>,
    t_max: Option<f64>,
    methods: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<ExperimentConfig, String> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(lambda) = lambda {
        cfg.lambdas = lambda
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| format!("bad lambda `{t}`")))
            .collect::<Result<_, _>>()?;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    if let Some(t_max) = t_max {
        cfg.t_max = t_max;
    }
    if let Some(methods) = methods {
        cfg.methods = methods.split(',').map(|t| t.trim().to_string()).collect();
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Command::Run { config, n, lambda, trials, t_max, methods, seed, out } = cli.command;

    let cfg = match build_config(config, n, lambda, trials, t_max, methods, seed, out) {
        Ok(cfg) => cfg,
        Err(msg) => {
            let msg = msg.strip_prefix("config error: ").unwrap_or(&msg);
            eprintln!("config error: {msg}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return ExitCode::from(1);
    }

    match run_experiment(&cfg) {
        Ok(report) => {
            let ok = report.total_runs - report.failed_runs;
            println!(
                "done: {ok}/{} runs succeeded, outputs in {}",
                report.total_runs,
                cfg.output_dir.display()
            );
            if ok == 0 {
                eprintln!("all solver runs failed");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("experiment failed: {e}");
            ExitCode::from(2)
        }
    }
}
