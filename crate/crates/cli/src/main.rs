use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cascade_bandits::analysis::verify;
use cascade_bandits::harness::{
    emit_plot, emit_report, report_table, run_experiment, ExperimentConfig, ExperimentResult,
    PlotStyle,
};
use cascade_bandits::linear::features::{generate_features, read_training_csv};
use cascade_bandits::lowerbound::{minimax_bound_with_grid, EPSILON_GRID};

#[derive(Parser)]
#[command(
    name = "cascade-bandits",
    version,
    about = "Cascading bandit simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write report, CSVs, JSON and an SVG plot.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Error-bar scale applied to std / sqrt(runs).
        #[arg(long, default_value_t = 1.0)]
        error_scale: f64,
        #[arg(long)]
        log_x: bool,
    },
    /// Print the summary table of a saved result.json.
    Report {
        result: PathBuf,
        /// Also render the plot to this path.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        error_scale: f64,
        #[arg(long)]
        log_x: bool,
    },
    /// Run the property and diagnostic checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the check results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Learn a feature matrix from a 0/1 training CSV (rows are users).
    Features {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long = "K")]
        k: usize,
        /// Destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the minimax regret lower bound.
    Lowerbound {
        #[arg(long = "L")]
        l: usize,
        #[arg(long = "K")]
        k: usize,
        #[arg(long = "T")]
        t: u64,
        #[arg(long, default_value_t = EPSILON_GRID)]
        grid: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            error_scale,
            log_x,
        } => {
            let cfg = ExperimentConfig::from_file(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("results"));
            let result = run_experiment(&cfg)?;
            let (table, files) = emit_report(&result, &dir)?;
            let style = PlotStyle {
                error_scale,
                log_x,
                ..PlotStyle::default()
            };
            emit_plot(&result, &style, dir.join("regret.svg"))?;
            print!("{table}");
            eprintln!(
                "wrote {} and siblings in {}",
                files.result_json.display(),
                dir.display()
            );
        }
        Command::Report {
            result,
            plot,
            error_scale,
            log_x,
        } => {
            let res = ExperimentResult::from_file(&result)
                .with_context(|| format!("reading result {}", result.display()))?;
            if res.policies.is_empty() {
                bail!("{} holds no policies", result.display());
            }
            print!("{}", report_table(&res));
            if let Some(path) = plot {
                let style = PlotStyle {
                    error_scale,
                    log_x,
                    ..PlotStyle::default()
                };
                emit_plot(&res, &style, path)?;
            }
        }
        Command::Verify { seed, json } => {
            let report = verify::run_all(seed);
            print!("{}", report.table());
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            }
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Features { train, d, k, out } => {
            let a = read_training_csv(&train)
                .with_context(|| format!("reading {}", train.display()))?;
            let features = generate_features(&a, d, k)?;
            let text = serde_json::to_string_pretty(&features.to_file(k))?;
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => println!("{text}"),
            }
        }
        Command::Lowerbound { l, k, t, grid } => {
            let b = minimax_bound_with_grid(l, k, t, grid)?;
            println!(
                "{}",
                serde_json::json!({
                    "L": l,
                    "K": k,
                    "T": t,
                    "bound": b.bound,
                    "epsilon": b.epsilon,
                    "epsilon_max": b.epsilon_max,
                })
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
