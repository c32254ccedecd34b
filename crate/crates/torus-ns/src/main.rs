use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use torus_ns::config::{load_config, ExperimentConfig};
use torus_ns::error::Error;
use torus_ns::runner;

/// Pseudo-spectral Navier-Stokes on the periodic torus with a maximum-norm
/// estimate verification harness.
#[derive(Parser)]
#[command(name = "torus-ns", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (JSON).
    config: PathBuf,

    /// Dotted-path overrides, e.g. --set solver.dt=1e-3 or
    /// --set amplitudes=[0.5,1,2,4].
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Override the output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Force single-threaded execution.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment and write its artifacts.
    Run(CommonArgs),
    /// Print the resolved plan (grid, steps, memory) without running.
    Describe(CommonArgs),
}

const EXIT_NUMERICAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>, Error> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("override {s:?} is not KEY=VALUE")))
        })
        .collect()
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let overrides = parse_overrides(&common.set)?;
    let mut cfg = load_config(&common.config, &overrides)?;
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    if common.deterministic {
        cfg.deterministic = true;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Describe(common) => match load(&common).and_then(|cfg| runner::describe(&cfg)) {
            Ok(plan) => {
                print!("{plan}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Run(common) => {
            let cfg = match load(&common) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            match runner::run(&cfg) {
                Ok(artifacts) => {
                    print!("{}", artifacts.report.summary());
                    println!("report: {}", artifacts.report_path.display());
                    for p in &artifacts.extra_paths {
                        println!("artifact: {}", p.display());
                    }
                    if artifacts.report.all_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_NUMERICAL)
                    }
                }
                Err(e @ (Error::Config(_) | Error::Json(_))) => {
                    eprintln!("config error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
                Err(e) => {
                    eprintln!("numerical failure: {e}");
                    ExitCode::from(EXIT_NUMERICAL)
                }
            }
        }
    }
}
