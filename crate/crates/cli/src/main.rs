use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hjreg_cli::oscillation_chain_json;
use hjreg_cli::{ensemble, parse_config, run, RunError, Scenario};

#[derive(Parser)]
#[command(name = "hjreg", version, about = "Regularity experiments for coercive Hamilton-Jacobi equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "HJREG_OUT_DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Cells per axis, overriding the grid.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Run `count` randomized members and aggregate.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, env = "HJREG_OUT_DIR")]
        out: Option<PathBuf>,
    },
    /// Print the constant chain as JSON.
    Chain {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// List the scenario catalog.
    ListScenarios,
}

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

fn out_root(flag: Option<PathBuf>, cfg: &hjreg_cli::ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("runs"))
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("hjreg: {e}");
    ExitCode::from(match e {
        RunError::Config(_) => CONFIG_ERROR,
        RunError::Io(_) => RUNTIME_ERROR,
    })
}

fn set_workers() -> Result<(), String> {
    if let Ok(v) = std::env::var("HJREG_WORKERS") {
        let n: usize = v.parse().map_err(|_| format!("HJREG_WORKERS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = set_workers() {
        eprintln!("hjreg: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }
    match cli.command {
        Command::Run { config, out, seed, resolution } => {
            let mut cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(RunError::Config(e.0)),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = resolution {
                cfg.grid.cells = r;
            }
            let root = out_root(out, &cfg);
            match run(&cfg, &root) {
                Ok(o) => {
                    println!("{} {}", serde_json::to_string(&o.report.status).unwrap().trim_matches('"'), o.dir.display());
                    if let Some(e) = &o.report.error {
                        eprintln!("hjreg: {e}");
                    }
                    ExitCode::from(o.report.status.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Command::Ensemble { config, count, seed, out } => {
            let cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(RunError::Config(e.0)),
            };
            let root = out_root(out, &cfg);
            match ensemble(&cfg, count, seed, &root) {
                Ok((rep, dir)) => {
                    println!("{} {}", serde_json::to_string(&rep.status).unwrap().trim_matches('"'), dir.display());
                    ExitCode::from(rep.status.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Command::Chain { n, p, lambda, alpha } => match oscillation_chain_json(n, p, lambda, alpha) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("hjreg: {e}");
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<22}{}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
    }
}
