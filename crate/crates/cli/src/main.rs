use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relsw::io::{audit, convergence, keys_help, run, RunConfig};

#[derive(Parser)]
#[command(name = "relsw", version, about = "Relativistic fluid coupled to a Thirring-Dirac field in Lagrangian coordinates")]
#[command(after_help = keys_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured mode and write diagnostics, snapshots and a manifest.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every invariant and print a JSON report.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Also write the report to this directory as audit.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error table and observed orders over successive refinements.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the canonical form of the configuration.
    PrintConfig {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<RunConfig, String> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("--threads: {e}"))?;
    }
    let mut config = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            RunConfig::parse(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => RunConfig::example(),
    };
    if let Some(s) = common.seed {
        config.seed = s;
    }
    Ok(config)
}

fn write_to(out: &Option<PathBuf>, name: &str, text: &str) -> Result<(), String> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        fs::write(dir.join(name), text).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Run { common, out } => {
            let config = load(&common)?;
            let dir = out.unwrap_or_else(|| PathBuf::from(&config.output_dir));
            let summary = run(&config, &dir).map_err(|e| e.to_string())?;
            if let Some(last) = summary.rows.last() {
                println!("{}", relsw::io::DIAGNOSTICS_HEADER);
                println!("{}", last.to_csv());
            }
            if let Some(p) = &summary.picard {
                println!(
                    "picard: {} iterations, converged={}, diverged={}",
                    p.distances.len(),
                    p.converged,
                    p.diverged
                );
                return Ok(!p.diverged);
            }
            println!("wrote {} artifacts to {}", summary.artifacts.len(), dir.display());
            Ok(true)
        }
        Command::Audit { common, out } => {
            let config = load(&common)?;
            let report = audit(&config).map_err(|e| e.to_string())?;
            let json = report.to_json();
            println!("{json}");
            write_to(&out, "audit.json", &(json + "\n"))?;
            Ok(report.pass)
        }
        Command::Convergence { common, levels, out } => {
            let config = load(&common)?;
            let report = convergence(&config, levels).map_err(|e| e.to_string())?;
            let table = report.table();
            print!("{table}");
            write_to(&out, "convergence.csv", &table)?;
            Ok(report.pass())
        }
        Command::PrintConfig { common } => {
            print!("{}", load(&common)?.serialize());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
