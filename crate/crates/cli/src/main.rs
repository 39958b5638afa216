use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsw_cli::commands;
use qsw_cli::{CliError, RunConfig};
use qsw_core::SchemeId;

#[derive(Parser)]
#[command(
    name = "qsw",
    version,
    about = "Quantum stochastic walk state discrimination"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides the optimizer seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal success probability for the configured ensemble.
    Bounds,
    /// Optimize every scheme over the p and tau grids.
    Sweep,
    /// Evaluate one parameter vector.
    Simulate {
        #[arg(long)]
        scheme: SchemeId,
        /// JSON array of parameters, or an object with a `theta` array.
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        tau: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let run = RunConfig::load(&path)?.resolve(cli.seed)?;

    match cli.command {
        Command::Bounds => {
            let out = commands::bounds(&run, &cli.out_dir)?;
            println!("{}", out.summary());
            println!("wrote {}", out.csv_path.display());
        }
        Command::Sweep => {
            let out = commands::sweep(&run, &cli.out_dir)?;
            let failed = out.records.iter().filter(|r| !r.is_ok()).count();
            println!(
                "{} grid points ({} failed); wrote {}, {}, {}",
                out.records.len(),
                failed,
                out.csv_path.display(),
                out.svg_path.display(),
                out.thetas_path.display()
            );
        }
        Command::Simulate {
            scheme,
            theta,
            p,
            tau,
        } => {
            let theta = commands::load_theta(&theta)?;
            let report = commands::simulate(&run, scheme, &theta, p, tau)?;
            print!("{}", commands::simulation_json(&report));
            commands::write_simulation(&report, &cli.out_dir)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
