use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radial_dirac_cli::config::{parse_config, RunConfig};
use radial_dirac_cli::{commands, CliError};

#[derive(Parser)]
#[command(name = "radial-dirac", version, about = "Radial nonlinear Dirac simulations and virial diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured model and write timeseries.csv, snapshots.jsonl and meta.json.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        /// Overrides output.dir.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check weight, integration-by-parts and virial identities; writes residuals.csv.
    VerifyIdentities {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check the explicit static solution and its sign convention; writes static.csv and convention.json.
    VerifyStatic {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Pure-power runs over a grid of powers and amplitudes; writes sweep.csv.
    Sweep {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        powers: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        amplitudes: Vec<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Local decay diagnostics from the snapshots of a finished run; writes decay.csv and decay.json.
    DecayReport {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// Defaults to the run directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config(&text).map_err(|e| {
        let msg = match e {
            radial_dirac::Error::Config(m) => m,
            other => other.to_string(),
        };
        match path {
            Some(p) => CliError::Config(format!("{}: {msg}", p.display())),
            None => CliError::Config(msg),
        }
    })
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(Some(&config))?;
            let run = commands::run(&cfg, &out_dir(&cfg, out))?;
            println!(
                "{} recordings, mass drift {:e}, energy drift {}",
                run.len(),
                run.mass_drift(),
                run.energy_drift().map_or("n/a".into(), |d| format!("{d:e}"))
            );
        }
        Command::VerifyIdentities { config, out } => {
            let cfg = load(config.as_deref())?;
            let checks = commands::verify_identities(&cfg, &out_dir(&cfg, out))?;
            println!("{} identity checks passed", checks.len());
        }
        Command::VerifyStatic { config, out } => {
            let cfg = load(config.as_deref())?;
            let rec = commands::verify_static(&cfg, &out_dir(&cfg, out))?;
            println!(
                "{}: residual {:e}, order {:.2}, separation {:e}",
                rec.selected, rec.selected_residual, rec.refinement_order, rec.separation
            );
        }
        Command::Sweep { config, powers, amplitudes, out } => {
            let cfg = load(config.as_deref())?;
            let rows = commands::sweep(&cfg, &powers, &amplitudes, &out_dir(&cfg, out))?;
            println!("{} sweep runs", rows.len());
        }
        Command::DecayReport { run_dir, radii, out } => {
            let out = out.unwrap_or_else(|| run_dir.clone());
            let rep = commands::decay_report(&run_dir, radii.as_deref(), &out)?;
            println!("{} snapshots, domination holds: {}", rep.times.len(), rep.domination_holds);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
