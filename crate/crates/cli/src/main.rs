use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use photon_lattice::config::{self, RunConfig};
use photon_lattice::spectral::eigendecompose;
use photon_lattice::verify::{self, Fault};
use photon_lattice::{presets, trace, Error};

/// Propagation of non-classical light through tight-binding waveguide lattices.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the eigenvalues and eigenvectors of the lattice in a config as CSV.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample photon numbers, fidelities and correlations along the z grid.
    Propagate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in acceptance checks.
    Verify {
        /// Corrupt the Fock-engine lattice to show that checks can fail.
        #[arg(long, value_name = "FAULT")]
        inject_fault: Option<Fault>,
    },
    /// List the bundled figure configs, or print one.
    Presets { name: Option<String> },
}

enum Failure {
    Verification,
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn read_config(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path) -> impl Fn(Failure) -> Failure + '_ {
    move |f| match f {
        Failure::Config(m) => Failure::Config(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum { config } => {
            let text = read_config(&config)?;
            let spec = config::lattice_from_json(&text)
                .and_then(|l| l.build())
                .map_err(|e| in_file(&config)(e.into()))?;
            print!("{}", trace::spectrum_csv(&eigendecompose(&spec)?));
        }
        Command::Propagate { config, out } => {
            let text = read_config(&config)?;
            let run_config = RunConfig::from_json(&text).map_err(|e| in_file(&config)(e.into()))?;
            let t = trace::propagate(&run_config)?;
            fs::write(&out, t.to_csv())
                .map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            info!(
                "{} rows, engine {}, tail mass {:.3e}{}",
                t.rows.len(),
                t.engine,
                t.tail_mass,
                t.engine_gap
                    .map(|g| format!(", engine gap {g:.3e}"))
                    .unwrap_or_default()
            );
        }
        Command::Verify { inject_fault } => {
            let report = verify::run(inject_fault);
            println!("{report}");
            if !report.all_passed() {
                for c in report.failures() {
                    eprintln!("failed: {} {}", c.id, c.name);
                }
                return Err(Failure::Verification);
            }
        }
        Command::Presets { name: None } => {
            for name in presets::names() {
                println!("{name}");
            }
        }
        Command::Presets { name: Some(name) } => {
            let text = presets::text(&name)
                .ok_or_else(|| Failure::Config(format!("no preset named {name:?}")))?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
