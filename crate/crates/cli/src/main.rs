//! `fermipair` command-line front end.
//!
//! Exit status: 0 on success, 2 when flags, config or input files are
//! invalid, 1 for any other failure.

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod manifest;

#[derive(Parser)]
#[command(
    name = "fermipair",
    version,
    about = "Spin entanglement of fermion pairs from a degenerate Fermi gas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spin state and entanglement of a pair detected at separation x.
    PairState(commands::PairStateArgs),
    /// Tabulate kernel and entanglement measures over an x × σ grid (CSV).
    Scan(commands::ScanArgs),
    /// Largest entangled separation for each detector width.
    EntDistance(commands::EntDistanceArgs),
    /// Coincidence Monte Carlo of a storage-vessel run.
    Simulate(commands::SimulateArgs),
    /// Reconstruct the pair state from a counts file.
    Tomography(commands::TomographyArgs),
    /// Re-run the command recorded in a manifest.
    Replay(commands::ReplayArgs),
}

/// Bad user input: flags, config values or data files.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use fermipair::Error as E;
    for cause in err.chain() {
        if cause.is::<Invalid>()
            || cause.is::<toml::de::Error>()
            || cause.is::<serde_json::Error>()
            || cause.is::<csv::Error>()
        {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Io(_) | E::QuadratureDiverged { .. } | E::NotBracketed { .. } => 1,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() {
            return 1;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::PairState(a) => commands::cmd_pair_state(a),
        Command::Scan(a) => commands::cmd_scan(a),
        Command::EntDistance(a) => commands::cmd_ent_distance(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Tomography(a) => commands::cmd_tomography(a),
        Command::Replay(a) => commands::cmd_replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
