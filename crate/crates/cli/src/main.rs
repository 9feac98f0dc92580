//! `polystar`: Lane–Emden profile, Chandrasekhar minimizers, collapse sweeps and HFB bounds.
//!
//! Exit codes: 0 success, 1 usage, 2 numerical failure, 3 domain violation.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::Failure;
use crate::config::{GlobalArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "polystar", version, about = "Near-critical collapse of relativistic Fermi stars")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index-3 Lane–Emden solution and the constants sigma_f, tau_c, Lambda
    LaneEmden(commands::LaneEmdenArgs),
    /// Minimizer of the Chandrasekhar functional at one coupling
    Chandra(commands::ChandraArgs),
    /// Sweep towards tau_c and fit the collapse law
    Collapse(commands::CollapseArgs),
    /// Two-sided bounds on the HFB energy per particle
    HfbBounds(commands::HfbArgs),
    /// HLS deficit on seeded random radial densities
    HlsCheck(commands::HlsArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let config = RunConfig::from(&cli.global);
    let outcome = match &cli.command {
        Command::LaneEmden(a) => commands::lane_emden(&config, a),
        Command::Chandra(a) => commands::chandra(&config, a),
        Command::Collapse(a) => commands::collapse(&config, a),
        Command::HfbBounds(a) => commands::hfb_bounds(&config, a),
        Command::HlsCheck(a) => commands::hls_check(&config, a),
    };
    match outcome {
        Ok(report) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let written = report.write(&config, !cli.global.no_meta, &mut out).and_then(|_| out.flush());
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write report: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
