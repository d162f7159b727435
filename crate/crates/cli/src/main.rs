//! `gge-thermo`: sweeps and checks for thermodynamics with several conserved
//! charges.
//!
//! Exit codes: 0 on success, 1 for invalid input or parameters, 2 when a
//! numerical routine fails to converge.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::Params;

#[derive(Parser)]
#[command(name = "gge-thermo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file with parameter defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Maximum-entropy state for given charge expectations.
    GgeSolve,
    /// Energy/charge cost trade-off curve of the two-bath erasure.
    ErasureCurve,
    /// Finite-step simulation of the two-bath erasure protocol.
    ErasureSimulate,
    /// Erasure cost against a spin bath with discrete level steps.
    DiscreteCost,
    /// Ergotropy and (n-copy) passivity of a state.
    PassivityCheck,
    /// Choi matrix and complete positivity of a qubit Bloch map.
    CpCheck,
    /// Term-by-term check of the multi-charge Landauer balance.
    LandauerVerify,
    /// Charge conservation of a dilation unitary and the resulting channel.
    ThermalopCheck,
    /// Trade-off curves, discrete costs and a summary of the headline checks.
    Demo,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("GGE_THERMO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("GGE_THERMO_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads().map_err(Failure::Invalid)?;
    let params = match &cli.config {
        Some(path) => cli.params.over(Params::load(path).map_err(Failure::Invalid)?),
        None => cli.params,
    };
    match cli.command {
        Command::GgeSolve => commands::gge_solve(&params),
        Command::ErasureCurve => commands::erasure_curve(&params),
        Command::ErasureSimulate => commands::erasure_simulate(&params),
        Command::DiscreteCost => commands::discrete_cost(&params),
        Command::PassivityCheck => commands::passivity_check(&params),
        Command::CpCheck => commands::cp_check(&params),
        Command::LandauerVerify => commands::landauer_verify(&params),
        Command::ThermalopCheck => commands::thermalop_check(&params),
        Command::Demo => commands::demo(&params),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NonConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
