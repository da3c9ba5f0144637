//! Batch front end for the coupling-capacity toolkit: generates channel
//! files, solves and sweeps the multiplier program, and reruns the numerical
//! validation protocols as CSV-producing commands.
//!
//! Exit codes: 0 success, 2 a validation check failed, 3 input error.

mod capacity_cmd;
mod channel_cmd;
mod io;
mod util;
mod validate_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::io::Units;

#[derive(Parser)]
#[command(
    name = "sicap",
    version,
    about = "Local-approximation toolkit for secrecy coupling capacity"
)]
struct Cli {
    /// Units for information-valued output columns.
    #[arg(long, value_enum, global = true, default_value_t = Units::Nats)]
    units: Units,
    /// Output directory; defaults to $SICAP_OUT_DIR, then the working directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect wiretap channel files.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Solve the multiplier program and sweep its budgets.
    #[command(subcommand)]
    Capacity(CapacityCmd),
    /// Rerun a validation protocol and gate on its tolerances.
    #[command(subcommand)]
    Validate(ValidateCmd),
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Write a binary symmetric or quantized-AWGN wiretap pair as JSON.
    Gen(channel_cmd::GenArgs),
    /// Print alphabet sizes, marginals, the exact mutual informations, and
    /// the restricted commutator norm of a channel file.
    Inspect {
        #[arg(long)]
        channel: PathBuf,
    },
}

#[derive(Subcommand)]
enum CapacityCmd {
    /// Solve one budget pair under both program forms.
    Solve(capacity_cmd::SolveArgs),
    /// Sweep the leakage budget at a fixed rate.
    SweepTheta(capacity_cmd::SweepThetaArgs),
    /// Sweep the leakage-to-rate ratio and report normalized values.
    SweepRatio(capacity_cmd::SweepRatioArgs),
    /// Enumerate axis and interior-vertex candidates for one budget pair.
    Regimes(capacity_cmd::RegimesArgs),
}

#[derive(Subcommand)]
enum ValidateCmd {
    /// Fast LP solver against exhaustive vertex enumeration on a seeded
    /// channel family.
    Table1(validate_cmd::Table1Args),
    /// Primal ascent against the dual value across message cardinalities.
    Table2(validate_cmd::Table2Args),
    /// Stationarity pricing identity on binary-family sweeps.
    Kkt(validate_cmd::KktArgs),
    /// Bottleneck curve saturation and small-rate slope.
    Ib(validate_cmd::IbArgs),
    /// Contraction coefficient: closed form, quadratic bound, exact sandwich.
    Contraction(validate_cmd::ContractionArgs),
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let units = cli.units;
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Channel(cmd) => {
            match cmd {
                ChannelCmd::Gen(args) => channel_cmd::gen(args, units, out_dir)?,
                ChannelCmd::Inspect { channel } => channel_cmd::inspect(&channel, units)?,
            }
            Ok(true)
        }
        Command::Capacity(cmd) => {
            match cmd {
                CapacityCmd::Solve(args) => capacity_cmd::solve(args, units, out_dir)?,
                CapacityCmd::SweepTheta(args) => capacity_cmd::sweep_theta(args, units, out_dir)?,
                CapacityCmd::SweepRatio(args) => capacity_cmd::sweep_ratio(args, units, out_dir)?,
                CapacityCmd::Regimes(args) => capacity_cmd::regimes(args, units, out_dir)?,
            }
            Ok(true)
        }
        Command::Validate(cmd) => match cmd {
            ValidateCmd::Table1(args) => validate_cmd::table1(args, units, out_dir),
            ValidateCmd::Table2(args) => validate_cmd::table2(args, units, out_dir),
            ValidateCmd::Kkt(args) => validate_cmd::kkt(args, units, out_dir),
            ValidateCmd::Ib(args) => validate_cmd::ib(args, units, out_dir),
            ValidateCmd::Contraction(args) => validate_cmd::contraction(args, units, out_dir),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed; real
            // parse failures are input errors.
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
