//! `annspec` command-line front end.
//!
//! Every command writes `<out>/<name>.csv` and `<out>/<name>.json`, then prints
//! the JSON summary. Exit status is 0 on success, 1 for invalid input and 2
//! for numerical failures.

// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod output;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("annspec-out"))
}

fn execute(cli: &Cli) -> annspec::Result<()> {
    let out = out_dir(cli);
    let artifact = match &cli.command {
        Command::Solve(a) => commands::solve(a)?,
        Command::Bounds(a) => commands::bounds(a)?,
        Command::Caricature(a) => commands::caricature(a)?,
        Command::Hadamard(a) => commands::hadamard(a)?,
        Command::VdAudit(a) => commands::vd_audit(a)?,
        Command::PiAudit(a) => commands::pi_audit(a)?,
        Command::HeatKernel(a) => commands::heat_kernel(a)?,
        Command::BoxKernel(a) => commands::box_kernel(a)?,
        Command::HkeFit(a) => commands::hke_fit(a)?,
        Command::Sector(a) => commands::sector(a)?,
        Command::PerturbBox(a) => commands::perturb_box(a)?,
        Command::PerturbAnnulus(a) => commands::perturb_annulus(a)?,
        Command::Report(a) => report::report(a.inputs.as_deref().unwrap_or(&out))?,
    };
    let name = cli.command.name();
    if matches!(cli.command, Command::Report(_)) && !cli.quiet {
        report::print_table(&artifact);
    }
    let config = json!({ "seed": cli.seed, "args": serde_json::to_value(&cli.command).unwrap_or_default() });
    let summary = output::write(&out, cli.name.as_deref().unwrap_or(name), name, config, artifact)?;
    if !cli.quiet && !matches!(cli.command, Command::Report(_)) {
        print!("{}", output::to_json(&summary)?);
    }
    Ok(())
}

/// Runs one invocation and returns its exit status.
pub fn run(argv: Vec<OsString>) -> u8 {
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
