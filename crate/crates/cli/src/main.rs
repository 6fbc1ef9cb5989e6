//! Command-line runner for the phase-distribution experiments.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Table1(a) => commands::table1(&a),
        Command::Fig2(a) => commands::fig2(&a),
        Command::Fig3(a) => commands::fig3(&a),
        Command::ToneExperiment(a) => commands::tone_experiment(&a),
        Command::AlphaSweep(a) => commands::alpha_sweep(&a),
        Command::QuantExperiment(a) => commands::quant_experiment(&a),
        Command::Perturb(a) => commands::perturb(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
