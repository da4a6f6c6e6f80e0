//! Command-line driver: configuration, subcommand dispatch and result files.

use std::path::Path;

use clap::ValueEnum;
use thiserror::Error;

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod selftest;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<upblock::Error> for CliError {
    fn from(e: upblock::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Steady-state populations and amplitudes (JSON).
    Steady,
    /// Bare and convolved g2(0) of the selected output mode (JSON).
    G2zero,
    /// g2(tau) of the selected output mode, bare and convolved (CSV).
    G2tau,
    /// g2(0) map over linear input and detected polarization (CSV).
    Fig2,
    /// Waveplate maps and g2(tau) at the bunching and antibunching points (CSV).
    Fig3,
    /// Optimized output brightness versus input polarization (CSV).
    Brightness,
    /// Two-photon cancellation table and output photon statistics (CSV).
    Squeeze,
    /// Oracle checks; exits non-zero on any failure.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::G2zero => "g2zero",
            Command::G2tau => "g2tau",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Brightness => "brightness",
            Command::Squeeze => "squeeze",
            Command::Selftest => "selftest",
        }
    }
}

/// Loads the configuration, runs `command` and returns the process exit
/// code: 0 on success, 1 for configuration errors, 2 for runtime failures.
pub fn run(command: Command, config_path: Option<&Path>, overrides: &[String]) -> i32 {
    match execute(command, config_path, overrides) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("upblock {}: {e}", command.name());
            e.exit_code()
        }
    }
}

fn execute(command: Command, config_path: Option<&Path>, overrides: &[String]) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let written = match command {
        Command::Steady => commands::steady(&cfg)?,
        Command::G2zero => commands::g2zero(&cfg)?,
        Command::G2tau => commands::g2tau(&cfg)?,
        Command::Fig2 => commands::fig2(&cfg)?,
        Command::Fig3 => commands::fig3(&cfg)?,
        Command::Brightness => commands::brightness(&cfg)?,
        Command::Squeeze => commands::squeeze(&cfg)?,
        Command::Selftest => {
            let checks = selftest::run_all();
            let failed = checks.iter().filter(|c| !c.pass).count();
            for c in &checks {
                println!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            if failed > 0 {
                return Err(CliError::Runtime(format!("{failed} of {} checks failed", checks.len())));
            }
            Vec::new()
        }
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
