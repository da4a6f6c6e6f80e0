use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use upblock_cli::{run, Command};

/// Two-mode cavity QED simulator with a single quantum-dot transition.
#[derive(Parser, Debug)]
#[command(name = "upblock", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// TOML configuration file; defaults apply to every missing key.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set system.g_ghz=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Operating point for g2zero/g2tau: arrow-A, arrow-B, arrow-C or arrow-D.
    #[arg(long)]
    preset: Option<String>,

    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Photon cutoff per cavity mode.
    #[arg(long)]
    n_max: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.set;
    if let Some(p) = cli.preset {
        overrides.push(format!("output={{kind=\"preset\", preset=\"{p}\"}}"));
    }
    if let Some(o) = cli.out {
        overrides.push(format!("output_dir={}", toml_string(&o.to_string_lossy())));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("solver.workers={w}"));
    }
    if let Some(n) = cli.n_max {
        overrides.push(format!("solver.n_max={n}"));
    }
    let code = run(cli.command, cli.config.as_deref(), &overrides);
    ExitCode::from(code as u8)
}

fn toml_string(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
