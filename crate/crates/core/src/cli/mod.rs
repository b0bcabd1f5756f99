//! The `fgk` command line: JSON configuration in, JSON report out.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use commands::{cmd_extend_family, cmd_kp_check, cmd_solve_f, cmd_verify, Component, Report, Summary};
pub use config::{ChartConfig, FlavorName};

use crate::error::{Error, Result};

/// Environment variable that overrides `rng_seed`.
pub const SEED_VAR: &str = "FGK_SEED";

#[derive(Debug, Parser)]
#[command(name = "fgk", version, about = "Exact checks for formal symplectic groupoids of Kähler-Poisson charts")]
struct Cli {
    /// Include the wall time in the report; this makes reports differ between runs.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the Kähler-Poisson conditions (complex) or the Jacobi identity (real).
    KpCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve for the Hamiltonian F and print it by fiber degree.
    SolveF {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the groupoid, star-product and word-calculus suites.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Extend a coherent family of polydifferential operators by one operator.
    ExtendFamily {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        family: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path, seed: Option<&str>) -> Result<ChartConfig> {
    let mut config = ChartConfig::parse(&read(path)?)?;
    config.apply_seed_override(seed)?;
    Ok(config)
}

/// Run the command line and return the exit status: 0 when every check passes, 1 when
/// any check fails, 2 for usage and configuration errors.
pub fn run<I, T>(args: I, seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let start = Instant::now();
    let result = match &cli.command {
        Command::KpCheck { config } => load_config(config, seed).and_then(|c| cmd_kp_check(&c)),
        Command::SolveF { config } => load_config(config, seed).and_then(|c| cmd_solve_f(&c)),
        Command::Verify { config, .. } => load_config(config, seed).and_then(|c| cmd_verify(&c)),
        Command::ExtendFamily { config, family } => {
            load_config(config, seed).and_then(|c| cmd_extend_family(&c, &read(family)?))
        }
    };
    let mut report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "fgk: {e}");
            return 2;
        }
    };
    if cli.timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    let json = report.to_json();
    let written = match &cli.command {
        Command::Verify { json: Some(path), .. } => std::fs::write(path, &json).map(|_| {
            let s = report.summary;
            let _ = writeln!(err, "{} pass, {} fail, {} skipped", s.pass, s.fail, s.skipped);
        }),
        _ => out.write_all(json.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "fgk: cannot write report: {e}");
        return 2;
    }
    report.exit_code()
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let seed = std::env::var(SEED_VAR).ok();
    run(
        std::env::args_os(),
        seed.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
