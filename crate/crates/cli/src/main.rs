mod commands;
mod config;
mod error;
mod render;

use clap::{Parser, Subcommand};
use config::{Flags, RunConfig};
use error::Result;
use std::process::ExitCode;

/// Bernstein-gamma functions, densities and moment determinacy of
/// multiplicative convolution semigroups.
#[derive(Debug, Parser)]
#[command(name = "bgsemi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// φ, φ' and the inverse ϕ on the grid
    Phi,
    /// W, W^t, γ_φ and C_φ on the real grid
    Wgamma,
    /// Integer moments up to --nmax
    Moments,
    /// Density (or its n-th derivative) of ν_t on the grid
    Density,
    /// Tail asymptotics compared with the inverted density
    Asym,
    /// Bounds on the threshold index
    Threshold,
    /// Determinacy of ν_t
    Verdict,
    /// Determinacy of the power X^t
    PowerVerdict,
    /// Acceptance suite; exit 0 iff every criterion passes
    Selftest,
    /// Worked-example reproduction table
    Examples,
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::from_flags(&cli.flags)?;
    let report = match cli.command {
        Command::Phi => commands::phi(&cfg)?,
        Command::Wgamma => commands::wgamma(&cfg)?,
        Command::Moments => commands::moments(&cfg)?,
        Command::Density => commands::density(&cfg)?,
        Command::Asym => commands::asym(&cfg)?,
        Command::Threshold => commands::threshold(&cfg)?,
        Command::Verdict => commands::verdict(&cfg)?,
        Command::PowerVerdict => commands::power_verdict(&cfg)?,
        Command::Examples => commands::examples(&cfg)?,
        Command::Selftest => {
            let (text, status) = commands::selftest();
            render::emit(cfg.out(), &text)?;
            return status;
        }
    };
    render::emit(cfg.out(), &report.render(cfg.format())?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
