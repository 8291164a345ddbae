//! `seqpd`: evaluate, optimize and sweep CHSH values built on squeezing-
//! extended quasi-probability distributions, dump QPD grids, and check the
//! closed forms against the Fock-space oracle.
//!
//! Exit codes: 0 success, 2 config error, 3 evaluation error, 4 oracle
//! failure (outside envelope, not converged, or mismatch).

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{Overrides, RunConfig};
use output::Output;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Eval(String),
    Oracle(String),
    /// A sweep with failed points; the rows are still written.
    Partial(Output, String),
    /// An oracle check that ran but disagreed; the report is still written.
    OracleMismatch(Output, String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Eval(_) | CliError::Partial(..) => 3,
            CliError::Oracle(_) | CliError::OracleMismatch(..) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "seqpd", version, about = "CHSH tests on squeezing-extended quasi-probability distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// B_CHSH for explicit settings.
    #[command(allow_negative_numbers = true)]
    Eval(Overrides),
    /// Maximize B_CHSH over the free settings of a scheme.
    #[command(allow_negative_numbers = true)]
    Optimize(Overrides),
    /// Optimize along an r or eta grid (CSV).
    #[command(allow_negative_numbers = true)]
    Sweep(Overrides),
    /// Single-mode QPD on a Re α × Im α grid (CSV).
    #[command(allow_negative_numbers = true)]
    Qpd(Overrides),
    /// Randomized agreement check of closed forms against the Fock oracle.
    #[command(allow_negative_numbers = true)]
    OracleCheck(Overrides),
}

type Handler = fn(&RunConfig) -> Result<Output, CliError>;

fn run(command: &Command) -> Result<(), CliError> {
    let (ov, cmd): (&Overrides, Handler) = match command {
        Command::Eval(o) => (o, commands::eval),
        Command::Optimize(o) => (o, commands::optimize),
        Command::Sweep(o) => (o, commands::sweep),
        Command::Qpd(o) => (o, commands::qpd),
        Command::OracleCheck(o) => (o, commands::oracle_check),
    };
    let cfg = RunConfig::load(ov)?;
    let path = cfg.path();
    let write = |out: &Output| {
        out.write(path).map_err(|e| CliError::Eval(format!("writing output: {e}")))
    };
    match cmd(&cfg) {
        Ok(out) => write(&out),
        Err(CliError::Partial(out, msg)) => {
            write(&out)?;
            Err(CliError::Eval(msg))
        }
        Err(CliError::OracleMismatch(out, msg)) => {
            write(&out)?;
            Err(CliError::Oracle(msg))
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Config(m) => format!("config error: {m}"),
                CliError::Eval(m) => format!("evaluation error: {m}"),
                CliError::Oracle(m) => format!("oracle error: {m}"),
                CliError::Partial(_, m) | CliError::OracleMismatch(_, m) => m.clone(),
            };
            eprintln!("seqpd: {msg}");
            ExitCode::from(e.code())
        }
    }
}
