//! Command-line front end: grid evaluation, verification suites and JSON/CSV
//! export of stargenfunctions.

pub mod args;
pub mod commands;
pub mod output;
pub mod settings;
pub mod verify;

use serde_json::json;
use stargen::StargenError;
use thiserror::Error;

use args::{Command, Format, VerifyArgs};
use settings::{ConfigFile, RunConfig};

/// Process exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] StargenError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Core(
                StargenError::InvalidConfig(_)
                | StargenError::Index(_)
                | StargenError::DimensionMismatch { .. }
                | StargenError::Unsupported(_),
            ) => EXIT_USAGE,
            _ => EXIT_CHECK_FAILED,
        }
    }
}

/// Runs one subcommand; `Ok(false)` means a check failed.
pub fn run(command: &Command) -> Result<bool, CliError> {
    match command {
        Command::Stargen(a) => commands::cmd_stargen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Evolve(a) => commands::cmd_evolve(a),
        Command::Export(a) => commands::cmd_export(a),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, CliError> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let rc = RunConfig::resolve(&args.common, &file)?;
    let suite = args.suite.clone().or_else(|| file.suite.clone()).unwrap_or_else(|| "all".into());
    let reports = verify::run(&rc, &suite, args.max_n.or(file.max_n))?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    let text = match rc.format_or(Format::Json) {
        Format::Json => output::to_json(&json!({
            "suite": suite,
            "model": rc.model.kind,
            "config": rc.model.config,
            "pass": failed == 0,
            "reports": reports,
        })),
        Format::Csv => {
            let mut s = String::from("suite,check,max_abs,tolerance,pass\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},\"{}\",{},{},{}\n",
                    r.suite,
                    r.check.replace('"', "\"\""),
                    output::num(r.max_abs),
                    output::num(r.tolerance),
                    r.pass
                ));
            }
            s
        }
    };
    output::emit(rc.output.as_deref(), &text)?;
    eprintln!("verify {suite}: {} checks, {failed} failed", reports.len());
    Ok(failed == 0)
}
