//! Command-line front end for the flmm library: weight-accuracy studies,
//! convolution benchmarks, convergence tables, and reaction-diffusion runs.

pub mod bench;
pub mod config;
pub mod fode_cmd;
pub mod rd_cmd;
pub mod weights_cmd;

use config::Config;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter combinations; exit code 2.
    Validation(String),
    /// Failures while running; exit code 1.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid usage: {msg}"),
            CliError::Runtime(msg) => write!(f, "run failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<flmm::Error> for CliError {
    fn from(e: flmm::Error) -> Self {
        match e {
            flmm::Error::InvalidParameter(_)
            | flmm::Error::UnsupportedOrder(_)
            | flmm::Error::UnsupportedForMethodII(_)
            | flmm::Error::InvalidGeneratingFunction(_) => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

pub const USAGE: &str = "usage: flmm <weights|bench|fode|rd> [--flag value ...]
  weights  exact vs fast-approximated convolution weights (CSV)
  bench    direct vs fast convolution timing and accuracy report
  fode     convergence table for the linear fractional relaxation problem
  rd       1-D fractional activator-inhibitor simulation
common flags: --config FILE --out DIR --gf NAME --alpha X --sigma X --tau X
              --T X --Q N --talbot-N N --B N --n0 N --engine NAME --m LIST
              --seed N --jobs N";

/// Parse the generating-function flag.
pub fn parse_gf(name: &str) -> Result<flmm::GeneratingFunction, CliError> {
    use flmm::GeneratingFunction as Gf;
    let gf = match name {
        "ftrap" => Gf::ftrap(),
        _ => {
            let (family, p) = name.split_at(name.len().saturating_sub(1));
            let order: u8 = p
                .parse()
                .map_err(|_| CliError::Validation(format!("unknown generating function '{name}'")))?;
            match family {
                "fbdf" => Gf::fbdf(order)?,
                "gngf" => Gf::gngf(order)?,
                _ => {
                    return Err(CliError::Validation(format!(
                        "unknown generating function '{name}' (expected fbdf1..6, gngf1..6, ftrap)"
                    )))
                }
            }
        }
    };
    Ok(gf)
}

/// Dispatch a full argument list (without the program name).
pub fn run(args: &[String]) -> Result<(), CliError> {
    let Some((command, rest)) = args.split_first() else {
        return Err(CliError::Validation("missing subcommand".into()));
    };
    let cfg = Config::from_args(rest)?;
    match command.as_str() {
        "weights" => weights_cmd::run(cfg),
        "bench" => bench::run(cfg),
        "fode" => fode_cmd::run(cfg),
        "rd" => rd_cmd::run(cfg),
        other => Err(CliError::Validation(format!("unknown subcommand '{other}'"))),
    }
}

pub(crate) fn write_output(
    dir: &std::path::Path,
    name: &str,
    contents: &str,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}
