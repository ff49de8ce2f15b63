//! `carlitz` command-line front end.
//!
//! - `compute <target>`: print one object (Goss polynomial, zeta value, u-expansion, ...)
//! - `verify <suite>`: run checks; exit 0 iff every non-conjectural item passes
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage, 3 precision infeasible.

mod compute;
mod config;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::{ConfigArgs, Format};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PRECISION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "carlitz", version, about = "Carlitz-module computations and identity checks")]
struct Cli {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compute and print one object.
    Compute {
        #[command(subcommand)]
        target: compute::Target,
    },
    /// Run a verification suite: harmonic, constants, bernoulli, petrov, hecke, an identity item, conjE or all.
    Verify { suite: String },
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, msg: msg.into() }
    }
    pub fn precision(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_PRECISION, msg: msg.into() }
    }
}

impl From<carlitz::Error> for CliError {
    fn from(e: carlitz::Error) -> Self {
        use carlitz::Error as E;
        let code = match e {
            E::Precision(_) | E::Divergence(_) => EXIT_PRECISION,
            E::Parse(_) | E::Invalid(_) | E::UnknownVariable(_) | E::FieldParams { .. } => EXIT_USAGE,
            _ => EXIT_FAIL,
        };
        CliError { code, msg: e.to_string() }
    }
}

fn emit(format: Format, v: &Value, text: &str) {
    let body = match format {
        Format::Json => serde_json::to_string_pretty(v).expect("serializable"),
        Format::Text => text.to_string(),
    };
    // a closed pipe is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{body}");
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let cfg = cli.cfg.resolve()?;
    let version = env!("CARGO_PKG_VERSION");
    match &cli.cmd {
        Cmd::Compute { target } => {
            let c = compute::run(target, &cfg)?;
            let v = json!({ "target": c.target, "params": cfg.params(), "version": version, "result": c.result });
            emit(cfg.format, &v, &c.text);
            Ok(0)
        }
        Cmd::Verify { suite } => {
            let items = verify::run(&cfg, suite)?;
            let failed: Vec<&str> = items.iter().filter(|i| i.gating_failure()).map(|i| i.name.as_str()).collect();
            let v = json!({
                "suite": suite,
                "params": cfg.params(),
                "suite_version": version,
                "items": items.iter().map(|i| i.to_json(cfg.timings)).collect::<Vec<_>>(),
                "passed": failed.is_empty(),
            });
            let mut lines: Vec<String> = items
                .iter()
                .map(|i| {
                    let flag = if i.conjecture { " [conjecture evidence]" } else { "" };
                    let res = i.residual_valuation.map_or("-".to_string(), |r| r.to_string());
                    let time = if cfg.timings { format!(" {:.3}s", i.wall_time) } else { String::new() };
                    format!("{:<8} {} residual {res}{flag}{time}", i.status.as_str().to_uppercase(), i.name)
                })
                .collect();
            lines.push(match failed.first() {
                None => format!("{suite}: all non-conjectural items pass"),
                Some(first) => format!("{suite}: {} failing, first {first}", failed.len()),
            });
            emit(cfg.format, &v, &lines.join("\n"));
            if let Some(first) = failed.first() {
                eprintln!("verification failed: {first}");
                return Ok(EXIT_FAIL);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
