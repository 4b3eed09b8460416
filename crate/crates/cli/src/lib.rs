//! Command-line front end for `serrin-core`.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! code: 0 when every check whose hypotheses hold passes, 1 when one of them
//! fails, 2 for usage errors and 3 when a solver fails. Reports go to the
//! output stream (or `--output`), diagnostics to the error stream.

use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use args::{Cli, Command};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IDENTITY_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Solver(m) => f.write_str(m),
        }
    }
}

impl From<serrin_core::Error> for CliError {
    fn from(e: serrin_core::Error) -> Self {
        use serrin_core::Error as E;
        match e {
            E::Positivity(_) | E::SolverFailure(_) | E::Resonance(_) | E::Pole(_) => CliError::Solver(e.to_string()),
            E::Domain(_) | E::DegenerateMetric { .. } | E::Usage(_) | E::Unsupported(_) | E::Parse(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

/// Rendered output of a subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

impl Outcome {
    pub fn new(text: String, pass: bool) -> Outcome {
        Outcome { text, pass }
    }
}

/// Parses `argv` (program name first), applying a config file if given.
pub fn parse_args(argv: &[String]) -> Result<Cli, clap::Error> {
    let first = Cli::try_parse_from(argv)?;
    let Some(path) = first.config.clone() else {
        return Ok(first);
    };
    let name = first.command.name();
    let text = std::fs::read_to_string(&path).map_err(|e| {
        clap::Error::raw(
            clap::error::ErrorKind::Io,
            format!("cannot read config {}: {e}\n", path.display()),
        )
    })?;
    let flags = config::parse(&text)
        .and_then(|entries| config::to_flags(name, &entries))
        .map_err(|m| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{m}\n")))?;
    Cli::try_parse_from(config::splice(argv, name, flags))
}

fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::VerifyBall(a) => commands::verify_ball(a),
        Command::VerifySlab(a) => commands::verify_slab(a),
        Command::VerifyFem(a) => commands::verify_fem_cmd(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Mesh(a) => commands::mesh(a),
        Command::Catalog(a) => commands::catalog(a),
    }
}

fn output_path(cmd: &Command) -> Option<&std::path::Path> {
    match cmd {
        Command::VerifyBall(a) => a.output.output.as_deref(),
        Command::VerifySlab(a) => a.output.output.as_deref(),
        Command::VerifyFem(a) => a.output.output.as_deref(),
        Command::Sweep(a) => a.output.output.as_deref(),
        Command::Mesh(a) => a.output.as_deref(),
        Command::Catalog(a) => a.output.as_deref(),
    }
}

/// Runs the CLI with explicit streams.
pub fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_PASS
            };
        }
    };
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "serrin {}: {e}", cli.command.name());
            return e.exit_code();
        }
    };
    let written = match output_path(&cli.command) {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out
            .write_all(outcome.text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(m) = written {
        let _ = writeln!(err, "serrin: {m}");
        return EXIT_USAGE;
    }
    if outcome.pass {
        EXIT_PASS
    } else {
        let _ = writeln!(err, "serrin {}: at least one identity failed", cli.command.name());
        EXIT_IDENTITY_FAILURE
    }
}

/// Runs the CLI on the process streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(&argv, &mut stdout.lock(), &mut stderr.lock())
}
