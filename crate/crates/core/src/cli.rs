//! Command-line front end.
//!
//! Exit codes: 0 for the affirmative verdict, 1 for the negative one, 2 for
//! usage and parse errors, 3 for internal errors (exhausted step budget or
//! an oracle disagreement).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::alc::KnowledgeBase;
use crate::dlclauses::clausify;
use crate::oracle::bounded_sat_with_globals;
use crate::sdl::{parse_formula, parse_system, Formula, NormativeSystem, ParseError};
use crate::tasks::{
    consistency_kb, guarantee_kb, independence_kb, Outcome, Reasoner, TaskError, TaskResult,
    Witness,
};

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Worlds searched by `--oracle`.
const ORACLE_WORLDS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Alc,
    Dlclauses,
}

#[derive(Debug, Parser)]
#[command(
    name = "deontic",
    version,
    about = "Consistency, independence and guarantee checks for deontic normative systems"
)]
struct Cli {
    /// Print the intermediate form and stop.
    #[arg(long, value_enum, global = true)]
    emit: Option<Emit>,
    /// Print the refutation when the verdict rests on unsatisfiability.
    #[arg(long, global = true)]
    trace: bool,
    /// Print the model when the verdict rests on satisfiability.
    #[arg(long, global = true)]
    model: bool,
    /// Maximal number of rule applications.
    #[arg(long, global = true, default_value_t = crate::hypertableau::DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Is the normative system consistent?
    Check {
        file: PathBuf,
        /// Cross-check the verdict against bounded Kripke-model enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// Is formula number LINE independent of the others?
    Independence {
        file: PathBuf,
        #[arg(long)]
        line: usize,
    },
    /// Does ASSUME guarantee GOAL in every ideal world?
    Guarantee {
        file: PathBuf,
        #[arg(long)]
        assume: String,
        #[arg(long)]
        goal: String,
    },
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<TaskError> for Failure {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::IndexOutOfRange { .. } => Failure::Usage(e.to_string()),
            TaskError::Solve(_) => Failure::Internal(e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<NormativeSystem, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_system(&name, &text).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

fn formula_arg(flag: &str, text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e: ParseError| Failure::Usage(format!("--{flag}: {e}")))
}

fn emit(out: &mut dyn Write, kind: Emit, kb: &KnowledgeBase) -> std::io::Result<()> {
    match kind {
        Emit::Alc => write!(out, "{kb}"),
        Emit::Dlclauses => write!(out, "{}", clausify(kb)),
    }
}

fn report(out: &mut dyn Write, cli: &Cli, result: &TaskResult) -> std::io::Result<()> {
    writeln!(out, "{}", result.outcome)?;
    match &result.witness {
        Witness::Refutation(trace) if cli.trace => write!(out, "{trace}")?,
        Witness::Model(model) if cli.model => write!(out, "{model}")?,
        _ => {}
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let reasoner = Reasoner::with_budget(cli.budget);
    let (system, kb) = match &cli.command {
        Command::Check { file, .. } => {
            let n = load(file)?;
            let kb = consistency_kb(&n);
            (n, kb)
        }
        Command::Independence { file, line } => {
            let n = load(file)?;
            let kb = independence_kb(&n, *line)?;
            (n, kb)
        }
        Command::Guarantee { file, assume, goal } => {
            let n = load(file)?;
            let kb = guarantee_kb(
                &n,
                &formula_arg("assume", assume)?,
                &formula_arg("goal", goal)?,
            );
            (n, kb)
        }
    };

    if let Some(kind) = cli.emit {
        emit(out, kind, &kb).map_err(|e| Failure::Internal(e.to_string()))?;
        return Ok(EXIT_POSITIVE);
    }

    let (sat, unsat) = match cli.command {
        Command::Check { .. } => (Outcome::Consistent, Outcome::Inconsistent),
        Command::Independence { .. } => (Outcome::Independent, Outcome::NotIndependent),
        Command::Guarantee { .. } => (Outcome::NotGuaranteed, Outcome::Guaranteed),
    };
    let result = reasoner.decide(&kb, sat, unsat)?;
    report(out, cli, &result).map_err(|e| Failure::Internal(e.to_string()))?;

    if let Command::Check { oracle: true, .. } = cli.command {
        let local = Formula::conjunction(system.local_formulae().cloned());
        let globals: Vec<Formula> = system.global_formulae().cloned().collect();
        let oracle_sat = bounded_sat_with_globals(&local, &globals, ORACLE_WORLDS).is_sat();
        let oracle_outcome = if oracle_sat { sat } else { unsat };
        let agrees = oracle_outcome == result.outcome;
        writeln!(
            out,
            "oracle: {oracle_outcome} ({})",
            if agrees { "agrees" } else { "DISAGREES" }
        )
        .map_err(|e| Failure::Internal(e.to_string()))?;
        if !agrees {
            return Ok(EXIT_INTERNAL);
        }
    }

    Ok(if result.outcome.is_positive() {
        EXIT_POSITIVE
    } else {
        EXIT_NEGATIVE
    })
}

/// Runs the command line `argv` (including the program name).
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_POSITIVE
            };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Internal(msg)) => {
            let _ = writeln!(err, "internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("deontic").chain(args.iter().copied());
        let code = run_cli(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn missing_subcommand_is_usage_error() {
        let (code, _, err) = run_args(&[]);
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
    }

    #[test]
    fn unreadable_file_is_usage_error() {
        let (code, _, err) = run_args(&["check", "/nonexistent/x.sdl"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("cannot read"));
    }

    #[test]
    fn bad_formula_argument() {
        let (code, _, err) =
            run_args(&["guarantee", "/dev/null", "--assume", "o &", "--goal", "g"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--assume"), "{err}");
    }

    #[test]
    fn empty_file_is_consistent() {
        let (code, out, _) = run_args(&["check", "/dev/null"]);
        assert_eq!(code, EXIT_POSITIVE);
        assert_eq!(out, "CONSISTENT\n");
    }

    #[test]
    fn tiny_budget_is_internal_error() {
        let (code, _, err) = run_args(&["check", "/dev/null", "--budget", "0"]);
        assert_eq!(code, EXIT_INTERNAL);
        assert!(err.contains("budget"));
    }
}
