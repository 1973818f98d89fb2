//! Command-line front end.
//!
//! Exit status: 0 success, 1 runtime error (or a `check` mismatch),
//! 2 fuel exhausted (or an inconclusive `check`), 3 unreadable, malformed
//! or invalid input.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::dfa::{self, Machine};
use crate::fuel::DEFAULT_FUEL;
use crate::interp::{eval, EvalError, EvalOutcome};
use crate::lang::{free_vars, Env, Prog, Value};
use crate::naive::{peval_naive, PevalError};
use crate::postopt::inline_residual;
use crate::specialize::peval;
use crate::syntax::{parse_bindings, parse_program, pretty_expr, pretty_program, pretty_value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_FUEL: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "peval",
    version,
    about = "Evaluate and partially evaluate first-order functional programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct StaticArgs {
    /// Static bindings, e.g. `--static n=3` (repeatable; `a=1, b=2` also accepted).
    #[arg(long = "static", value_name = "BINDINGS")]
    pub bindings: Vec<String>,
    /// File of static bindings, one `name = literal` per line.
    #[arg(long, value_name = "PATH")]
    pub env_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a program.
    Run {
        program: PathBuf,
        /// Input bindings, e.g. `--env x=2` (repeatable).
        #[arg(long = "env", value_name = "BINDINGS")]
        bindings: Vec<String>,
        /// File of input bindings.
        #[arg(long, value_name = "PATH")]
        env_file: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Partially evaluate `main` by unfolding every call.
    PevalNaive {
        program: PathBuf,
        #[command(flatten)]
        statics: StaticArgs,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Write the residual program here instead of standard output.
        #[arg(short = 'o', value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Specialize a program to its static inputs.
    Peval {
        program: PathBuf,
        #[command(flatten)]
        statics: StaticArgs,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Skip inlining of non-recursive residual functions.
        #[arg(long)]
        no_inline: bool,
        /// Write the residual program here instead of standard output.
        #[arg(short = 'o', value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Compile a state machine by specializing its interpreter.
    CompileDfa {
        machine: PathBuf,
        /// Which interpreter encoding to specialize.
        #[arg(long, value_enum, default_value_t = Style::Bti)]
        style: Style,
        /// Skip inlining of non-recursive residual functions.
        #[arg(long)]
        no_inline: bool,
        /// Print the unspecialized interpreter program instead.
        #[arg(long)]
        encode_only: bool,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Write the residual program here instead of standard output.
        #[arg(short = 'o', value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Compare running a program against running its residual programs.
    Check {
        program: PathBuf,
        /// Inputs known to the specializer (repeatable).
        #[arg(long = "static", value_name = "BINDINGS")]
        statics: Vec<String>,
        /// File of static bindings.
        #[arg(long, value_name = "PATH")]
        static_file: Option<PathBuf>,
        /// Inputs supplied only when the residuals run (repeatable).
        #[arg(long = "dynamic", value_name = "BINDINGS")]
        dynamics: Vec<String>,
        /// File of dynamic bindings.
        #[arg(long, value_name = "PATH")]
        dynamic_file: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Naive,
    Bti,
}

/// A failure that ends the command with a message and an exit status.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl fmt::Display) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<PevalError> for Failure {
    fn from(e: PevalError) -> Self {
        match e {
            PevalError::FuelExhausted => Failure {
                code: EXIT_FUEL,
                message: "FuelExhausted".into(),
            },
            PevalError::Invalid(e) => Failure::input(format!("invalid program: {e}")),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_INPUT
                }
            };
        }
    };
    execute(cli.command, out, err)
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::Run {
            program,
            bindings,
            env_file,
            fuel,
        } => cmd_run(&program, &bindings, env_file.as_deref(), fuel, out, err),
        Command::PevalNaive {
            program,
            statics,
            fuel,
            output,
        } => cmd_peval_naive(&program, &statics, fuel, output.as_deref(), out),
        Command::Peval {
            program,
            statics,
            fuel,
            no_inline,
            output,
        } => cmd_peval(&program, &statics, fuel, !no_inline, output.as_deref(), out),
        Command::CompileDfa {
            machine,
            style,
            no_inline,
            encode_only,
            fuel,
            output,
        } => cmd_compile_dfa(
            &machine,
            style,
            !no_inline,
            encode_only,
            fuel,
            output.as_deref(),
            out,
        ),
        Command::Check {
            program,
            statics,
            static_file,
            dynamics,
            dynamic_file,
            fuel,
        } => cmd_check(
            &program,
            (&statics, static_file.as_deref()),
            (&dynamics, dynamic_file.as_deref()),
            fuel,
            out,
        ),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Prog, Failure> {
    parse_program(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_bindings(inline: &[String], file: Option<&Path>) -> Result<Env<Value>, Failure> {
    let mut env = Env::new();
    let mut add = |src: &str, origin: &str| -> Result<(), Failure> {
        let parsed = parse_bindings(src).map_err(|e| Failure::input(format!("{origin}: {e}")))?;
        env = env
            .union(&parsed)
            .map_err(|name| Failure::input(format!("`{name}` is bound more than once")))?;
        Ok(())
    };
    if let Some(path) = file {
        add(&read(path)?, &path.display().to_string())?;
    }
    for b in inline {
        add(b, &format!("`{b}`"))?;
    }
    Ok(env)
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => write!(out, "{text}").map_err(Failure::input),
    }
}

fn show_outcome(outcome: &EvalOutcome) -> String {
    match outcome {
        Ok(v) => pretty_value(v),
        Err(EvalError::Runtime(e)) => format!("error: {}", e.kind),
        Err(EvalError::FuelExhausted) => "FuelExhausted".into(),
    }
}

fn cmd_run(
    program: &Path,
    bindings: &[String],
    env_file: Option<&Path>,
    fuel: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let p = load_program(program)?;
    let env = load_bindings(bindings, env_file)?;
    let outcome = eval(&p, &env, fuel);
    let _ = writeln!(out, "{}", show_outcome(&outcome));
    Ok(match outcome {
        Ok(_) => EXIT_OK,
        Err(EvalError::Runtime(e)) => {
            let _ = writeln!(err, "runtime error: {e}");
            EXIT_RUNTIME
        }
        Err(EvalError::FuelExhausted) => {
            let _ = writeln!(err, "fuel exhausted after {fuel} applications");
            EXIT_FUEL
        }
    })
}

fn cmd_peval_naive(
    program: &Path,
    statics: &StaticArgs,
    fuel: u64,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let p = load_program(program)?;
    let env = load_bindings(&statics.bindings, statics.env_file.as_deref())?;
    let residual = peval_naive(&p, &env, fuel)?;
    emit(
        &format!("main = {};\n", pretty_expr(&residual)),
        output,
        out,
    )?;
    Ok(EXIT_OK)
}

fn cmd_peval(
    program: &Path,
    statics: &StaticArgs,
    fuel: u64,
    inline: bool,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let p = load_program(program)?;
    let env = load_bindings(&statics.bindings, statics.env_file.as_deref())?;
    let mut residual = peval(&p, &env, fuel)?;
    if inline {
        residual = inline_residual(&residual);
    }
    emit(&pretty_program(&residual), output, out)?;
    Ok(EXIT_OK)
}

fn cmd_compile_dfa(
    machine: &Path,
    style: Style,
    inline: bool,
    encode_only: bool,
    fuel: u64,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let m = Machine::parse(&read(machine)?)
        .map_err(|e| Failure::input(format!("{}: {e}", machine.display())))?;
    let encoded = match style {
        Style::Naive => dfa::encode_naive(&m),
        Style::Bti => dfa::encode_bti(&m),
    }
    .map_err(Failure::input)?;
    if encode_only {
        emit(&pretty_program(&encoded), output, out)?;
        return Ok(EXIT_OK);
    }
    let specialized = peval(&encoded, &Env::new(), fuel)?;
    let count = specialized.defs.len();
    let residual = if inline {
        inline_residual(&specialized)
    } else {
        specialized
    };
    emit(&pretty_program(&residual), output, out)?;
    let _ = writeln!(
        out,
        "-- specialized definitions: {count}, residual definitions: {}, structured constants: {}",
        residual.defs.len(),
        dfa::structured_constants(&residual)
    );
    Ok(EXIT_OK)
}

/// Outcomes agree if both are the same value or both fail with the same
/// error kind.
fn same_outcome(a: &EvalOutcome, b: &EvalOutcome) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x == y,
        (Err(x), Err(y)) => x.kind() == y.kind(),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    Mismatch,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equal => "EQUAL",
            Verdict::Mismatch => "MISMATCH",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Outcomes of running a program on all inputs and its residuals on the
/// dynamic inputs. `residual` and `inlined` are `None` when specialization
/// ran out of fuel.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub original: EvalOutcome,
    pub residual: Option<EvalOutcome>,
    pub inlined: Option<EvalOutcome>,
    pub verdict: Verdict,
}

/// Compares `p` on `static_env ∪ dynamic_env` against the specialized and
/// inlined residuals of `p` on `dynamic_env`. The environments must be
/// disjoint.
pub fn check(
    p: &Prog,
    static_env: &Env<Value>,
    dynamic_env: &Env<Value>,
    fuel: u64,
) -> Result<CheckReport, PevalError> {
    let full = static_env
        .union(dynamic_env)
        .unwrap_or_else(|name| panic!("`{name}` is both static and dynamic"));
    let original = eval(p, &full, fuel);
    let residual = match peval(p, static_env, fuel) {
        Ok(r) => r,
        Err(PevalError::FuelExhausted) => {
            return Ok(CheckReport {
                original,
                residual: None,
                inlined: None,
                verdict: Verdict::Inconclusive,
            })
        }
        Err(e) => return Err(e),
    };
    let specialized = eval(&residual, dynamic_env, fuel);
    let inlined = eval(&inline_residual(&residual), dynamic_env, fuel);
    let outcomes = [&original, &specialized, &inlined];
    let verdict = if outcomes
        .iter()
        .any(|o| matches!(o, Err(EvalError::FuelExhausted)))
    {
        Verdict::Inconclusive
    } else if same_outcome(&original, &specialized) && same_outcome(&original, &inlined) {
        Verdict::Equal
    } else {
        Verdict::Mismatch
    };
    Ok(CheckReport {
        original,
        residual: Some(specialized),
        inlined: Some(inlined),
        verdict,
    })
}

fn cmd_check(
    program: &Path,
    statics: (&[String], Option<&Path>),
    dynamics: (&[String], Option<&Path>),
    fuel: u64,
    out: &mut dyn Write,
) -> CmdResult {
    let p = load_program(program)?;
    let static_env = load_bindings(statics.0, statics.1)?;
    let dynamic_env = load_bindings(dynamics.0, dynamics.1)?;
    let full = static_env
        .union(&dynamic_env)
        .map_err(|name| Failure::input(format!("`{name}` is both static and dynamic")))?;
    if let Some(missing) = free_vars(&p.main).into_iter().find(|x| !full.contains(x)) {
        return Err(Failure::input(format!("no binding for input `{missing}`")));
    }

    let report = check(&p, &static_env, &dynamic_env, fuel)?;
    let _ = writeln!(out, "original: {}", show_outcome(&report.original));
    match (&report.residual, &report.inlined) {
        (Some(residual), Some(inlined)) => {
            let _ = writeln!(out, "residual: {}", show_outcome(residual));
            let _ = writeln!(out, "inlined: {}", show_outcome(inlined));
        }
        _ => {
            let _ = writeln!(out, "residual: specialization ran out of fuel");
        }
    }
    let _ = writeln!(out, "{}", report.verdict);
    Ok(match report.verdict {
        Verdict::Equal => EXIT_OK,
        Verdict::Mismatch => EXIT_RUNTIME,
        Verdict::Inconclusive => EXIT_FUEL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flags_are_input_errors() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with_args(["peval", "run", "x.fl", "--bogus"], &mut out, &mut err);
        assert_eq!(code, EXIT_INPUT);
        assert!(!err.is_empty());
    }

    #[test]
    fn help_exits_cleanly() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            main_with_args(["peval", "--help"], &mut out, &mut err),
            EXIT_OK
        );
        assert!(String::from_utf8(out).unwrap().contains("compile-dfa"));
    }

    #[test]
    fn missing_file_is_input_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with_args(["peval", "run", "/nonexistent/prog.fl"], &mut out, &mut err);
        assert_eq!(code, EXIT_INPUT);
    }
}
