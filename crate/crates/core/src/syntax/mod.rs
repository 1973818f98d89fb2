//! Concrete syntax for programs and bindings.
//!
//! ```text
//! program := fundef* "main" "=" expr ";"
//! fundef  := "fun" IDENT "(" params? ")" "=" expr ";"
//! expr    := "if" expr "then" expr "else" expr | binop-expr
//! ```
//!
//! Binary operators from loosest to tightest: `||`, `&&`, `== < >`,
//! `+ -`, `* /`, all left-associative; `!` is prefix. Builtins (`pair`,
//! `fst`, `snd`, `cons`, `head`, `tail`, `isnil`, `just`, `isnothing`,
//! `fromjust`) use call syntax. Structured constants are written as value
//! literals: `[1,2]`, `(1,"a")`, `nothing`, `just(3)`. Comments run from
//! `--` to the end of the line.

mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

use crate::lang::{Env, Expr, Prog, ValidationError, Value};

pub use parser::is_reserved;
pub use pretty::{pretty_expr, pretty_program, pretty_value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("invalid program: {0}")]
    Validation(#[from] ValidationError),
    #[error("line {line}: `{name}` is bound more than once")]
    DuplicateBinding { name: String, line: usize },
}

/// Parses and validates a whole program.
pub fn parse_program(src: &str) -> Result<Prog, SyntaxError> {
    let prog = parser::Parser::new(src)?.program()?;
    prog.validate()?;
    Ok(prog)
}

/// Parses a single expression. No validation is performed.
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = parser::Parser::new(src)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses `name = literal` entries separated by commas or line breaks.
pub fn parse_bindings(src: &str) -> Result<Env<Value>, SyntaxError> {
    parser::Parser::new(src)?.bindings()
}

pub fn parse_value(src: &str) -> Result<Value, SyntaxError> {
    let mut p = parser::Parser::new(src)?;
    match p.literal()? {
        Some(v) => {
            p.expect_end()?;
            Ok(v)
        }
        None => Err(SyntaxError::Parse {
            line: 1,
            col: 1,
            message: "expected a value literal".into(),
        }),
    }
}
