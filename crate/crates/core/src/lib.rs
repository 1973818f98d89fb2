//! A small pure first-order functional language with three ways to run it:
//!
//! * [`interp`]: a big-step evaluator.
//! * [`naive`]: a partial evaluator that unfolds every call.
//! * [`specialize`]: an online program specializer that produces a
//!   residual program of memoized, specialized definitions, followed
//!   optionally by [`postopt::inline_residual`].
//!
//! [`dfa`] compiles state machines by specializing a machine interpreter
//! written in the language.

pub mod cli;
pub mod dfa;
pub mod fuel;
pub mod interp;
pub mod lang;
pub mod naive;
pub mod postopt;
pub mod specialize;
pub mod syntax;

pub use fuel::{FuelExhausted, DEFAULT_FUEL};
pub use interp::{eval, EvalError, EvalOutcome};
pub use lang::{Env, Expr, FDef, PrimOp, Prog, Value};
pub use naive::{peval_naive, PevalError};
pub use postopt::inline_residual;
pub use specialize::peval;
