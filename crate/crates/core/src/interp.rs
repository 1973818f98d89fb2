//! Big-step evaluator.

use std::fmt;

use thiserror::Error;

use crate::fuel::{grow, Fuel};
use crate::lang::{lookup_fdef, value_eq, Env, Expr, FDef, PrimOp, Prog, Value};
use crate::syntax::pretty_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    UnboundVariable,
    UnknownFunction,
    ArityMismatch,
    TypeError,
    DivByZero,
    HeadOfNil,
    FromJustNothing,
    Overflow,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {context}")]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub context: String,
}

impl RuntimeError {
    fn new(kind: ErrorKind, context: impl Into<String>) -> RuntimeError {
        RuntimeError {
            kind,
            context: context.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("FuelExhausted")]
    FuelExhausted,
}

impl From<crate::fuel::FuelExhausted> for EvalError {
    fn from(_: crate::fuel::FuelExhausted) -> Self {
        EvalError::FuelExhausted
    }
}

impl EvalError {
    pub fn kind(&self) -> Option<ErrorKind> {
        match self {
            EvalError::Runtime(e) => Some(e.kind),
            EvalError::FuelExhausted => None,
        }
    }
}

pub type EvalOutcome = Result<Value, EvalError>;

/// Evaluates `p.main` under `env` with a budget of `fuel` function
/// applications.
pub fn eval(p: &Prog, env: &Env<Value>, fuel: u64) -> EvalOutcome {
    let mut fuel = Fuel::new(fuel);
    eval_expr(&p.main, env, &p.defs, &mut fuel)
}

pub fn eval_expr(e: &Expr, env: &Env<Value>, defs: &[FDef], fuel: &mut Fuel) -> EvalOutcome {
    grow(|| match e {
        Expr::Const(v) => Ok(v.clone()),
        Expr::Var(x) => env.lookup(x).cloned().ok_or_else(|| {
            RuntimeError::new(ErrorKind::UnboundVariable, format!("variable `{x}`")).into()
        }),
        Expr::Prim(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval_expr(a, env, defs, fuel))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(apply_prim(*op, &vals)?)
        }
        Expr::If(c, t, f) => match eval_expr(c, env, defs, fuel)? {
            Value::Bool(true) => eval_expr(t, env, defs, fuel),
            Value::Bool(false) => eval_expr(f, env, defs, fuel),
            other => Err(RuntimeError::new(
                ErrorKind::TypeError,
                format!(
                    "condition evaluated to {}, expected bool",
                    pretty_value(&other)
                ),
            )
            .into()),
        },
        Expr::Apply(fname, args) => {
            let def = lookup_fdef(defs, fname).ok_or_else(|| {
                RuntimeError::new(ErrorKind::UnknownFunction, format!("function `{fname}`"))
            })?;
            if def.params.len() != args.len() {
                return Err(RuntimeError::new(
                    ErrorKind::ArityMismatch,
                    format!(
                        "`{fname}` expects {} argument(s), found {}",
                        def.params.len(),
                        args.len()
                    ),
                )
                .into());
            }
            let mut local = Env::new();
            for (param, arg) in def.params.iter().zip(args.iter()) {
                let v = eval_expr(arg, env, defs, fuel)?;
                let _ = local.bind(param.as_str(), v);
            }
            fuel.spend()?;
            eval_expr(&def.body, &local, defs, fuel)
        }
    })
}

fn type_error(op: PrimOp, args: &[Value]) -> RuntimeError {
    let shown: Vec<_> = args.iter().map(pretty_value).collect();
    RuntimeError::new(
        ErrorKind::TypeError,
        format!("`{op}` cannot be applied to ({})", shown.join(",")),
    )
}

fn arith(op: PrimOp, a: i64, b: i64) -> Result<Value, RuntimeError> {
    let overflow = || RuntimeError::new(ErrorKind::Overflow, format!("{a}{op}{b}"));
    let n = match op {
        PrimOp::Add => a.checked_add(b).ok_or_else(overflow)?,
        PrimOp::Sub => a.checked_sub(b).ok_or_else(overflow)?,
        PrimOp::Mul => a.checked_mul(b).ok_or_else(overflow)?,
        PrimOp::Div if b == 0 => {
            return Err(RuntimeError::new(ErrorKind::DivByZero, format!("{a}/0")))
        }
        PrimOp::Div => a.checked_div(b).ok_or_else(overflow)?,
        PrimOp::Lt => return Ok(Value::Bool(a < b)),
        PrimOp::Gt => return Ok(Value::Bool(a > b)),
        _ => unreachable!("not an arithmetic operator"),
    };
    Ok(Value::Int(n))
}

/// Applies a primitive to fully evaluated arguments.
pub fn apply_prim(op: PrimOp, args: &[Value]) -> Result<Value, RuntimeError> {
    use PrimOp::*;
    if args.len() != op.arity() {
        return Err(RuntimeError::new(
            ErrorKind::ArityMismatch,
            format!(
                "`{op}` expects {} argument(s), found {}",
                op.arity(),
                args.len()
            ),
        ));
    }
    let bad = || type_error(op, args);
    match (op, args) {
        (Equal, [a, b]) => Ok(Value::Bool(value_eq(a, b))),
        (Add | Sub | Mul | Div | Lt | Gt, [Value::Int(a), Value::Int(b)]) => arith(op, *a, *b),
        (And, [Value::Bool(a), Value::Bool(b)]) => Ok(Value::Bool(*a && *b)),
        (Or, [Value::Bool(a), Value::Bool(b)]) => Ok(Value::Bool(*a || *b)),
        (Not, [Value::Bool(a)]) => Ok(Value::Bool(!a)),
        (Pair, [a, b]) => Ok(Value::pair(a.clone(), b.clone())),
        (Fst, [Value::Pair(a, _)]) => Ok((**a).clone()),
        (Snd, [Value::Pair(_, b)]) => Ok((**b).clone()),
        (Cons, [x, Value::List(xs)]) => {
            let mut out = Vec::with_capacity(xs.len() + 1);
            out.push(x.clone());
            out.extend(xs.iter().cloned());
            Ok(Value::list(out))
        }
        (Head | Tail, [Value::List(xs)]) if xs.is_empty() => Err(RuntimeError::new(
            ErrorKind::HeadOfNil,
            format!("`{op}` of the empty list"),
        )),
        (Head, [Value::List(xs)]) => Ok(xs[0].clone()),
        (Tail, [Value::List(xs)]) => Ok(Value::List(xs[1..].into())),
        (IsNil, [Value::List(xs)]) => Ok(Value::Bool(xs.is_empty())),
        (Just, [a]) => Ok(Value::just(a.clone())),
        (IsNothing, [Value::Nothing]) => Ok(Value::Bool(true)),
        (IsNothing, [Value::Just(_)]) => Ok(Value::Bool(false)),
        (FromJust, [Value::Just(a)]) => Ok((**a).clone()),
        (FromJust, [Value::Nothing]) => Err(RuntimeError::new(
            ErrorKind::FromJustNothing,
            "`fromjust` of nothing",
        )),
        _ => Err(bad()),
    }
}
