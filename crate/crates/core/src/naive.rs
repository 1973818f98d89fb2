//! Inlining partial evaluator.
//!
//! Environments bind names to residual expressions and every function
//! application is unfolded. Recursion controlled by a dynamic value
//! therefore unfolds forever; fuel turns that into [`PevalError::FuelExhausted`].

use thiserror::Error;

use crate::fuel::{grow, Fuel, FuelExhausted};
use crate::interp::apply_prim;
use crate::lang::{Env, Expr, FDef, PrimOp, Prog, ValidationError, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PevalError {
    #[error("FuelExhausted")]
    FuelExhausted,
    #[error("invalid program: {0}")]
    Invalid(#[from] ValidationError),
}

impl From<FuelExhausted> for PevalError {
    fn from(_: FuelExhausted) -> Self {
        PevalError::FuelExhausted
    }
}

/// Folds a primitive whose arguments are all constants. A primitive that
/// would fail at runtime is left in place, so the error is raised only if
/// the residual program ever reaches it.
pub(crate) fn fold_prim(op: PrimOp, args: Vec<Expr>) -> Expr {
    let consts: Option<Vec<Value>> = args.iter().map(|a| a.as_const().cloned()).collect();
    match consts.map(|vals| apply_prim(op, &vals)) {
        Some(Ok(v)) => Expr::Const(v),
        _ => Expr::Prim(op, args.into()),
    }
}

/// Residualizes `p.main` under the static bindings, unfolding every call.
pub fn peval_naive(p: &Prog, statics: &Env<Value>, fuel: u64) -> Result<Expr, PevalError> {
    p.validate()?;
    let env = statics.map(|v| Expr::Const(v.clone()));
    let mut fuel = Fuel::new(fuel);
    peval_naive_expr(&p.main, &env, &p.defs, &mut fuel)
}

pub fn peval_naive_expr(
    e: &Expr,
    env: &Env<Expr>,
    defs: &[FDef],
    fuel: &mut Fuel,
) -> Result<Expr, PevalError> {
    grow(|| match e {
        Expr::Const(_) => Ok(e.clone()),
        Expr::Var(x) => Ok(env.lookup(x).cloned().unwrap_or_else(|| e.clone())),
        Expr::Prim(op, args) => {
            let args = args
                .iter()
                .map(|a| peval_naive_expr(a, env, defs, fuel))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(fold_prim(*op, args))
        }
        Expr::If(c, t, f) => match peval_naive_expr(c, env, defs, fuel)? {
            Expr::Const(Value::Bool(true)) => peval_naive_expr(t, env, defs, fuel),
            Expr::Const(Value::Bool(false)) => peval_naive_expr(f, env, defs, fuel),
            cond => {
                let t = peval_naive_expr(t, env, defs, fuel)?;
                let f = peval_naive_expr(f, env, defs, fuel)?;
                Ok(Expr::if_(cond, t, f))
            }
        },
        Expr::Apply(fname, args) => {
            let def = defs
                .iter()
                .find(|d| &d.name == fname)
                .ok_or_else(|| ValidationError::UnknownFunction(fname.clone()))?;
            let mut local = Env::new();
            for (param, arg) in def.params.iter().zip(args.iter()) {
                let residual = peval_naive_expr(arg, env, defs, fuel)?;
                let _ = local.bind(param.as_str(), residual);
            }
            fuel.spend()?;
            peval_naive_expr(&def.body, &local, defs, fuel)
        }
    })
}
