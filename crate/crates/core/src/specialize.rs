//! Online polyvariant program specializer.
//!
//! Like the naive inliner, except that environments bind values and a call
//! with at least one dynamic argument is not unfolded. Instead the callee
//! is specialized to its static arguments, once per distinct
//! (function, static arguments) pair, and the call is replaced by a call
//! to the specialized definition. The entry for a specialization is
//! registered before its body is computed, so a recursive call with the
//! same static arguments finds it and ties the knot.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;

use crate::fuel::{grow, Fuel};
use crate::lang::{Env, Expr, FDef, Prog, ValidationError, Value};
use crate::naive::{fold_prim, PevalError};

/// Static argument bindings in the callee's parameter order.
pub type StaticBindings = Vec<(String, Value)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecKey {
    pub function: String,
    pub statics: StaticBindings,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecEntry {
    pub name: String,
    /// Dynamic parameters, in the original definition's order.
    pub params: Vec<String>,
    /// `None` while the body is still being computed.
    pub body: Option<Expr>,
}

#[derive(Debug, Clone, Default)]
pub struct SpecStore {
    entries: IndexMap<SpecKey, SpecEntry>,
    counters: HashMap<String, usize>,
    taken: HashSet<String>,
}

impl SpecStore {
    /// An empty store whose fabricated names avoid `reserved`.
    pub fn new<'a>(reserved: impl IntoIterator<Item = &'a str>) -> SpecStore {
        SpecStore {
            taken: reserved.into_iter().map(str::to_string).collect(),
            ..SpecStore::default()
        }
    }

    pub fn for_program(p: &Prog) -> SpecStore {
        SpecStore::new(p.defs.iter().map(|d| d.name.as_str()))
    }

    pub fn get(&self, key: &SpecKey) -> Option<&SpecEntry> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SpecKey, &SpecEntry)> {
        self.entries.iter()
    }

    pub fn pending(&self) -> usize {
        self.entries.values().filter(|e| e.body.is_none()).count()
    }

    /// Fabricates `<orig>_<k>`, where `k` counts specializations of `orig`,
    /// appending `_` until the name is unused.
    pub fn spec_name(&mut self, orig: &str) -> String {
        let k = self.counters.entry(orig.to_string()).or_insert(0);
        *k += 1;
        let mut name = format!("{orig}_{k}");
        while self.taken.contains(&name) {
            name.push('_');
        }
        self.taken.insert(name.clone());
        name
    }

    fn insert_pending(&mut self, key: SpecKey, params: Vec<String>) -> String {
        let name = self.spec_name(&key.function);
        self.entries.insert(
            key,
            SpecEntry {
                name: name.clone(),
                params,
                body: None,
            },
        );
        name
    }

    fn complete(&mut self, key: &SpecKey, body: Expr) {
        let entry = self
            .entries
            .get_mut(key)
            .expect("entry registered before its body");
        entry.body = Some(body);
    }

    /// Specialized definitions in creation order.
    ///
    /// Panics if a body is still pending, which only happens if a run was
    /// abandoned midway.
    pub fn into_defs(self) -> Vec<FDef> {
        self.entries
            .into_values()
            .map(|e| FDef {
                body: e
                    .body
                    .unwrap_or_else(|| panic!("specialization `{}` left pending", e.name)),
                name: e.name,
                params: e.params,
            })
            .collect()
    }
}

/// Specializes `p` to the static bindings. The residual program's
/// definitions are all specializations, in the order they were created.
pub fn peval(p: &Prog, statics: &Env<Value>, fuel: u64) -> Result<Prog, PevalError> {
    p.validate()?;
    let mut store = SpecStore::for_program(p);
    let mut fuel = Fuel::new(fuel);
    let main = peval_expr(&p.main, statics, &p.defs, &mut store, &mut fuel)?;
    Ok(Prog::new(store.into_defs(), main))
}

pub fn peval_expr(
    e: &Expr,
    env: &Env<Value>,
    defs: &[FDef],
    store: &mut SpecStore,
    fuel: &mut Fuel,
) -> Result<Expr, PevalError> {
    Specializer { defs, store, fuel }.expr(e, env)
}

/// Splits call arguments into static bindings (constant residuals) and
/// dynamic parameter/argument lists, keeping positional order.
pub fn partition_args(
    params: &[String],
    args: Vec<Expr>,
) -> (StaticBindings, Vec<String>, Vec<Expr>) {
    let mut statics = Vec::new();
    let mut dyn_params = Vec::new();
    let mut dyn_args = Vec::new();
    for (param, arg) in params.iter().zip(args) {
        match arg {
            Expr::Const(ref v) => statics.push((param.clone(), v.clone())),
            other => {
                dyn_params.push(param.clone());
                dyn_args.push(other);
            }
        }
    }
    (statics, dyn_params, dyn_args)
}

/// Residualizes a call of `fname` whose arguments are already partially
/// evaluated.
pub fn specialize_apply(
    fname: &str,
    args: Vec<Expr>,
    defs: &[FDef],
    store: &mut SpecStore,
    fuel: &mut Fuel,
) -> Result<Expr, PevalError> {
    Specializer { defs, store, fuel }.apply(fname, args)
}

struct Specializer<'a> {
    defs: &'a [FDef],
    store: &'a mut SpecStore,
    fuel: &'a mut Fuel,
}

impl Specializer<'_> {
    fn expr(&mut self, e: &Expr, env: &Env<Value>) -> Result<Expr, PevalError> {
        grow(|| match e {
            Expr::Const(_) => Ok(e.clone()),
            Expr::Var(x) => Ok(env
                .lookup(x)
                .map_or_else(|| e.clone(), |v| Expr::Const(v.clone()))),
            Expr::Prim(op, args) => {
                let args = args
                    .iter()
                    .map(|a| self.expr(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(fold_prim(*op, args))
            }
            Expr::If(c, t, f) => match self.expr(c, env)? {
                Expr::Const(Value::Bool(true)) => self.expr(t, env),
                Expr::Const(Value::Bool(false)) => self.expr(f, env),
                cond => {
                    let t = self.expr(t, env)?;
                    let f = self.expr(f, env)?;
                    Ok(Expr::if_(cond, t, f))
                }
            },
            Expr::Apply(fname, args) => {
                let args = args
                    .iter()
                    .map(|a| self.expr(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply(fname, args)
            }
        })
    }

    fn apply(&mut self, fname: &str, args: Vec<Expr>) -> Result<Expr, PevalError> {
        let def = self
            .defs
            .iter()
            .find(|d| d.name == fname)
            .ok_or_else(|| ValidationError::UnknownFunction(fname.to_string()))?;
        if def.params.len() != args.len() {
            return Err(ValidationError::ArityMismatch {
                function: fname.to_string(),
                expected: def.params.len(),
                found: args.len(),
            }
            .into());
        }
        let (statics, dyn_params, dyn_args) = partition_args(&def.params, args);
        let static_env: Env<Value> = statics.iter().cloned().collect();

        if dyn_args.is_empty() {
            self.fuel.spend()?;
            return self.expr(&def.body, &static_env);
        }

        let key = SpecKey {
            function: def.name.clone(),
            statics,
        };
        if let Some(entry) = self.store.get(&key) {
            return Ok(Expr::apply(entry.name.clone(), dyn_args));
        }
        self.fuel.spend()?;
        let name = self.store.insert_pending(key.clone(), dyn_params);
        let body = self.expr(&def.body, &static_env)?;
        self.store.complete(&key, body);
        Ok(Expr::apply(name, dyn_args))
    }
}
