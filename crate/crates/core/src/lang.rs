//! Abstract syntax, runtime values and environments of the object language.
//!
//! The language is pure and first-order: a program is a list of named
//! function definitions plus a main expression. Expressions are constants,
//! variables, function applications, primitive applications and
//! conditionals.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::mem;
use std::sync::Arc;

use thiserror::Error;

use crate::fuel::grow;

/// Runtime data.
///
/// Equality is structural and total: values of different variants are
/// simply unequal.
#[derive(Debug)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Pair(Arc<Value>, Arc<Value>),
    List(Arc<[Value]>),
    Nothing,
    Just(Arc<Value>),
}

impl Value {
    pub fn pair(first: Value, second: Value) -> Value {
        Value::Pair(Arc::new(first), Arc::new(second))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(items.into())
    }

    pub fn just(inner: Value) -> Value {
        Value::Just(Arc::new(inner))
    }

    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    /// True if this value is, or contains, a list or a pair.
    pub fn is_structured(&self) -> bool {
        match self {
            Value::List(_) | Value::Pair(..) => true,
            Value::Just(inner) => inner.is_structured(),
            _ => false,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::Pair(..) => "pair",
            Value::List(_) => "list",
            Value::Nothing | Value::Just(_) => "maybe",
        }
    }
}

/// Structural equality over values.
pub fn value_eq(a: &Value, b: &Value) -> bool {
    a == b
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Equal,
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    And,
    Or,
    Not,
    Pair,
    Fst,
    Snd,
    Cons,
    Head,
    Tail,
    IsNil,
    Just,
    IsNothing,
    FromJust,
}

impl PrimOp {
    pub const ALL: [PrimOp; 20] = [
        PrimOp::Equal,
        PrimOp::Add,
        PrimOp::Sub,
        PrimOp::Mul,
        PrimOp::Div,
        PrimOp::Lt,
        PrimOp::Gt,
        PrimOp::And,
        PrimOp::Or,
        PrimOp::Not,
        PrimOp::Pair,
        PrimOp::Fst,
        PrimOp::Snd,
        PrimOp::Cons,
        PrimOp::Head,
        PrimOp::Tail,
        PrimOp::IsNil,
        PrimOp::Just,
        PrimOp::IsNothing,
        PrimOp::FromJust,
    ];

    pub fn arity(self) -> usize {
        match self {
            PrimOp::Not
            | PrimOp::Fst
            | PrimOp::Snd
            | PrimOp::Head
            | PrimOp::Tail
            | PrimOp::IsNil
            | PrimOp::Just
            | PrimOp::IsNothing
            | PrimOp::FromJust => 1,
            _ => 2,
        }
    }

    /// Name used when the operator is written in call syntax, e.g. `head(xs)`.
    pub fn builtin_name(self) -> Option<&'static str> {
        Some(match self {
            PrimOp::Pair => "pair",
            PrimOp::Fst => "fst",
            PrimOp::Snd => "snd",
            PrimOp::Cons => "cons",
            PrimOp::Head => "head",
            PrimOp::Tail => "tail",
            PrimOp::IsNil => "isnil",
            PrimOp::Just => "just",
            PrimOp::IsNothing => "isnothing",
            PrimOp::FromJust => "fromjust",
            _ => return None,
        })
    }

    pub fn from_builtin_name(name: &str) -> Option<PrimOp> {
        PrimOp::ALL
            .into_iter()
            .find(|op| op.builtin_name() == Some(name))
    }

    /// Infix spelling, for the operators written between their operands
    /// (or before it, for `!`).
    pub fn symbol(self) -> Option<&'static str> {
        Some(match self {
            PrimOp::Equal => "==",
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Div => "/",
            PrimOp::Lt => "<",
            PrimOp::Gt => ">",
            PrimOp::And => "&&",
            PrimOp::Or => "||",
            PrimOp::Not => "!",
            _ => return None,
        })
    }
}

impl fmt::Display for PrimOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol().or(self.builtin_name()).unwrap_or("?"))
    }
}

/// Sub-expressions are reference counted: partial evaluation substitutes
/// one residual argument for every occurrence of a parameter, and sharing
/// keeps that linear in the number of unfoldings.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(Value),
    Var(String),
    Apply(String, Arc<[Expr]>),
    Prim(PrimOp, Arc<[Expr]>),
    If(Arc<Expr>, Arc<Expr>, Arc<Expr>),
}

// Trees built by unfolding can be as deep as the fuel allows, so the
// structural traversals below run on a growable stack instead of being
// derived.

impl Clone for Value {
    fn clone(&self) -> Self {
        grow(|| match self {
            Value::Int(n) => Value::Int(*n),
            Value::Bool(b) => Value::Bool(*b),
            Value::Str(s) => Value::Str(s.clone()),
            Value::Pair(a, b) => Value::Pair(a.clone(), b.clone()),
            Value::List(vs) => Value::List(vs.clone()),
            Value::Nothing => Value::Nothing,
            Value::Just(v) => Value::Just(v.clone()),
        })
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        grow(|| match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Pair(a1, b1), Value::Pair(a2, b2)) => {
                (Arc::ptr_eq(a1, a2) || a1 == a2) && (Arc::ptr_eq(b1, b2) || b1 == b2)
            }
            (Value::List(a), Value::List(b)) => Arc::ptr_eq(a, b) || a == b,
            (Value::Nothing, Value::Nothing) => true,
            (Value::Just(a), Value::Just(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        })
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        grow(|| {
            mem::discriminant(self).hash(state);
            match self {
                Value::Int(n) => n.hash(state),
                Value::Bool(b) => b.hash(state),
                Value::Str(s) => s.hash(state),
                Value::Pair(a, b) => {
                    a.hash(state);
                    b.hash(state);
                }
                Value::List(vs) => vs.hash(state),
                Value::Nothing => {}
                Value::Just(v) => v.hash(state),
            }
        })
    }
}

fn detach_value(child: &mut Arc<Value>) -> Option<Value> {
    Arc::get_mut(child).map(|v| mem::replace(v, Value::Nothing))
}

impl Drop for Value {
    fn drop(&mut self) {
        let children: Vec<Value> = match self {
            Value::Pair(a, b) => [a, b].into_iter().filter_map(detach_value).collect(),
            Value::Just(v) => detach_value(v).into_iter().collect(),
            Value::List(vs) => match Arc::get_mut(vs) {
                Some(items) => items
                    .iter_mut()
                    .map(|v| mem::replace(v, Value::Nothing))
                    .collect(),
                None => return,
            },
            _ => return,
        };
        if !children.is_empty() {
            grow(|| drop(children));
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        grow(|| match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a == b,
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Apply(f, a), Expr::Apply(g, b)) => f == g && (Arc::ptr_eq(a, b) || a == b),
            (Expr::Prim(p, a), Expr::Prim(q, b)) => p == q && (Arc::ptr_eq(a, b) || a == b),
            (Expr::If(c1, t1, e1), Expr::If(c2, t2, e2)) => [(c1, c2), (t1, t2), (e1, e2)]
                .iter()
                .all(|(x, y)| Arc::ptr_eq(x, y) || x == y),
            _ => false,
        })
    }
}

impl Eq for Expr {}

/// Moves a uniquely owned child out so it can be dropped on a growable
/// stack. Shared children only lose a reference.
fn detach(child: &mut Expr) -> Expr {
    mem::replace(child, Expr::Var(String::new()))
}

impl Drop for Expr {
    fn drop(&mut self) {
        match self {
            Expr::Apply(_, args) | Expr::Prim(_, args) => {
                if let Some(args) = Arc::get_mut(args) {
                    let children: Vec<Expr> = args.iter_mut().map(detach).collect();
                    grow(|| drop(children));
                }
            }
            Expr::If(c, t, e) => {
                let children: Vec<Expr> = [c, t, e]
                    .into_iter()
                    .filter_map(|child| Arc::get_mut(child).map(detach))
                    .collect();
                grow(|| drop(children));
            }
            _ => {}
        }
    }
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(Value::Int(n))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Const(Value::Bool(b))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn apply(fname: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Apply(fname.into(), args.into())
    }

    pub fn prim(op: PrimOp, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(op.arity(), args.len(), "arity of {op:?}");
        Expr::Prim(op, args.into())
    }

    pub fn if_(cond: Expr, then: Expr, els: Expr) -> Expr {
        Expr::If(Arc::new(cond), Arc::new(then), Arc::new(els))
    }

    pub fn as_const(&self) -> Option<&Value> {
        match self {
            Expr::Const(v) => Some(v),
            _ => None,
        }
    }

    /// Pre-order walk over every sub-expression, including `self`.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        grow(|| match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Apply(_, args) | Expr::Prim(_, args) => {
                for arg in args.iter() {
                    arg.walk(visit);
                }
            }
            Expr::If(c, t, e) => {
                c.walk(visit);
                t.walk(visit);
                e.walk(visit);
            }
        })
    }

    /// Visits every node once, even when it is reachable along several
    /// paths through shared children. Order is unspecified.
    pub fn walk_distinct<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        let mut seen: HashSet<*const Expr> = HashSet::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if !seen.insert(e) {
                continue;
            }
            visit(e);
            match e {
                Expr::Const(_) | Expr::Var(_) => {}
                Expr::Apply(_, args) | Expr::Prim(_, args) => stack.extend(args.iter()),
                Expr::If(c, t, f) => stack.extend([&**c, &**t, &**f]),
            }
        }
    }

    pub fn contains_apply(&self) -> bool {
        let mut found = false;
        self.walk_distinct(&mut |e| found |= matches!(e, Expr::Apply(..)));
        found
    }

    /// Names of all functions applied anywhere in the expression.
    pub fn callees(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk_distinct(&mut |e| {
            if let Expr::Apply(f, _) = e {
                out.insert(f.as_str());
            }
        });
        out
    }
}

/// The set of variable names occurring in `e`.
pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    e.walk_distinct(&mut |e| {
        if let Expr::Var(x) = e {
            out.insert(x.clone());
        }
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
}

impl FDef {
    pub fn new(name: impl Into<String>, params: &[&str], body: Expr) -> FDef {
        FDef {
            name: name.into(),
            params: params.iter().map(|p| p.to_string()).collect(),
            body,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prog {
    pub defs: Vec<FDef>,
    pub main: Expr,
}

impl Prog {
    pub fn new(defs: Vec<FDef>, main: Expr) -> Prog {
        Prog { defs, main }
    }

    pub fn lookup(&self, name: &str) -> Option<&FDef> {
        lookup_fdef(&self.defs, name)
    }

    /// Checks name uniqueness, parameter distinctness, closed bodies,
    /// and that every application targets a defined function with the
    /// right number of arguments.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut arities: HashMap<&str, usize> = HashMap::new();
        for def in &self.defs {
            if arities.insert(&def.name, def.params.len()).is_some() {
                return Err(ValidationError::DuplicateFunction(def.name.clone()));
            }
        }
        for def in &self.defs {
            let mut seen = HashSet::new();
            for p in &def.params {
                if !seen.insert(p.as_str()) {
                    return Err(ValidationError::DuplicateParam {
                        function: def.name.clone(),
                        param: p.clone(),
                    });
                }
            }
            if let Some(var) = free_vars(&def.body)
                .into_iter()
                .find(|v| !seen.contains(v.as_str()))
            {
                return Err(ValidationError::UnboundVariable {
                    function: def.name.clone(),
                    var,
                });
            }
            check_applications(&def.body, &arities)?;
        }
        check_applications(&self.main, &arities)
    }
}

fn check_applications(e: &Expr, arities: &HashMap<&str, usize>) -> Result<(), ValidationError> {
    let mut result = Ok(());
    e.walk(&mut |e| {
        if result.is_err() {
            return;
        }
        match e {
            Expr::Apply(f, args) => match arities.get(f.as_str()) {
                None => result = Err(ValidationError::UnknownFunction(f.clone())),
                Some(&n) if n != args.len() => {
                    result = Err(ValidationError::ArityMismatch {
                        function: f.clone(),
                        expected: n,
                        found: args.len(),
                    })
                }
                Some(_) => {}
            },
            Expr::Prim(op, args) if op.arity() != args.len() => {
                result = Err(ValidationError::PrimArity {
                    op: *op,
                    found: args.len(),
                })
            }
            _ => {}
        }
    });
    result
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{function}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        function: String,
        expected: usize,
        found: usize,
    },
    #[error("primitive `{op}` expects {} argument(s), found {found}", op.arity())]
    PrimArity { op: PrimOp, found: usize },
    #[error("variable `{var}` is not bound in function `{function}`")]
    UnboundVariable { function: String, var: String },
    #[error("function `{0}` is defined more than once")]
    DuplicateFunction(String),
    #[error("parameter `{param}` appears twice in function `{function}`")]
    DuplicateParam { function: String, param: String },
}

pub fn lookup_fdef<'a>(defs: &'a [FDef], name: &str) -> Option<&'a FDef> {
    defs.iter().find(|d| d.name == name)
}

/// Ordered name-to-binding map. Lookup is first-match; keys are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Env<T> {
    bindings: Vec<(String, T)>,
}

impl<T> Default for Env<T> {
    fn default() -> Self {
        Env {
            bindings: Vec::new(),
        }
    }
}

impl<T> Env<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, name: &str) -> Option<&T> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    /// Adds a binding. Returns the value back if the name is already bound.
    pub fn bind(&mut self, name: impl Into<String>, value: T) -> Result<(), T> {
        let name = name.into();
        if self.contains(&name) {
            return Err(value);
        }
        self.bindings.push((name, value));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(n, _)| n.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        self.bindings.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Env<U> {
        Env {
            bindings: self
                .bindings
                .iter()
                .map(|(n, v)| (n.clone(), f(v)))
                .collect(),
        }
    }
}

impl<T: Clone> Env<T> {
    /// Union of two environments. Fails with the first shared name.
    pub fn union(&self, other: &Env<T>) -> Result<Env<T>, String> {
        let mut out = self.clone();
        for (n, v) in other.iter() {
            out.bind(n, v.clone()).map_err(|_| n.to_string())?;
        }
        Ok(out)
    }
}

impl<S: Into<String>, T> FromIterator<(S, T)> for Env<T> {
    /// Later duplicates are dropped.
    fn from_iter<I: IntoIterator<Item = (S, T)>>(iter: I) -> Self {
        let mut env = Env::new();
        for (n, v) in iter {
            let _ = env.bind(n, v);
        }
        env
    }
}

pub fn lookup_var<'a, T>(env: &'a Env<T>, name: &str) -> Option<&'a T> {
    env.lookup(name)
}
