//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use peval::fuel::Fuel;
use peval::lang::free_vars;
use peval::specialize::{peval_expr, SpecKey, SpecStore};
use peval::syntax::parse_program;
use peval::{peval_naive, Env, Expr, PevalError, Prog, Value};

pub const EXP: &str = "fun exp(x,n) = if n==0 then 1 else x*exp(x,n-1);\nmain = exp(x,n);\n";

pub fn exp_with_main(main: &str) -> Prog {
    parse_program(&EXP.replace("exp(x,n);\n", &format!("{main};\n"))).unwrap()
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every `.fl` file of the corpus as `(file name, source)`, sorted by name.
pub fn corpus_sources() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "fl"))
        .collect();
    files.sort();
    assert!(!files.is_empty(), "corpus is empty");
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

pub fn corpus_programs() -> Vec<(String, Prog)> {
    corpus_sources()
        .into_iter()
        .map(|(name, src)| {
            let p = parse_program(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, p)
        })
        .collect()
}

pub fn env(bindings: &[(&str, Value)]) -> Env<Value> {
    bindings.iter().map(|(n, v)| (*n, v.clone())).collect()
}

fn assert_statics_eliminated(main: &Expr, statics: &Env<Value>) {
    let leftover: Vec<_> = free_vars(main)
        .into_iter()
        .filter(|x| statics.contains(x))
        .collect();
    assert!(
        leftover.is_empty(),
        "static variables {leftover:?} survive in the residual main"
    );
}

/// A specializer run together with the keys its store ended up holding.
pub struct Specialized {
    pub prog: Prog,
    pub keys: Vec<SpecKey>,
}

/// Specializes like [`peval::peval`] and checks the store and the residual:
/// no entry is left pending, every call in the residual resolves with the
/// right arity, and no static variable occurs free in `main`.
pub fn specialize_checked(
    p: &Prog,
    statics: &Env<Value>,
    fuel: u64,
) -> Result<Specialized, PevalError> {
    p.validate()?;
    let mut store = SpecStore::for_program(p);
    let mut budget = Fuel::new(fuel);
    let main = peval_expr(&p.main, statics, &p.defs, &mut store, &mut budget)?;
    assert_eq!(
        store.pending(),
        0,
        "pending specializations after a completed run"
    );
    let keys = store.entries().map(|(k, _)| k.clone()).collect();
    let prog = Prog::new(store.into_defs(), main);
    if let Err(e) = prog.validate() {
        panic!("residual program is not well formed: {e}");
    }
    assert_statics_eliminated(&prog.main, statics);
    assert_eq!(
        prog,
        peval::peval(p, statics, fuel).unwrap(),
        "store-driven run differs from peval"
    );
    Ok(Specialized { prog, keys })
}

pub fn peval_checked(p: &Prog, statics: &Env<Value>, fuel: u64) -> Result<Prog, PevalError> {
    specialize_checked(p, statics, fuel).map(|s| s.prog)
}

/// [`peval_naive`] plus the static-variable elimination check.
pub fn peval_naive_checked(p: &Prog, statics: &Env<Value>, fuel: u64) -> Result<Expr, PevalError> {
    let residual = peval_naive(p, statics, fuel)?;
    assert_statics_eliminated(&residual, statics);
    Ok(residual)
}

/// All words over `alphabet` of length at most `max_len`, shortest first.
pub fn words<'a>(alphabet: &[&'a str], max_len: usize) -> Vec<Vec<&'a str>> {
    let mut all = vec![vec![]];
    let mut layer: Vec<Vec<&str>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                alphabet.iter().map(move |&l| {
                    let mut next = w.clone();
                    next.push(l);
                    next
                })
            })
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

/// Every subset of `names`, as a static/dynamic split of `full`.
pub fn splits(full: &Env<Value>) -> Vec<(Env<Value>, Env<Value>)> {
    let names: Vec<&str> = full.names().collect();
    (0..1u32 << names.len())
        .map(|mask| {
            let (mut st, mut dy) = (Env::new(), Env::new());
            for (i, (name, v)) in full.iter().enumerate() {
                let side = if mask & (1 << i) != 0 {
                    &mut st
                } else {
                    &mut dy
                };
                side.bind(name, v.clone()).unwrap();
            }
            (st, dy)
        })
        .collect()
}

pub fn names(set: &BTreeSet<String>) -> Vec<&str> {
    set.iter().map(String::as_str).collect()
}
