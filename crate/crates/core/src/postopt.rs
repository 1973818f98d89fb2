//! Inlining of non-recursive residual functions.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::fuel::grow;
use crate::lang::{Expr, PrimOp, Prog};

struct CallGraph {
    graph: DiGraph<usize, ()>,
}

impl CallGraph {
    fn new(p: &Prog) -> CallGraph {
        let mut graph = DiGraph::new();
        let nodes: HashMap<&str, NodeIndex> = p
            .defs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.name.as_str(), graph.add_node(i)))
            .collect();
        for def in &p.defs {
            for callee in def.body.callees() {
                if let Some(&to) = nodes.get(callee) {
                    graph.update_edge(nodes[def.name.as_str()], to, ());
                }
            }
        }
        CallGraph { graph }
    }

    /// Strongly connected components, callees before callers.
    fn components(&self) -> Vec<Vec<usize>> {
        tarjan_scc(&self.graph)
            .into_iter()
            .map(|scc| scc.into_iter().map(|n| self.graph[n]).collect())
            .collect()
    }

    fn is_recursive(&self, scc: &[usize]) -> bool {
        match scc {
            [single] => {
                let n = NodeIndex::new(*single);
                self.graph.contains_edge(n, n)
            }
            _ => true,
        }
    }
}

/// Names of the functions that are not on any call-graph cycle.
pub fn call_graph_non_recursive(p: &Prog) -> BTreeSet<String> {
    let graph = CallGraph::new(p);
    graph
        .components()
        .into_iter()
        .filter(|scc| !graph.is_recursive(scc))
        .flat_map(|scc| scc.into_iter().map(|i| p.defs[i].name.clone()))
        .collect()
}

/// Replaces every call to a non-recursive function by its body and drops
/// definitions no longer reachable from `main`.
///
/// Arguments are substituted for parameters. An argument that might fail
/// when evaluated is first forced by a guard `if a==a then .. else false`,
/// so the inlined code raises the same error as the call would have, in the
/// same order.
pub fn inline_residual(p: &Prog) -> Prog {
    let graph = CallGraph::new(p);
    let mut inlined: HashMap<&str, (&[String], Expr)> = HashMap::new();
    let mut kept: HashMap<usize, Expr> = HashMap::new();

    for scc in graph.components() {
        let recursive = graph.is_recursive(&scc);
        for i in scc {
            let def = &p.defs[i];
            let body = inline_expr(&def.body, &inlined);
            if recursive {
                kept.insert(i, body);
            } else {
                inlined.insert(&def.name, (&def.params, body));
            }
        }
    }

    let main = inline_expr(&p.main, &inlined);

    let by_name: HashMap<&str, usize> =
        kept.keys().map(|&i| (p.defs[i].name.as_str(), i)).collect();
    let mut reachable = HashSet::new();
    let mut work: Vec<&str> = main.callees().into_iter().collect();
    while let Some(f) = work.pop() {
        if let Some(&i) = by_name.get(f) {
            if reachable.insert(i) {
                work.extend(kept[&i].callees());
            }
        }
    }

    let defs = p
        .defs
        .iter()
        .enumerate()
        .filter(|(i, _)| reachable.contains(i))
        .map(|(i, d)| crate::lang::FDef {
            name: d.name.clone(),
            params: d.params.clone(),
            body: kept[&i].clone(),
        })
        .collect();
    Prog::new(defs, main)
}

/// Expressions whose evaluation cannot fail, given that every variable is
/// bound.
fn is_total(e: &Expr) -> bool {
    let mut total = true;
    e.walk_distinct(&mut |e| {
        total &= match e {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Prim(op, _) => is_total_op(*op),
            _ => false,
        }
    });
    total
}

fn is_total_op(op: PrimOp) -> bool {
    matches!(op, PrimOp::Equal | PrimOp::Pair | PrimOp::Just)
}

/// Results already computed for shared sub-expressions, keyed by address.
type Memo<T> = HashMap<*const Expr, T>;

/// Pushes the variables `e` reads, in evaluation order, up to its first
/// step that might fail. Returns whether `e` finishes without such a step.
fn leading_reads<'a>(e: &'a Expr, out: &mut Vec<&'a str>, memo: &mut Memo<bool>) -> bool {
    if let Some(&done) = memo.get(&(e as *const Expr)) {
        return done;
    }
    let done = grow(|| match e {
        Expr::Const(_) => true,
        Expr::Var(x) => {
            out.push(x);
            true
        }
        Expr::Prim(op, args) => {
            args.iter().all(|a| leading_reads(a, out, memo)) && is_total_op(*op)
        }
        Expr::Apply(_, args) => {
            args.iter().all(|a| leading_reads(a, out, memo));
            false
        }
        Expr::If(c, _, _) => {
            leading_reads(c, out, memo);
            false
        }
    });
    memo.insert(e, done);
    done
}

/// Indices of the arguments that must be forced before the inlined body.
///
/// A call evaluates its possibly failing arguments in order before the
/// body. If the body itself reads the last few of them, in that order,
/// before anything else can fail, they need no guard.
fn needs_guard(params: &[String], args: &[Expr], body: &Expr) -> Vec<usize> {
    let strict: Vec<usize> = (0..args.len()).filter(|&i| !is_total(&args[i])).collect();
    let mut reads = Vec::new();
    leading_reads(body, &mut reads, &mut Memo::new());
    let read_order: Vec<usize> = reads
        .iter()
        .filter_map(|x| params.iter().position(|p| p == x))
        .collect();
    let body_forces = |pending: &[usize]| {
        let mut order: Vec<usize> = Vec::new();
        for &i in &read_order {
            if pending.contains(&i) && !order.contains(&i) {
                order.push(i);
            }
        }
        order.starts_with(pending)
    };
    let j = (0..=strict.len())
        .find(|&j| body_forces(&strict[j..]))
        .unwrap_or(strict.len());
    strict[..j].to_vec()
}

/// Bottom-up rewriting that rebuilds each shared child once, so sharing in
/// the input carries over to the output.
struct Rebuild<F> {
    step: F,
    slices: HashMap<*const Expr, Arc<[Expr]>>,
    nodes: HashMap<*const Expr, Arc<Expr>>,
}

impl<F: FnMut(Expr) -> Expr> Rebuild<F> {
    fn new(step: F) -> Self {
        Rebuild {
            step,
            slices: HashMap::new(),
            nodes: HashMap::new(),
        }
    }

    /// Applies `step` to `e` after its children have been rebuilt.
    fn expr(&mut self, e: &Expr) -> Expr {
        let shallow = grow(|| match e {
            Expr::Const(_) | Expr::Var(_) => e.clone(),
            Expr::Prim(op, args) => Expr::Prim(*op, self.slice(args)),
            Expr::Apply(f, args) => Expr::Apply(f.clone(), self.slice(args)),
            Expr::If(c, t, f) => Expr::If(self.node(c), self.node(t), self.node(f)),
        });
        (self.step)(shallow)
    }

    fn slice(&mut self, args: &Arc<[Expr]>) -> Arc<[Expr]> {
        if let Some(done) = self.slices.get(&args.as_ptr()) {
            return done.clone();
        }
        let out: Arc<[Expr]> = args.iter().map(|a| self.expr(a)).collect();
        self.slices.insert(args.as_ptr(), out.clone());
        out
    }

    fn node(&mut self, e: &Arc<Expr>) -> Arc<Expr> {
        if let Some(done) = self.nodes.get(&Arc::as_ptr(e)) {
            return done.clone();
        }
        let out = Arc::new(self.expr(e));
        self.nodes.insert(Arc::as_ptr(e), out.clone());
        out
    }
}

fn inline_expr(e: &Expr, inlined: &HashMap<&str, (&[String], Expr)>) -> Expr {
    Rebuild::new(|e| {
        let Expr::Apply(fname, args) = &e else {
            return e;
        };
        let Some((params, body)) = inlined.get(fname.as_str()) else {
            return e;
        };
        let subst: HashMap<&str, &Expr> =
            params.iter().map(String::as_str).zip(&args[..]).collect();
        let mut out = substitute(body, &subst);
        let guarded = needs_guard(params, args, body);
        for arg in guarded.iter().rev().map(|&i| &args[i]) {
            out = Expr::if_(
                Expr::prim(PrimOp::Equal, vec![arg.clone(), arg.clone()]),
                out,
                Expr::bool(false),
            );
        }
        out
    })
    .expr(e)
}

/// Replaces variables by expressions. Expressions have no binders, so
/// substituted arguments cannot be captured.
fn substitute(e: &Expr, subst: &HashMap<&str, &Expr>) -> Expr {
    Rebuild::new(|e| match &e {
        Expr::Var(x) => subst.get(x.as_str()).map_or(e.clone(), |&a| a.clone()),
        _ => e,
    })
    .expr(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuel::DEFAULT_FUEL;
    use crate::interp::{eval, ErrorKind};
    use crate::lang::free_vars;
    use crate::syntax::{parse_bindings, parse_program, pretty_program};

    const CHAIN: &str = "fun exp_1(x) = x*exp_2(x);\n\
                         fun exp_2(x) = x*exp_3(x);\n\
                         fun exp_3(x) = x*exp_4(x);\n\
                         fun exp_4(x) = 1;\n\
                         main = exp_1(x);\n";
    const RECURSIVE: &str = "fun exp_1(n) = if n==0 then 1 else 2*exp_1(n-1);\nmain = exp_1(n);\n";

    fn names(set: BTreeSet<String>) -> Vec<String> {
        set.into_iter().collect()
    }

    #[test]
    fn non_recursive_sets() {
        let chain = parse_program(CHAIN).unwrap();
        assert_eq!(
            names(call_graph_non_recursive(&chain)),
            ["exp_1", "exp_2", "exp_3", "exp_4"]
        );
        assert!(call_graph_non_recursive(&parse_program(RECURSIVE).unwrap()).is_empty());
        assert!(call_graph_non_recursive(&parse_program("main = 1;").unwrap()).is_empty());
        let mutual = parse_program(
            "fun even(n) = if n==0 then true else odd(n-1);\n\
             fun odd(n) = if n==0 then false else even(n-1);\n\
             fun wrap(n) = even(n);\n\
             main = wrap(k);",
        )
        .unwrap();
        assert_eq!(names(call_graph_non_recursive(&mutual)), ["wrap"]);
    }

    #[test]
    fn chain_collapses_to_product() {
        let p = inline_residual(&parse_program(CHAIN).unwrap());
        assert_eq!(pretty_program(&p), "main = x*(x*(x*1));\n");
    }

    #[test]
    fn recursive_definition_survives() {
        let p = parse_program(RECURSIVE).unwrap();
        assert_eq!(inline_residual(&p), p);
        let trivial = parse_program("main = 8;").unwrap();
        assert_eq!(inline_residual(&trivial), trivial);
    }

    #[test]
    fn inlines_into_recursive_bodies_and_drops_dead_defs() {
        let p = parse_program(
            "fun dec(n) = n-1;\n\
             fun loop(n) = if n==0 then 0 else loop(dec(n));\n\
             fun unused(n) = loop(n);\n\
             main = loop(k);",
        )
        .unwrap();
        let q = inline_residual(&p);
        assert_eq!(
            pretty_program(&q),
            "fun loop(n) = if n==0 then 0 else loop(n-1);\nmain = loop(k);\n"
        );
    }

    #[test]
    fn failing_arguments_keep_their_errors() {
        // `k` ignores its argument, but the call still evaluates it.
        let p = parse_program("fun k(a) = 1; main = k(10/x);").unwrap();
        let q = inline_residual(&p);
        assert_eq!(
            pretty_program(&q),
            "main = if 10/x==10/x then 1 else false;\n"
        );
        let env = parse_bindings("x=0").unwrap();
        assert_eq!(
            eval(&q, &env, DEFAULT_FUEL).unwrap_err().kind(),
            Some(ErrorKind::DivByZero)
        );
        assert_eq!(
            eval(&p, &env, DEFAULT_FUEL).unwrap_err().kind(),
            Some(ErrorKind::DivByZero)
        );
    }

    #[test]
    fn argument_errors_keep_their_order() {
        let p = parse_program("fun f(a,b) = b+a; main = f(head(xs), 1/x);").unwrap();
        let q = inline_residual(&p);
        let env = parse_bindings("xs=[], x=0").unwrap();
        assert_eq!(
            eval(&q, &env, DEFAULT_FUEL).unwrap_err().kind(),
            Some(ErrorKind::HeadOfNil)
        );
    }

    #[test]
    fn nested_calls_share_their_arguments() {
        // Fully expanded, this main has 3^60 nodes.
        let main = (0..60).fold("x".to_string(), |acc, _| format!("f({acc})"));
        let p = parse_program(&format!("fun f(a) = a+a*a; main = {main};")).unwrap();
        let q = inline_residual(&p);
        assert!(q.defs.is_empty());
        assert_eq!(q.main.callees().len(), 0);
        assert_eq!(names(free_vars(&q.main)), ["x"]);
    }

    #[test]
    fn chains_of_callees_share_their_bodies() {
        let mut src: String = (0..60)
            .map(|i| format!("fun f{i}(a) = f{}(a-(if a==3 then a else 1/a));\n", i + 1))
            .collect();
        src.push_str("fun f60(a) = a; main = f0(x);");
        let q = inline_residual(&parse_program(&src).unwrap());
        assert!(q.defs.is_empty());
        assert_eq!(q.main.callees().len(), 0);
        assert_eq!(
            eval(&q, &parse_bindings("x=3").unwrap(), 0),
            eval(
                &parse_program(&src).unwrap(),
                &parse_bindings("x=3").unwrap(),
                DEFAULT_FUEL
            )
        );
    }

    #[test]
    fn arguments_read_first_by_the_body_need_no_guard() {
        let p = parse_program("fun f(a,b) = a+b; main = f(head(xs), 1/x);").unwrap();
        assert_eq!(
            pretty_program(&inline_residual(&p)),
            "main = head(xs)+1/x;\n"
        );
        let p = parse_program("fun f(a,b) = b+a; main = f(head(xs), 1/x);").unwrap();
        assert_eq!(
            pretty_program(&inline_residual(&p)),
            "main = if head(xs)==head(xs) then 1/x+head(xs) else false;\n"
        );
        let p = parse_program("fun f(a) = if isnil(a) then 0 else 1; main = f(tail(xs));").unwrap();
        assert_eq!(
            pretty_program(&inline_residual(&p)),
            "main = if isnil(tail(xs)) then 0 else 1;\n"
        );
        // The division can fail before `a` is read.
        let p = parse_program("fun f(a,b) = b/0+a; main = f(head(xs), 1);").unwrap();
        assert!(pretty_program(&inline_residual(&p)).starts_with("main = if head(xs)==head(xs)"));
    }

    #[test]
    fn idempotent() {
        for src in [CHAIN, RECURSIVE] {
            let once = inline_residual(&parse_program(src).unwrap());
            assert_eq!(inline_residual(&once), once);
        }
    }
}
