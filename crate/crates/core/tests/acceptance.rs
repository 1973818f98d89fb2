//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use peval::cli::{check, Verdict};
use peval::dfa::{
    encode_bti, encode_naive, input_value, run_machine_oracle, structured_constants, Machine,
};
use peval::lang::value_eq;
use peval::syntax::{parse_expr, parse_program, pretty_program};
use peval::{eval, inline_residual, Env, EvalError, Expr, PevalError, PrimOp, Value, DEFAULT_FUEL};

fn var(x: &str) -> Expr {
    Expr::var(x)
}

fn int(n: i64) -> Expr {
    Expr::int(n)
}

fn mul(a: Expr, b: Expr) -> Expr {
    Expr::prim(PrimOp::Mul, vec![a, b])
}

/// `x*(x*(x*1))`, built node by node.
fn cubed() -> Expr {
    mul(var("x"), mul(var("x"), mul(var("x"), int(1))))
}

fn interpreter_golden() {
    let p =
        parse_program(&std::fs::read_to_string(corpus_dir().join("exp_2_3.fl")).unwrap()).unwrap();
    assert_eq!(eval(&p, &Env::new(), DEFAULT_FUEL), Ok(Value::Int(8)));
    let general = exp_with_main("exp(x,n)");
    let full = env(&[("x", 2.into()), ("n", 3.into())]);
    assert_eq!(eval(&general, &full, DEFAULT_FUEL), Ok(Value::Int(8)));
}

fn naive_golden() {
    let p = exp_with_main("exp(x,n)");
    let residual = peval_naive_checked(&p, &env(&[("n", 3.into())]), DEFAULT_FUEL).unwrap();
    assert_eq!(residual, cubed());
    let p = exp_with_main("exp(x,3)");
    assert_eq!(
        peval_naive_checked(&p, &Env::new(), DEFAULT_FUEL).unwrap(),
        cubed()
    );
}

fn divergence_control() {
    let p = exp_with_main("exp(2,n)");
    let statics = env(&[("x", 2.into())]);
    for fuel in [10, 100, 1000] {
        assert_eq!(
            peval_naive_checked(&p, &statics, fuel),
            Err(PevalError::FuelExhausted),
            "naive PE at fuel {fuel}"
        );
    }
    let r = peval_checked(&p, &statics, DEFAULT_FUEL).unwrap();
    assert_eq!(r.defs.len(), 1);
    let f = &r.defs[0];
    assert_eq!(f.params, ["n"]);
    let expected = Expr::if_(
        Expr::prim(PrimOp::Equal, vec![var("n"), int(0)]),
        int(1),
        mul(
            int(2),
            Expr::apply(
                &f.name,
                vec![Expr::prim(PrimOp::Sub, vec![var("n"), int(1)])],
            ),
        ),
    );
    assert_eq!(f.body, expected);
    assert_eq!(r.main, Expr::apply(&f.name, vec![var("n")]));
}

fn specializer_golden() {
    let r = peval_checked(
        &exp_with_main("exp(x,n)"),
        &env(&[("n", 3.into())]),
        DEFAULT_FUEL,
    )
    .unwrap();
    assert_eq!(r.defs.len(), 4);
    for (i, f) in r.defs.iter().enumerate() {
        assert_eq!(f.params, ["x"], "{}", f.name);
        let expected = match r.defs.get(i + 1) {
            Some(next) => mul(var("x"), Expr::apply(&next.name, vec![var("x")])),
            None => int(1),
        };
        assert_eq!(f.body, expected, "{}", f.name);
    }
    assert_eq!(r.main, Expr::apply(&r.defs[0].name, vec![var("x")]));
    let inlined = inline_residual(&r);
    assert!(inlined.defs.is_empty(), "{}", pretty_program(&inlined));
    assert_eq!(inlined.main, cubed());
}

fn conditional_goldens() {
    let p = parse_program(&std::fs::read_to_string(corpus_dir().join("cond.fl")).unwrap()).unwrap();
    let y0 = peval_naive_checked(&p, &env(&[("y", 0.into())]), DEFAULT_FUEL).unwrap();
    assert_eq!(y0, parse_expr("if x>0 then 10/x else 0").unwrap());
    let x0 = peval_naive_checked(&p, &env(&[("x", 0.into())]), DEFAULT_FUEL).unwrap();
    let Expr::If(cond, then, els) = &x0 else {
        panic!("expected a conditional, got {x0:?}")
    };
    assert_eq!(**cond, parse_expr("0>y").unwrap());
    assert_eq!(
        **then,
        Expr::prim(
            PrimOp::Div,
            vec![Expr::prim(PrimOp::Add, vec![int(10), var("y")]), int(0)]
        )
    );
    assert_eq!(**els, var("y"));
}

fn residual_correctness() {
    let p = exp_with_main("exp(x,n)");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut checked = 0;
    for _ in 0..200 {
        let full = env(&[
            ("x", rng.random_range(-20..=20).into()),
            ("n", rng.random_range(0..=8).into()),
        ]);
        let splits = splits(&full);
        assert_eq!(splits.len(), 4);
        for (st, dy) in splits {
            peval_checked(&p, &st, DEFAULT_FUEL).unwrap();
            let report = check(&p, &st, &dy, DEFAULT_FUEL).unwrap();
            assert_eq!(
                report.verdict,
                Verdict::Equal,
                "static {st:?}, dynamic {dy:?}: {report:?}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 800);

    let m = Machine::example();
    let bti = encode_bti(&m).unwrap();
    for word in words(&["a", "b"], 4) {
        let dy = env(&[("input", input_value(&word))]);
        let report = check(&bti, &Env::new(), &dy, DEFAULT_FUEL).unwrap();
        assert_eq!(report.verdict, Verdict::Equal, "{word:?}: {report:?}");
        assert_eq!(
            report.original,
            Ok(Value::Bool(run_machine_oracle(&m, &word))),
            "{word:?}"
        );
    }
}

fn dfa_pair() {
    let m = Machine::example();
    let naive = peval_checked(&encode_naive(&m).unwrap(), &Env::new(), DEFAULT_FUEL).unwrap();
    assert!(
        structured_constants(&naive) >= 1,
        "{}",
        pretty_program(&naive)
    );
    assert!(structured_constants(&inline_residual(&naive)) >= 1);

    let bti = specialize_checked(&encode_bti(&m).unwrap(), &Env::new(), DEFAULT_FUEL).unwrap();
    assert_eq!(
        structured_constants(&bti.prog),
        0,
        "{}",
        pretty_program(&bti.prog)
    );
    let inlined = inline_residual(&bti.prog);
    assert_eq!(
        structured_constants(&inlined),
        0,
        "{}",
        pretty_program(&inlined)
    );
    let run_states: BTreeSet<i64> = bti
        .keys
        .iter()
        .filter(|k| k.function == "run")
        .map(|k| match k.statics.iter().find(|(p, _)| p == "current") {
            Some((_, Value::Int(s))) => *s,
            other => panic!("run specialized without a static state: {other:?}"),
        })
        .collect();
    assert_eq!(run_states, m.reachable_states());
    for word in words(&["a", "b"], 4) {
        let dy = env(&[("input", input_value(&word))]);
        let expected = Ok(Value::Bool(run_machine_oracle(&m, &word)));
        assert_eq!(eval(&bti.prog, &dy, DEFAULT_FUEL), expected, "{word:?}");
        assert_eq!(
            eval(&inlined, &dy, DEFAULT_FUEL),
            expected,
            "{word:?} inlined"
        );
    }
}

fn invariant_suites() {
    let samples = [
        Value::Int(0),
        Value::Int(-3),
        Value::Bool(true),
        Value::str("a"),
        Value::pair(1.into(), Value::list(vec![])),
        Value::list(vec![1.into(), 2.into()]),
        Value::Nothing,
        Value::just(Value::str("a")),
    ];
    for a in &samples {
        assert!(value_eq(a, a));
        for b in &samples {
            assert_eq!(value_eq(a, b), value_eq(b, a));
            for c in &samples {
                if value_eq(a, b) && value_eq(b, c) {
                    assert!(value_eq(a, c));
                }
            }
        }
    }

    for (name, src) in corpus_sources() {
        let p = parse_program(&src).unwrap();
        let printed = pretty_program(&p);
        assert_eq!(parse_program(&printed).unwrap(), p, "{name}");
        assert_eq!(
            pretty_program(&parse_program(&printed).unwrap()),
            printed,
            "{name}"
        );
    }

    let p = exp_with_main("exp(x,n)");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..100 {
        let full = env(&[
            ("x", rng.random_range(-50..=50).into()),
            ("n", rng.random_range(0..=6).into()),
        ]);
        let expected = eval(&p, &full, DEFAULT_FUEL).unwrap();
        let r = peval_checked(&p, &full, DEFAULT_FUEL).unwrap();
        assert!(r.defs.is_empty());
        assert_eq!(r.main, Expr::Const(expected));
    }

    let fills = [
        Value::Int(0),
        Value::Int(2),
        Value::list(vec![]),
        input_value(&["a", "b"]),
        Value::list(vec![Value::pair(2.into(), Value::str("v"))]),
    ];
    for (name, p) in corpus_programs() {
        let free: Vec<String> = peval::lang::free_vars(&p.main).into_iter().collect();
        for (st, _) in splits(&free.iter().map(|x| (x.as_str(), Value::Int(0))).collect()) {
            let Ok(r) = peval_checked(&p, &st, DEFAULT_FUEL) else {
                continue;
            };
            let once = inline_residual(&r);
            assert!(once.validate().is_ok(), "{name}");
            assert_eq!(
                inline_residual(&once),
                once,
                "{name}: inlining is not idempotent"
            );
            for fill in &fills {
                let dy: Env<Value> = free
                    .iter()
                    .filter(|x| !st.contains(x))
                    .map(|x| (x.as_str(), fill.clone()))
                    .collect();
                let before = eval(&r, &dy, DEFAULT_FUEL);
                let after = eval(&once, &dy, 4 * DEFAULT_FUEL);
                if before == Err(EvalError::FuelExhausted) || after == Err(EvalError::FuelExhausted)
                {
                    continue;
                }
                let agree = match (&before, &after) {
                    (Ok(a), Ok(b)) => a == b,
                    (Err(a), Err(b)) => a.kind() == b.kind(),
                    _ => false,
                };
                assert!(agree, "{name}: {before:?} vs {after:?} on {dy:?}");
            }
        }
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 8] = [
        ("interpreter golden: exp(2,3) = 8", interpreter_golden),
        ("naive PE golden: exp(x,3) -> x*(x*(x*1))", naive_golden),
        (
            "divergence control: naive PE runs out of fuel, specializer ties the knot",
            divergence_control,
        ),
        (
            "specializer golden: four-definition chain, inlined to x*(x*(x*1))",
            specializer_golden,
        ),
        (
            "conditional goldens: static y, static x with delayed division",
            conditional_goldens,
        ),
        (
            "residual correctness: exp over 200 environments x 4 splits, BTI machine",
            residual_correctness,
        ),
        (
            "machine compilation: naive keeps tables, BTI eliminates them",
            dfa_pair,
        ),
        ("invariant suites", invariant_suites),
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        match panic::catch_unwind(AssertUnwindSafe(criterion)) {
            Ok(()) => println!("criterion {}: PASS  {name}", i + 1),
            Err(payload) => {
                failures += 1;
                let message = payload
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| payload.downcast_ref::<&str>().copied())
                    .unwrap_or("panicked");
                println!("criterion {}: FAIL  {name}\n    {message}", i + 1);
            }
        }
    }
    let _ = panic::take_hook();
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
