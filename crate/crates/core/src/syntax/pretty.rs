use std::fmt::Write;

use crate::lang::{Expr, PrimOp, Prog, Value};

const ATOM: u8 = 7;
const UNARY: u8 = 6;

fn binary_level(op: PrimOp) -> Option<u8> {
    Some(match op {
        PrimOp::Or => 1,
        PrimOp::And => 2,
        PrimOp::Equal | PrimOp::Lt | PrimOp::Gt => 3,
        PrimOp::Add | PrimOp::Sub => 4,
        PrimOp::Mul | PrimOp::Div => 5,
        _ => return None,
    })
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::If(..) => 0,
        Expr::Prim(PrimOp::Not, _) => UNARY,
        Expr::Prim(op, args) if args.len() == 2 => binary_level(*op).unwrap_or(ATOM),
        _ => ATOM,
    }
}

/// One definition per line, `main` last, trailing newline.
pub fn pretty_program(p: &Prog) -> String {
    let mut out = String::new();
    for def in &p.defs {
        let _ = write!(out, "fun {}({}) = ", def.name, def.params.join(","));
        write_expr(&mut out, &def.body);
        out.push_str(";\n");
    }
    out.push_str("main = ");
    write_expr(&mut out, &p.main);
    out.push_str(";\n");
    out
}

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

/// Value in literal syntax, e.g. `[(1,"a")]`.
pub fn pretty_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Str(s) => {
            out.push('"');
            for c in s.chars() {
                if c == '"' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('"');
        }
        Value::Pair(a, b) => {
            out.push('(');
            write_value(out, a);
            out.push(',');
            write_value(out, b);
            out.push(')');
        }
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Nothing => out.push_str("nothing"),
        Value::Just(inner) => {
            out.push_str("just(");
            write_value(out, inner);
            out.push(')');
        }
    }
}

fn write_operand(out: &mut String, e: &Expr, min_level: u8) {
    if level(e) < min_level {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_expr(out, arg);
    }
    out.push(')');
}

fn write_expr(out: &mut String, e: &Expr) {
    stacker::maybe_grow(32 * 1024, 1024 * 1024, || match e {
        // Negative literals are parenthesized so `a-(-1)` never prints as a comment.
        Expr::Const(Value::Int(n)) if *n < 0 => {
            let _ = write!(out, "({n})");
        }
        Expr::Const(v) => write_value(out, v),
        Expr::Var(x) => out.push_str(x),
        Expr::Apply(f, args) => {
            out.push_str(f);
            write_args(out, args);
        }
        Expr::If(c, t, f) => {
            out.push_str("if ");
            write_expr(out, c);
            out.push_str(" then ");
            write_expr(out, t);
            out.push_str(" else ");
            write_expr(out, f);
        }
        Expr::Prim(PrimOp::Not, args) if args.len() == 1 => {
            out.push('!');
            write_operand(out, &args[0], UNARY);
        }
        Expr::Prim(op, args) if args.len() == 2 && binary_level(*op).is_some() => {
            let lvl = binary_level(*op).expect("binary");
            write_operand(out, &args[0], lvl);
            out.push_str(op.symbol().expect("infix"));
            write_operand(out, &args[1], lvl + 1);
        }
        // `just(<literal>)` would read back as a constant; an extra pair of
        // parentheses keeps the primitive form.
        Expr::Prim(PrimOp::Just, args) if matches!(&args[..], [Expr::Const(_)]) => {
            out.push_str("just((");
            write_expr(out, &args[0]);
            out.push_str("))");
        }
        Expr::Prim(op, args) => {
            out.push_str(op.builtin_name().unwrap_or("?"));
            write_args(out, args);
        }
    })
}
