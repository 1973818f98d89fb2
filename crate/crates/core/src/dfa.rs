//! Deterministic state machines as programs of the object language.
//!
//! A [`Machine`] is compiled by encoding a machine interpreter together
//! with the machine's tables as constants, then specializing the result
//! with the input word dynamic. Two interpreters are provided:
//!
//! * [`encode_naive`] looks the current state up in the transition table.
//!   Once the current state is dynamic the lookup result is dynamic too,
//!   and the tables survive specialization.
//! * [`encode_bti`] walks the static table and compares each key with the
//!   dynamic state instead. Every value passed on is static, so
//!   specialization unrolls the tables away, leaving one function family
//!   per reachable state.
//!
//! Machine text format, one item per line, `#` starts a comment:
//!
//! ```text
//! start: 1
//! accept: 2
//! from 1 --a--> 2
//! from 2 --a--> 1
//! from 2 --b--> 2
//! ```
//!
//! `accept:` takes a comma- or space-separated list of state ids (possibly
//! empty). Labels are any non-empty run of non-whitespace characters
//! between `--` and `-->`.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::lang::{Expr, Prog, Value};
use crate::syntax::{parse_program, pretty_value};

pub type StateId = i64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub start: StateId,
    pub accept: Vec<StateId>,
    /// Outgoing edges per state, as `(label, target)`.
    pub transitions: Vec<(StateId, Vec<(String, StateId)>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid machine: {0}")]
    Invalid(String),
}

impl Machine {
    /// Two states, 1 (start) and 2 (accepting): `a` moves 1 to 2, and in
    /// state 2 `a` moves back to 1 while `b` stays.
    pub fn example() -> Machine {
        Machine {
            start: 1,
            accept: vec![2],
            transitions: vec![
                (1, vec![("a".into(), 2)]),
                (2, vec![("a".into(), 1), ("b".into(), 2)]),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), MachineError> {
        let invalid = |m: String| Err(MachineError::Invalid(m));
        let mut sources = HashSet::new();
        for (state, edges) in &self.transitions {
            if !sources.insert(*state) {
                return invalid(format!("state {state} has more than one transition entry"));
            }
            let mut labels = HashSet::new();
            for (label, _) in edges {
                if label.is_empty() || label.chars().any(char::is_whitespace) {
                    return invalid(format!("state {state} has a malformed label {label:?}"));
                }
                if !labels.insert(label) {
                    return invalid(format!("state {state} has two `{label}` edges"));
                }
            }
        }
        let known: HashSet<StateId> = sources.iter().chain(&self.accept).copied().collect();
        for (state, edges) in &self.transitions {
            if let Some((label, target)) = edges.iter().find(|(_, t)| !known.contains(t)) {
                return invalid(format!(
                    "edge {state} --{label}--> {target} targets an unknown state"
                ));
            }
        }
        Ok(())
    }

    fn edges(&self, state: StateId) -> Option<&[(String, StateId)]> {
        self.transitions
            .iter()
            .find(|(s, _)| *s == state)
            .map(|(_, e)| e.as_slice())
    }

    /// Sorted, distinct labels over all edges.
    pub fn alphabet(&self) -> Vec<String> {
        let labels: BTreeSet<&String> = self
            .transitions
            .iter()
            .flat_map(|(_, e)| e.iter().map(|(l, _)| l))
            .collect();
        labels.into_iter().cloned().collect()
    }

    pub fn reachable_states(&self) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([self.start]);
        let mut work = vec![self.start];
        while let Some(s) = work.pop() {
            for (_, t) in self.edges(s).unwrap_or_default() {
                if seen.insert(*t) {
                    work.push(*t);
                }
            }
        }
        seen
    }

    pub fn accept_value(&self) -> Value {
        Value::List(self.accept.iter().map(|&s| Value::Int(s)).collect())
    }

    pub fn transitions_value(&self) -> Value {
        Value::List(
            self.transitions
                .iter()
                .map(|(s, edges)| {
                    let edges = edges
                        .iter()
                        .map(|(l, t)| Value::pair(Value::str(l.as_str()), Value::Int(*t)))
                        .collect();
                    Value::pair(Value::Int(*s), Value::List(edges))
                })
                .collect(),
        )
    }

    pub fn parse(src: &str) -> Result<Machine, MachineError> {
        let mut start = None;
        let mut accept = None;
        let mut transitions: Vec<(StateId, Vec<(String, StateId)>)> = Vec::new();

        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| MachineError::Parse { line, message };
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let int = |s: &str| {
                s.trim()
                    .parse::<StateId>()
                    .map_err(|_| err(format!("expected a state id, found `{}`", s.trim())))
            };
            if let Some(rest) = text.strip_prefix("start:") {
                if start.replace(int(rest)?).is_some() {
                    return Err(err("`start` given twice".into()));
                }
            } else if let Some(rest) = text.strip_prefix("accept:") {
                let rest = rest.trim().trim_start_matches('[').trim_end_matches(']');
                let states = rest
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(int)
                    .collect::<Result<Vec<_>, _>>()?;
                if accept.replace(states).is_some() {
                    return Err(err("`accept` given twice".into()));
                }
            } else if let Some(rest) = text.strip_prefix("from ") {
                let malformed = || {
                    err(format!(
                        "expected `from <state> --<label>--> <state>`, found `{text}`"
                    ))
                };
                let rest = rest.trim_start();
                let split = rest.find(char::is_whitespace).ok_or_else(malformed)?;
                let from = int(&rest[..split])?;
                let edge = rest[split..]
                    .trim_start()
                    .strip_prefix("--")
                    .ok_or_else(malformed)?;
                let arrow = edge.rfind("-->").ok_or_else(malformed)?;
                let label = &edge[..arrow];
                if label.is_empty() || label.chars().any(char::is_whitespace) {
                    return Err(err(format!("malformed label `{label}`")));
                }
                let to = int(&edge[arrow + 3..])?;
                match transitions.iter_mut().find(|(s, _)| *s == from) {
                    Some((_, edges)) => edges.push((label.to_string(), to)),
                    None => transitions.push((from, vec![(label.to_string(), to)])),
                }
            } else {
                return Err(err(format!("unrecognized line `{text}`")));
            }
        }

        let machine = Machine {
            start: start.ok_or_else(|| MachineError::Parse {
                line: 0,
                message: "missing `start:` line".into(),
            })?,
            accept: accept.unwrap_or_default(),
            transitions,
        };
        machine.validate()?;
        Ok(machine)
    }
}

/// Direct simulation: a missing transition rejects.
pub fn run_machine_oracle(m: &Machine, input: &[&str]) -> bool {
    let mut state = m.start;
    for label in input {
        let next = m
            .edges(state)
            .and_then(|edges| edges.iter().find(|(l, _)| l == label));
        match next {
            Some((_, t)) => state = *t,
            None => return false,
        }
    }
    m.accept.contains(&state)
}

/// Input word as a list of string values, the form `main` expects for `input`.
pub fn input_value(word: &[&str]) -> Value {
    Value::List(word.iter().map(|&l| Value::str(l)).collect())
}

const ELEM: &str = "\
fun elem(x,xs) = if isnil(xs) then false else if head(xs)==x then true else elem(x,tail(xs));
";

const NAIVE_DEFS: &str = "\
fun lookup(key,table) = if isnil(table) then nothing \
    else if fst(head(table))==key then just(snd(head(table))) \
    else lookup(key,tail(table));
fun run(current,accept,trans,input) = if isnil(input) then elem(current,accept) \
    else if isnothing(lookup(current,trans)) then false \
    else if isnothing(lookup(head(input),fromjust(lookup(current,trans)))) then false \
    else run(fromjust(lookup(head(input),fromjust(lookup(current,trans)))),accept,trans,tail(input));
";

const BTI_DEFS: &str = "\
fun run(current,accept,trans,input) = if isnil(input) then elem(current,accept) \
    else findState(trans,current,accept,trans,input);
fun findState(tbl,current,accept,trans,input) = if isnil(tbl) then false \
    else if fst(head(tbl))==current then findEdge(snd(head(tbl)),head(input),accept,trans,tail(input)) \
    else findState(tail(tbl),current,accept,trans,input);
fun findEdge(edges,label,accept,trans,rest) = if isnil(edges) then false \
    else if fst(head(edges))==label then run(snd(head(edges)),accept,trans,rest) \
    else findEdge(tail(edges),label,accept,trans,rest);
";

fn encode(m: &Machine, defs: &str) -> Result<Prog, MachineError> {
    m.validate()?;
    let src = format!(
        "{ELEM}{defs}main = run({},{},{},input);\n",
        pretty_value(&Value::Int(m.start)),
        pretty_value(&m.accept_value()),
        pretty_value(&m.transitions_value()),
    );
    Ok(parse_program(&src).expect("machine interpreter source is well-formed"))
}

/// Table-lookup interpreter. `main` reads the word from the variable `input`.
pub fn encode_naive(m: &Machine) -> Result<Prog, MachineError> {
    encode(m, NAIVE_DEFS)
}

/// Table-walking interpreter. `main` reads the word from the variable `input`.
pub fn encode_bti(m: &Machine) -> Result<Prog, MachineError> {
    encode(m, BTI_DEFS)
}

/// Number of constants in `p` that hold (or wrap) a list or pair.
pub fn structured_constants(p: &Prog) -> usize {
    let mut count = 0;
    let mut visit = |e: &Expr| {
        if matches!(e, Expr::Const(v) if v.is_structured()) {
            count += 1;
        }
    };
    for def in &p.defs {
        def.body.walk(&mut visit);
    }
    p.main.walk(&mut visit);
    count
}
