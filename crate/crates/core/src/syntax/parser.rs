use crate::lang::{Env, Expr, FDef, PrimOp, Prog, Value};

use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

const KEYWORDS: &[&str] = &[
    "fun", "main", "if", "then", "else", "true", "false", "nothing",
];

/// Keywords and builtin operator names cannot be used as identifiers.
pub fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || PrimOp::from_builtin_name(name).is_some()
}

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Parser> {
        let tokens = tokenize(src)?;
        let line = src.split('\n').count();
        let col = src.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Ok(Parser {
            tokens,
            pos: 0,
            eof: (line, col),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn position(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map_or(self.eof, |t| (t.line, t.col))
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.position();
        Err(SyntaxError::Parse {
            line,
            col,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {}", t.describe())),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.at_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_reserved(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) => {
                self.error(format!("`{s}` is reserved and cannot name a {what}"))
            }
            _ => self.unexpected(what),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn expect_end(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    pub(crate) fn program(&mut self) -> PResult<Prog> {
        let mut defs = Vec::new();
        while self.at_keyword("fun") {
            defs.push(self.fundef()?);
        }
        self.expect_keyword("main")?;
        self.expect(Tok::Assign)?;
        let main = self.expr()?;
        self.expect(Tok::Semi)?;
        self.expect_end()?;
        Ok(Prog::new(defs, main))
    }

    fn fundef(&mut self) -> PResult<FDef> {
        self.expect_keyword("fun")?;
        let name = self.ident("function name")?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                params.push(self.ident("parameter name")?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        self.expect(Tok::Assign)?;
        let body = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(FDef { name, params, body })
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        if self.at_keyword("if") {
            self.pos += 1;
            let cond = self.expr()?;
            self.expect_keyword("then")?;
            let then = self.expr()?;
            self.expect_keyword("else")?;
            let els = self.expr()?;
            return Ok(Expr::if_(cond, then, els));
        }
        stacker::maybe_grow(32 * 1024, 1024 * 1024, || self.binary(1))
    }

    fn binary_op(&self, level: u8) -> Option<PrimOp> {
        let op = match (level, self.peek()?) {
            (1, Tok::OrOr) => PrimOp::Or,
            (2, Tok::AndAnd) => PrimOp::And,
            (3, Tok::EqEq) => PrimOp::Equal,
            (3, Tok::Lt) => PrimOp::Lt,
            (3, Tok::Gt) => PrimOp::Gt,
            (4, Tok::Plus) => PrimOp::Add,
            (4, Tok::Minus) => PrimOp::Sub,
            (5, Tok::Star) => PrimOp::Mul,
            (5, Tok::Slash) => PrimOp::Div,
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, level: u8) -> PResult<Expr> {
        if level > 5 {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self.binary_op(level) {
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::prim(op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Bang) {
            let operand = self.unary()?;
            return Ok(Expr::prim(PrimOp::Not, vec![operand]));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.pos;
        match self.peek() {
            Some(Tok::LBracket) => match self.literal()? {
                Some(v) => Ok(Expr::Const(v)),
                None => self.error(
                    "list literals may only contain literal values; use cons(..) to build lists",
                ),
            },
            Some(Tok::LParen) => {
                if let Some(v) = self.literal()? {
                    return Ok(Expr::Const(v));
                }
                self.pos = start + 1;
                let inner = self.expr()?;
                if self.peek() == Some(&Tok::Comma) {
                    return self.error("pair literals may only contain literal values; use pair(..) to build pairs");
                }
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Ident(s)) if s == "just" => {
                if let Some(v) = self.literal()? {
                    return Ok(Expr::Const(v));
                }
                self.builtin_call(PrimOp::Just)
            }
            Some(Tok::Ident(s)) if PrimOp::from_builtin_name(s).is_some() => {
                let op = PrimOp::from_builtin_name(s).expect("checked");
                self.builtin_call(op)
            }
            Some(Tok::Ident(s)) if !is_reserved(s) => {
                let name = s.clone();
                self.pos += 1;
                if self.eat(&Tok::LParen) {
                    let args = self.args()?;
                    Ok(Expr::apply(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            _ => match self.literal()? {
                Some(v) => Ok(Expr::Const(v)),
                None => self.unexpected("expression"),
            },
        }
    }

    fn builtin_call(&mut self, op: PrimOp) -> PResult<Expr> {
        let at = self.position();
        self.pos += 1;
        self.expect(Tok::LParen)?;
        let args = self.args()?;
        if args.len() != op.arity() {
            return Err(SyntaxError::Parse {
                line: at.0,
                col: at.1,
                message: format!(
                    "`{op}` expects {} argument(s), found {}",
                    op.arity(),
                    args.len()
                ),
            });
        }
        Ok(Expr::Prim(op, args.into()))
    }

    /// Arguments after an opening parenthesis, through the closing one.
    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma)?;
        }
    }

    /// Tries to read a value literal. On `None` the position is unchanged.
    pub(crate) fn literal(&mut self) -> PResult<Option<Value>> {
        let start = self.pos;
        let v = stacker::maybe_grow(32 * 1024, 1024 * 1024, || self.literal_inner())?;
        if v.is_none() {
            self.pos = start;
        }
        Ok(v)
    }

    fn literal_inner(&mut self) -> PResult<Option<Value>> {
        let at = self.position();
        let out_of_range = |text: String| SyntaxError::Parse {
            line: at.0,
            col: at.1,
            message: format!("integer literal `{text}` is out of range"),
        };
        let v = match self.bump() {
            Some(Tok::Int(n)) => {
                Value::Int(i64::try_from(n).map_err(|_| out_of_range(n.to_string()))?)
            }
            Some(Tok::Minus) => match self.bump() {
                Some(Tok::Int(n)) => Value::Int(
                    i64::try_from(-i128::from(n)).map_err(|_| out_of_range(format!("-{n}")))?,
                ),
                _ => return Ok(None),
            },
            Some(Tok::Str(s)) => Value::Str(s),
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                "nothing" => Value::Nothing,
                "just" => {
                    if !self.eat(&Tok::LParen) {
                        return Ok(None);
                    }
                    let Some(inner) = self.literal_inner()? else {
                        return Ok(None);
                    };
                    if !self.eat(&Tok::RParen) {
                        return Ok(None);
                    }
                    Value::just(inner)
                }
                _ => return Ok(None),
            },
            Some(Tok::LBracket) => {
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        let Some(item) = self.literal_inner()? else {
                            return Ok(None);
                        };
                        items.push(item);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        if !self.eat(&Tok::Comma) {
                            return Ok(None);
                        }
                    }
                }
                Value::list(items)
            }
            Some(Tok::LParen) => {
                let Some(first) = self.literal_inner()? else {
                    return Ok(None);
                };
                if !self.eat(&Tok::Comma) {
                    return Ok(None);
                }
                let Some(second) = self.literal_inner()? else {
                    return Ok(None);
                };
                if !self.eat(&Tok::RParen) {
                    return Ok(None);
                }
                Value::pair(first, second)
            }
            _ => return Ok(None),
        };
        Ok(Some(v))
    }

    /// `name = literal` entries separated by commas or line breaks.
    pub(crate) fn bindings(&mut self) -> PResult<Env<Value>> {
        let mut env = Env::new();
        while !self.at_end() {
            let (line, _) = self.position();
            let name = self.ident("binding name")?;
            self.expect(Tok::Assign)?;
            let value = match self.literal()? {
                Some(v) => v,
                None => return self.unexpected("value literal"),
            };
            if env.bind(name.clone(), value).is_err() {
                return Err(SyntaxError::DuplicateBinding { name, line });
            }
            if self.eat(&Tok::Comma) || self.at_end() {
                continue;
            }
            let prev_line = self.tokens[self.pos - 1].line;
            if self.position().0 == prev_line {
                return self.unexpected("`,` or line break between bindings");
            }
        }
        Ok(env)
    }
}
