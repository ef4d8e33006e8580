//! Tokenizer and recursive-descent parser.

use std::str::FromStr;

use super::ast::{Cond, Expr, Program, RelOp, Stmt, StmtKind};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::var::{VarId, VarTable};

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Num(Rational),
    Sym(&'static str),
}

const SYMBOLS: [&str; 15] =
    [":=", "<=", ">=", "==", "<", ">", ";", ",", "{", "}", "(", ")", "+", "-", "*"];
const SYMBOL_QUESTION: &str = "?";

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = match (raw.find('#'), raw.find("//")) {
            (Some(a), Some(b)) => &raw[..a.min(b)],
            (Some(a), None) | (None, Some(a)) => &raw[..a],
            (None, None) => raw,
        };
        let mut rest = text;
        while let Some(c) = rest.chars().next() {
            if c.is_whitespace() {
                rest = &rest[c.len_utf8()..];
            } else if c.is_ascii_alphabetic() || c == '_' {
                let end = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                out.push((Tok::Ident(rest[..end].to_string()), line));
                rest = &rest[end..];
            } else if c.is_ascii_digit() {
                let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
                let n = Rational::from_str(&rest[..end])
                    .map_err(|_| Error::Syntax { line, msg: format!("bad number `{}`", &rest[..end]) })?;
                out.push((Tok::Num(n), line));
                rest = &rest[end..];
            } else if c == '?' {
                out.push((Tok::Sym(SYMBOL_QUESTION), line));
                rest = &rest[1..];
            } else if let Some(s) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                out.push((Tok::Sym(s), line));
                rest = &rest[s.len()..];
            } else {
                return Err(Error::Syntax { line, msg: format!("unexpected character `{c}`") });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: VarTable,
    next_id: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { line: self.line(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Num(n)) => format!("`{n}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.peek() == Some(&Tok::Sym(sym(s))) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn eat_keyword(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected a variable name, found {}", self.describe())),
        }
    }

    fn var(&mut self) -> Result<VarId> {
        let line = self.line();
        let name = self.ident()?;
        self.vars
            .get(&name)
            .ok_or(Error::Syntax { line, msg: format!("undeclared variable `{name}`") })
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            if self.peek().is_none() {
                return self.err("unterminated block");
            }
            if let Some(s) = self.stmt()? {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// `None` for declarations, which produce no statement.
    fn stmt(&mut self) -> Result<Option<Stmt>> {
        let line = self.line();
        if self.eat_keyword("var") {
            loop {
                let l = self.line();
                let name = self.ident()?;
                self.vars
                    .declare(name.as_str())
                    .map_err(|_| Error::Syntax { line: l, msg: format!("variable `{name}` declared twice") })?;
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(";")?;
            return Ok(None);
        }
        let id = self.next_id;
        self.next_id += 1;
        let kind = if self.eat_keyword("skip") {
            self.expect_sym(";")?;
            StmtKind::Skip
        } else if self.eat_keyword("havoc") {
            let x = self.var()?;
            self.expect_sym(";")?;
            StmtKind::Havoc(x)
        } else if self.eat_keyword("assume") {
            let c = self.cond()?;
            self.expect_sym(";")?;
            StmtKind::Assume(c)
        } else if self.eat_keyword("assert") {
            let c = self.cond()?;
            self.expect_sym(";")?;
            StmtKind::Assert(c)
        } else if self.eat_keyword("if") {
            let cond = self.cond()?;
            let then = self.block()?;
            let otherwise = if self.eat_keyword("else") {
                if matches!(self.peek(), Some(Tok::Ident(s)) if s == "if") {
                    self.stmt()?.into_iter().collect()
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            StmtKind::If { cond, then, otherwise }
        } else if self.eat_keyword("while") {
            let cond = self.cond()?;
            let body = self.block()?;
            StmtKind::While { cond, body }
        } else if matches!(self.peek(), Some(Tok::Ident(s)) if !is_keyword(s)) {
            let var = self.var()?;
            self.expect_sym(":=")?;
            let rhs = if self.eat_sym("?") { None } else { Some(self.expr()?) };
            self.expect_sym(";")?;
            StmtKind::Assign { var, rhs }
        } else {
            return self.err(format!("expected a statement, found {}", self.describe()));
        };
        Ok(Some(Stmt { id, line, kind }))
    }

    fn cond(&mut self) -> Result<Cond> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Sym("<=")) => RelOp::Le,
            Some(Tok::Sym("<")) => RelOp::Lt,
            Some(Tok::Sym(">=")) => RelOp::Ge,
            Some(Tok::Sym(">")) => RelOp::Gt,
            Some(Tok::Sym("==")) => RelOp::Eq,
            _ => return self.err(format!("expected a comparison, found {}", self.describe())),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Cond { lhs, op, rhs })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat_sym("+") {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat_sym("-") {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.eat_sym("*") {
            e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(_)) => Ok(Expr::Var(self.var()?)),
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }
}

fn sym(s: &str) -> &'static str {
    SYMBOLS
        .iter()
        .copied()
        .chain([SYMBOL_QUESTION])
        .find(|t| *t == s)
        .expect("known symbol")
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "var" | "skip" | "havoc" | "assume" | "assert" | "if" | "else" | "while")
}

/// Parses a whole program. Variables must be declared with `var` before use.
pub fn parse_program(src: &str) -> Result<Program> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, vars: VarTable::new(), next_id: 0 };
    let mut body = Vec::new();
    while p.peek().is_some() {
        if p.peek() == Some(&Tok::Sym("}")) {
            return p.err("unmatched `}`");
        }
        if let Some(s) = p.stmt()? {
            body.push(s);
        }
    }
    Ok(Program { vars: p.vars, body })
}
