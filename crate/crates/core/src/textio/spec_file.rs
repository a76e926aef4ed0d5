//! Concrete syntax of hyperspecifications.
//!
//! ```text
//! exists a, b : same(4, {a, b}) & obs({1, 2}, a) ;
//!   forall x in {0}[a], forall y in {3}[b] :
//!     R(x, F done) = R(y, F done) ~0.01 & R(x, F done) >= 1
//! ```
//!
//! `!` binds tighter than `&`, which binds tighter than `|`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::textio::spec::*;

const MAX_DEPTH: usize = 200;
const KEYWORDS: &[&str] = &["exists", "forall", "in", "same", "obs", "true", "false", "P", "R", "F"];

#[derive(Debug, Clone, PartialEq)]
enum T {
    Ident(String),
    Num(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    t: T,
    line: usize,
    col: usize,
}

const PUNCTS: &[&str] = &["<=", ">=", "==", "{", "}", "(", ")", "[", "]", ",", ":", ";", "&", "|", "!", "~", "<", ">", "="];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let t = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            T::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            T::Num(chars[start..i].iter().collect())
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    i += p.len();
                    T::Punct(p)
                }
                None => return Err(ParseError::new(line, col, format!("unexpected character `{c}`"))),
            }
        };
        out.push(Token { t, line, col });
        col += i - start;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    controllers: Vec<String>,
    vars: Vec<(String, usize)>,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&T> {
        self.toks.get(self.pos).map(|t| &t.t)
    }

    fn peek_at(&self, k: usize) -> Option<&T> {
        self.toks.get(self.pos + k).map(|t| &t.t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn err<X>(&self, msg: impl Into<String>) -> PResult<X> {
        let (l, c) = self.here();
        Err(ParseError::new(l, c, msg))
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(T::Ident(s)) | Some(T::Num(s)) => format!("`{s}`"),
            Some(T::Punct(p)) => format!("`{p}`"),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(T::Punct(q)) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(T::Ident(s)) if s == k)
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.is_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{k}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(T::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn label(&mut self) -> PResult<String> {
        match self.peek() {
            Some(T::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected label, found {}", self.describe())),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        match self.peek() {
            Some(T::Num(s)) => match s.parse::<usize>() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                Err(_) => self.err(format!("expected state index, found `{s}`")),
            },
            _ => self.err(format!("expected state index, found {}", self.describe())),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match self.peek() {
            Some(T::Num(s)) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    self.pos += 1;
                    Ok(v)
                }
                _ => self.err(format!("invalid number `{s}`")),
            },
            _ => self.err(format!("expected number, found {}", self.describe())),
        }
    }

    fn controller_ref(&mut self) -> PResult<String> {
        let here = self.here();
        let name = self.ident("controller name")?;
        if !self.controllers.contains(&name) {
            return Err(ParseError::new(here.0, here.1, format!("undeclared controller `{name}`")));
        }
        Ok(name)
    }

    fn int_set(&mut self) -> PResult<Vec<usize>> {
        self.expect_punct("{")?;
        let mut v = vec![self.int()?];
        while self.is_punct(",") {
            self.pos += 1;
            v.push(self.int()?);
        }
        self.expect_punct("}")?;
        Ok(v)
    }

    fn spec(&mut self) -> PResult<HyperSpec> {
        self.expect_kw("exists")?;
        loop {
            let here = self.here();
            let c = self.ident("controller name")?;
            if self.controllers.contains(&c) {
                return Err(ParseError::new(here.0, here.1, format!("duplicate controller `{c}`")));
            }
            self.controllers.push(c);
            if !self.is_punct(",") {
                break;
            }
            self.pos += 1;
        }
        self.expect_punct(":")?;
        let mut struc = Vec::new();
        if (self.is_kw("same") || self.is_kw("obs")) && matches!(self.peek_at(1), Some(T::Punct("("))) {
            loop {
                struc.push(self.constraint()?);
                if !self.is_punct("&") {
                    break;
                }
                self.pos += 1;
            }
            self.expect_punct(";")?;
        }
        let mut quants = vec![self.quant()?];
        while self.is_punct(",") {
            self.pos += 1;
            quants.push(self.quant()?);
        }
        self.expect_punct(":")?;
        let prob = self.or()?;
        if self.pos < self.toks.len() {
            return self.err(format!("unexpected {}", self.describe()));
        }
        Ok(HyperSpec { controllers: std::mem::take(&mut self.controllers), struc, quants, prob })
    }

    fn constraint(&mut self) -> PResult<Constraint> {
        if self.is_kw("same") {
            self.pos += 1;
            self.expect_punct("(")?;
            let state = self.int()?;
            self.expect_punct(",")?;
            self.expect_punct("{")?;
            let mut controllers = vec![self.controller_ref()?];
            while self.is_punct(",") {
                self.pos += 1;
                controllers.push(self.controller_ref()?);
            }
            self.expect_punct("}")?;
            self.expect_punct(")")?;
            Ok(Constraint::Same { state, controllers })
        } else {
            self.expect_kw("obs")?;
            self.expect_punct("(")?;
            let states = self.int_set()?;
            self.expect_punct(",")?;
            let controller = self.controller_ref()?;
            self.expect_punct(")")?;
            Ok(Constraint::Obs { states, controller })
        }
    }

    fn quant(&mut self) -> PResult<StateQuant> {
        let quantifier = if self.is_kw("forall") {
            Quantifier::Forall
        } else if self.is_kw("exists") {
            Quantifier::Exists
        } else {
            return self.err(format!("expected `forall` or `exists`, found {}", self.describe()));
        };
        self.pos += 1;
        let here = self.here();
        let var = self.ident("state variable")?;
        if self.vars.iter().any(|(v, _)| *v == var) {
            return Err(ParseError::new(here.0, here.1, format!("state variable `{var}` declared twice")));
        }
        self.expect_kw("in")?;
        let domain = self.int_set()?;
        self.expect_punct("[")?;
        let controller = self.controller_ref()?;
        self.expect_punct("]")?;
        self.vars.push((var.clone(), self.vars.len()));
        Ok(StateQuant { quantifier, var, domain, controller })
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("formula nested too deeply");
        }
        Ok(())
    }

    fn or(&mut self) -> PResult<Prob> {
        self.enter()?;
        let mut v = vec![self.and()?];
        while self.is_punct("|") {
            self.pos += 1;
            v.push(self.and()?);
        }
        self.depth -= 1;
        Ok(if v.len() == 1 { v.pop().unwrap() } else { Prob::Or(v) })
    }

    fn and(&mut self) -> PResult<Prob> {
        let mut v = vec![self.unary()?];
        while self.is_punct("&") {
            self.pos += 1;
            v.push(self.unary()?);
        }
        Ok(if v.len() == 1 { v.pop().unwrap() } else { Prob::And(v) })
    }

    fn unary(&mut self) -> PResult<Prob> {
        if self.is_punct("!") {
            self.pos += 1;
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Prob::Not(Box::new(inner)));
        }
        if self.is_punct("(") {
            self.pos += 1;
            let p = self.or()?;
            self.expect_punct(")")?;
            return Ok(p);
        }
        if self.is_kw("true") {
            self.pos += 1;
            return Ok(Prob::True);
        }
        if self.is_kw("false") {
            self.pos += 1;
            return Ok(Prob::False);
        }
        self.atom().map(Prob::Atom)
    }

    fn term(&mut self) -> PResult<(AtomKind, Operand)> {
        let kind = if self.is_kw("P") {
            AtomKind::Reach
        } else if self.is_kw("R") {
            AtomKind::Reward
        } else {
            return self.err(format!("expected `P`, `R`, `true`, `false`, `!` or `(`, found {}", self.describe()));
        };
        self.pos += 1;
        self.expect_punct("(")?;
        let here = self.here();
        let var = self.ident("state variable")?;
        if !self.vars.iter().any(|(v, _)| *v == var) {
            return Err(ParseError::new(here.0, here.1, format!("undeclared state variable `{var}`")));
        }
        self.expect_punct(",")?;
        self.expect_kw("F")?;
        let target = self.label()?;
        self.expect_punct(")")?;
        Ok((kind, Operand { var, target }))
    }

    fn atom(&mut self) -> PResult<ProbAtom> {
        let (kind, left) = self.term()?;
        let rel = match self.peek() {
            Some(T::Punct("<")) => Rel::Lt,
            Some(T::Punct("<=")) => Rel::Le,
            Some(T::Punct("=")) | Some(T::Punct("==")) => Rel::Eq,
            Some(T::Punct(">")) => Rel::Gt,
            Some(T::Punct(">=")) => Rel::Ge,
            _ => return self.err(format!("expected comparison, found {}", self.describe())),
        };
        self.pos += 1;
        let here = self.here();
        let right = if matches!(self.peek(), Some(T::Num(_))) {
            let v = self.number()?;
            let ok = match kind {
                AtomKind::Reach => (0.0..=1.0).contains(&v),
                AtomKind::Reward => v >= 0.0,
            };
            if !ok {
                return Err(ParseError::new(here.0, here.1, format!("bound {v} out of range")));
            }
            Rhs::Const(v)
        } else {
            let (k2, o) = self.term()?;
            if k2 != kind {
                return Err(ParseError::new(here.0, here.1, "mixed `P` and `R` operands in one comparison"));
            }
            Rhs::Operand(o)
        };
        let mut eps = None;
        if self.is_punct("~") {
            if rel != Rel::Eq {
                return self.err("tolerance `~` is only allowed on `=`");
            }
            self.pos += 1;
            eps = Some(self.number()?);
        }
        Ok(ProbAtom { kind, left, rel, right, eps })
    }
}

pub fn parse_spec(src: &str) -> Result<HyperSpec, ParseError> {
    let toks = lex(src)?;
    let lines = src.split('\n').count();
    let last_col = src.split('\n').next_back().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser { toks, pos: 0, end: (lines.max(1), last_col), controllers: Vec::new(), vars: Vec::new(), depth: 0 };
    let spec = p.spec()?;
    spec.validate().map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    Ok(spec)
}

fn write_ids(out: &mut String, ids: &[String]) {
    out.push_str(&ids.join(", "));
}

fn write_ints(out: &mut String, v: &[usize]) {
    out.push('{');
    let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    out.push_str(&parts.join(", "));
    out.push('}');
}

fn write_term(out: &mut String, kind: AtomKind, o: &Operand) {
    let k = if kind == AtomKind::Reach { "P" } else { "R" };
    let _ = write!(out, "{k}({}, F {})", o.var, o.target);
}

pub fn write_atom(out: &mut String, a: &ProbAtom) {
    write_term(out, a.kind, &a.left);
    let _ = write!(out, " {} ", a.rel.symbol());
    match &a.right {
        Rhs::Const(v) => {
            let _ = write!(out, "{v}");
        }
        Rhs::Operand(o) => write_term(out, a.kind, o),
    }
    if let Some(e) = a.eps {
        let _ = write!(out, " ~{e}");
    }
}

fn simple(p: &Prob) -> bool {
    matches!(p, Prob::True | Prob::False | Prob::Atom(_))
}

pub fn write_prob(out: &mut String, p: &Prob) {
    let child = |out: &mut String, q: &Prob| {
        if simple(q) {
            write_prob(out, q);
        } else {
            out.push('(');
            write_prob(out, q);
            out.push(')');
        }
    };
    match p {
        Prob::True => out.push_str("true"),
        Prob::False => out.push_str("false"),
        Prob::Atom(a) => write_atom(out, a),
        Prob::Not(q) => {
            out.push('!');
            child(out, q);
        }
        Prob::And(v) | Prob::Or(v) => {
            let sep = if matches!(p, Prob::And(_)) { " & " } else { " | " };
            if v.is_empty() {
                out.push_str(if matches!(p, Prob::And(_)) { "true" } else { "false" });
            }
            for (i, q) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                child(out, q);
            }
        }
    }
}

pub fn write_spec(spec: &HyperSpec) -> String {
    let mut out = String::from("exists ");
    write_ids(&mut out, &spec.controllers);
    out.push_str(" :");
    if !spec.struc.is_empty() {
        for (i, c) in spec.struc.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { " & " });
            match c {
                Constraint::Same { state, controllers } => {
                    let _ = write!(out, "same({state}, {{");
                    write_ids(&mut out, controllers);
                    out.push_str("})");
                }
                Constraint::Obs { states, controller } => {
                    out.push_str("obs(");
                    write_ints(&mut out, states);
                    let _ = write!(out, ", {controller})");
                }
            }
        }
        out.push_str(" ;");
    }
    for (i, q) in spec.quants.iter().enumerate() {
        out.push_str(if i == 0 { "\n  " } else { ", " });
        out.push_str(if q.quantifier == Quantifier::Forall { "forall " } else { "exists " });
        let _ = write!(out, "{} in ", q.var);
        write_ints(&mut out, &q.domain);
        let _ = write!(out, "[{}]", q.controller);
    }
    out.push_str(" :\n  ");
    write_prob(&mut out, &spec.prob);
    out.push('\n');
    out
}

/// Names usable as controller or variable identifiers.
pub fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

/// Identifiers reserved by the grammar.
pub fn keywords() -> BTreeSet<&'static str> {
    KEYWORDS.iter().copied().collect()
}
