//! Line-oriented model format.
//!
//! ```text
//! mdp
//! states 3
//! action 0 0 left
//! trans 0 0 1 1/2
//! trans 0 0 2 0.5
//! label goal 2
//! rew 0 0 1.5
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{ModelError, ParseError};
use crate::model::{Mdp, MdpBuilder};

/// Largest state count accepted by the parser.
pub const MAX_STATES: usize = 1 << 24;
/// Largest action id accepted by the parser.
pub const MAX_ACTION_ID: usize = 1 << 32;

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push(Tok { text: &line[st..i], col: line[..st].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(Tok { text: &line[st..], col: line[..st].chars().count() + 1 });
    }
    out
}

/// Parses a probability or reward literal: a decimal or an exact fraction
/// `num/den`, converted to `f64` once.
pub fn parse_number(text: &str) -> Option<f64> {
    if let Some((n, d)) = text.split_once('/') {
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if !digits(n) || !digits(d) {
            return None;
        }
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return BigRational::new(n, d).to_f64().filter(|v| v.is_finite());
    }
    let ok = !text.is_empty()
        && text.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'-' | b'+'))
        && text.as_bytes()[0].is_ascii_digit();
    if !ok {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_model(text: &str) -> Result<Mdp, ParseError> {
    let mut builder: Option<MdpBuilder> = None;
    let mut seen_header = false;
    // first mention of each (state, action), used to locate build errors
    let mut origin: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut last_line = 0;

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        last_line = ln;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(head) = toks.first() else { continue };
        let err = |col: usize, msg: String| ParseError::new(ln, col, msg);
        let uint = |i: usize, what: &str| -> Result<usize, ParseError> {
            let t = toks.get(i).ok_or_else(|| err(line.chars().count() + 1, format!("expected {what}")))?;
            t.text.parse::<usize>().map_err(|_| err(t.col, format!("expected {what}, found `{}`", t.text)))
        };
        let arity = |n: usize| -> Result<(), ParseError> {
            match toks.get(n) {
                Some(t) => Err(err(t.col, format!("unexpected token `{}`", t.text))),
                None => Ok(()),
            }
        };

        if !seen_header {
            if head.text != "mdp" {
                return Err(err(head.col, "expected `mdp` header".into()));
            }
            arity(1)?;
            seen_header = true;
            continue;
        }
        if head.text == "states" {
            if builder.is_some() {
                return Err(err(head.col, "duplicate `states` line".into()));
            }
            let n = uint(1, "state count")?;
            arity(2)?;
            if n == 0 || n > MAX_STATES {
                return Err(err(toks[1].col, format!("state count {n} out of range")));
            }
            builder = Some(MdpBuilder::new(n));
            continue;
        }
        let b = builder.as_mut().ok_or_else(|| err(head.col, "expected `states` line".into()))?;
        let model_err = |col: usize, e: ModelError| err(col, e.to_string());
        let state = |i: usize, b: &MdpBuilder| -> Result<usize, ParseError> {
            let s = uint(i, "state")?;
            if s >= b.state_count() {
                return Err(err(toks[i].col, format!("state {s} out of range")));
            }
            Ok(s)
        };
        let action_id = |i: usize| -> Result<usize, ParseError> {
            let a = uint(i, "action id")?;
            if a >= MAX_ACTION_ID {
                return Err(err(toks[i].col, format!("action id {a} too large")));
            }
            Ok(a)
        };
        match head.text {
            "action" => {
                let s = state(1, b)?;
                let a = action_id(2)?;
                let name = match toks.get(3) {
                    Some(t) if is_ident(t.text) => Some(t.text.to_string()),
                    Some(t) => return Err(err(t.col, format!("invalid action name `{}`", t.text))),
                    None => None,
                };
                arity(4)?;
                b.action(s, a, name).map_err(|e| model_err(head.col, e))?;
                origin.entry((s, a)).or_insert((ln, head.col));
            }
            "trans" => {
                let s = state(1, b)?;
                let a = action_id(2)?;
                let t = state(3, b)?;
                let ptok = toks.get(4).ok_or_else(|| err(line.chars().count() + 1, "expected probability".into()))?;
                let p = parse_number(ptok.text)
                    .ok_or_else(|| err(ptok.col, format!("invalid probability `{}`", ptok.text)))?;
                arity(5)?;
                b.transition(s, a, t, p).map_err(|e| model_err(ptok.col, e))?;
                origin.entry((s, a)).or_insert((ln, head.col));
            }
            "label" => {
                let name = toks.get(1).ok_or_else(|| err(line.chars().count() + 1, "expected label name".into()))?;
                if !is_ident(name.text) {
                    return Err(err(name.col, format!("invalid label name `{}`", name.text)));
                }
                let mut states = Vec::new();
                for i in 2..toks.len() {
                    states.push(state(i, b)?);
                }
                b.label(name.text, &states).map_err(|e| model_err(name.col, e))?;
            }
            "rew" => {
                let s = state(1, b)?;
                let a = action_id(2)?;
                let rtok = toks.get(3).ok_or_else(|| err(line.chars().count() + 1, "expected reward".into()))?;
                let r = parse_number(rtok.text)
                    .ok_or_else(|| err(rtok.col, format!("invalid reward `{}`", rtok.text)))?;
                arity(4)?;
                b.reward(s, a, r).map_err(|e| model_err(head.col, e))?;
            }
            other => return Err(err(head.col, format!("unknown directive `{other}`"))),
        }
    }

    let b = builder.ok_or_else(|| {
        ParseError::new(last_line.max(1), 1, if seen_header { "missing `states` line" } else { "empty model" })
    })?;
    b.build().map_err(|e| {
        let at = match &e {
            ModelError::BadDistribution { state, action, .. } => origin.get(&(*state, *action)).copied(),
            _ => None,
        };
        let (line, col) = at.unwrap_or((last_line.max(1), 1));
        let msg = match e {
            ModelError::BadDistribution { state, action, sum } if sum == 0.0 => {
                format!("state {state}, action {action}: no transitions")
            }
            e => e.to_string(),
        };
        ParseError::new(line, col, msg)
    })
}

pub fn write_model(m: &Mdp) -> String {
    let mut out = String::new();
    out.push_str("mdp\n");
    let _ = writeln!(out, "states {}", m.state_count());
    for s in 0..m.state_count() {
        for a in m.actions(s) {
            if let Some(name) = &a.name {
                let _ = writeln!(out, "action {s} {} {name}", a.id);
            }
            for &(t, p) in &a.successors {
                let _ = writeln!(out, "trans {s} {} {t} {p}", a.id);
            }
        }
    }
    for (name, states) in m.labels() {
        out.push_str("label ");
        out.push_str(name);
        for s in states {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
    }
    if m.has_rewards() {
        for s in 0..m.state_count() {
            for a in m.actions(s) {
                let _ = writeln!(out, "rew {s} {} {}", a.id, a.reward);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_self_loop() {
        let m = parse_model("mdp\nstates 1\ntrans 0 0 0 1\n").unwrap();
        assert_eq!(m.state_count(), 1);
        assert_eq!(m.actions(0)[0].successors, vec![(0, 1.0)]);
        assert!(!m.has_rewards());
    }

    #[test]
    fn fractions_and_names() {
        let text = "# die\nmdp\nstates 3\naction 0 4 flip\ntrans 0 4 1 1/3 # third\ntrans 0 4 2 2/3\n\
                    trans 1 0 1 1\ntrans 2 0 2 1\nlabel done 1 2\nlabel none\nrew 0 4 2.5\n";
        let m = parse_model(text).unwrap();
        let a = m.action(0, 4).unwrap();
        assert_eq!(a.name.as_deref(), Some("flip"));
        assert_eq!(a.successors, vec![(1, 1.0 / 3.0), (2, 2.0 / 3.0)]);
        assert_eq!(a.reward, 2.5);
        assert_eq!(m.label("done").unwrap(), &[1, 2]);
        assert_eq!(m.label("none").unwrap(), &[] as &[usize]);
        assert_eq!(parse_model(&write_model(&m)).unwrap(), m);
    }

    #[test]
    fn diagnostics_carry_locations() {
        let e = parse_model("mdp\nstates 2\ntrans 0 0 1 0.5\ntrans 1 0 1 1\n").unwrap_err();
        assert_eq!((e.loc.line, e.loc.column), (3, 1));
        let e = parse_model("mdp\nstates 2\ntrans 0 0 1 1\ntrans 0 0 1 1\n").unwrap_err();
        assert_eq!(e.loc.line, 4);
        assert!(e.msg.contains("duplicate transition"));
        let e = parse_model("mdp\nstates 2\ntrans 0 0 1 1\ntrans 1 0 1 1\nlabel x 7\n").unwrap_err();
        assert_eq!((e.loc.line, e.loc.column), (5, 9));
        let e = parse_model("mdp\nstates 2\naction 0 0\ntrans 1 0 1 1\n").unwrap_err();
        assert!(e.msg.contains("no transitions"), "{e}");
        assert!(parse_model("").is_err());
        assert!(parse_model("mdp\n").is_err());
        assert!(parse_model("mdp\nstates 99999999999\n").is_err());
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/6"), Some(1.0 / 6.0));
        assert_eq!(parse_number("0.25"), Some(0.25));
        assert_eq!(parse_number("1e-3"), Some(1e-3));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("-1"), None);
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number(".5"), None);
    }
}
