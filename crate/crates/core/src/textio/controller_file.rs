//! Controller files: one `state action` pair per line, `#` comments.
//!
//! The action is an action id or an action name of the model. States may be
//! omitted; they take the choice of a synonymous state or the first action.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::family::ParameterSpace;
use crate::model::{Controller, Mdp};

pub fn parse_controller(text: &str, m: &Mdp) -> Result<BTreeMap<usize, usize>, ParseError> {
    let mut out = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut parts = line.split_whitespace();
        let Some(st) = parts.next() else { continue };
        let col = |tok: &str| raw.find(tok).map_or(1, |i| raw[..i].chars().count() + 1);
        let s: usize = st.parse().map_err(|_| ParseError::new(ln + 1, col(st), format!("expected a state, found `{st}`")))?;
        if s >= m.state_count() {
            return Err(ParseError::new(ln + 1, col(st), format!("state {s} out of range")));
        }
        let Some(at) = parts.next() else {
            return Err(ParseError::new(ln + 1, raw.chars().count() + 1, "missing action"));
        };
        let a = match at.parse::<usize>() {
            Ok(id) if m.action(s, id).is_some() => id,
            _ => m
                .actions(s)
                .iter()
                .find(|a| a.name.as_deref() == Some(at))
                .map(|a| a.id)
                .ok_or_else(|| ParseError::new(ln + 1, col(at), format!("state {s} has no action `{at}`")))?,
        };
        if let Some(extra) = parts.next() {
            return Err(ParseError::new(ln + 1, col(extra), format!("unexpected `{extra}`")));
        }
        if out.insert(s, a).is_some() {
            return Err(ParseError::new(ln + 1, col(st), format!("state {s} listed twice")));
        }
    }
    Ok(out)
}

pub fn write_controller(c: &Controller) -> String {
    let mut out = String::new();
    for (s, a) in c.choice.iter().enumerate() {
        let _ = writeln!(out, "{s} {a}");
    }
    out
}

/// Completes partial controllers: an omitted state takes the first listed
/// choice of its parameter class, or the first action of its menu.
pub fn resolve_controllers(ps: &ParameterSpace, m: &Mdp, given: &[BTreeMap<usize, usize>]) -> Vec<Controller> {
    let class_value: Vec<usize> = (0..ps.len())
        .map(|k| {
            ps.members(k).iter().find_map(|&(i, s)| given.get(i).and_then(|g| g.get(&s)).copied()).unwrap_or(ps.domain(k)[0])
        })
        .collect();
    (0..ps.controllers())
        .map(|i| {
            Controller::new(
                (0..m.state_count())
                    .map(|s| given.get(i).and_then(|g| g.get(&s)).copied().unwrap_or(class_value[ps.param(i, s)]))
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_ids_and_errors() {
        let mut b = crate::model::MdpBuilder::new(2);
        b.action(0, 0, Some("up".into())).unwrap();
        b.transition(0, 0, 1, 1.0).unwrap();
        b.transition(0, 1, 0, 1.0).unwrap();
        b.transition(1, 0, 1, 1.0).unwrap();
        let m = b.build().unwrap();
        let c = parse_controller("0 up # comment\n\n1 0\n", &m).unwrap();
        assert_eq!(c, BTreeMap::from([(0, 0), (1, 0)]));
        let e = parse_controller("0 down\n", &m).unwrap_err();
        assert_eq!((e.loc.line, e.loc.column), (1, 3));
        assert!(parse_controller("5 0\n", &m).is_err());
        assert!(parse_controller("0 0\n0 1\n", &m).is_err());
    }

    #[test]
    fn omitted_states_follow_class() {
        let two = vec![vec![(0, 1.0)], vec![(1, 1.0)]];
        let m = Mdp::from_rows(vec![two.clone(), two]).unwrap();
        let s = crate::textio::spec_file::parse_spec("exists c : obs({0, 1}, c) ; forall x in {0}[c] : true").unwrap();
        let ps = ParameterSpace::from_spec(&m, &s).unwrap();
        let cs = resolve_controllers(&ps, &m, &[BTreeMap::from([(1, 1)])]);
        assert_eq!(cs[0].choice, vec![1, 1]);
        let back = parse_controller(&write_controller(&cs[0]), &m).unwrap();
        assert_eq!(back, BTreeMap::from([(0, 1), (1, 1)]));
    }
}
