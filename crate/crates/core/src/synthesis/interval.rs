//! Interval reasoning about a comparison over a whole subfamily.
//!
//! For `A <= B + c`, extremal analysis of the restricted MDPs gives
//! `A in [lb_a, ub_a]` and `B in [lb_b, ub_b]` for every member of the node.
//! The comparison holds for all members when `ub_a <= lb_b + c`, fails for
//! all when `lb_a > ub_b + c`, and otherwise candidate partial assignments
//! built from the extremal controllers may still satisfy it.

use std::collections::HashMap;
use std::rc::Rc;

use serde::Serialize;

use crate::analysis::{extremal, Dir, ExtremalResult, Settings};
use crate::error::ModelError;
use crate::family::{node_restrict, partial_from, relevant_states, Conflict, Disagreement, FamilyNode, ParameterSpace, PartialAssignment};
use crate::model::{Controller, Mdp, TargetSet};
use crate::synthesis::formula::{Cmp, Instantiated, CMP_SLACK};
use crate::textio::spec::AtomKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    AllSat,
    AllUnsat,
    Ambiguous3,
    Ambiguous4,
    Ambiguous5,
}

impl Tag {
    pub fn decided(self) -> Option<bool> {
        match self {
            Tag::AllSat => Some(true),
            Tag::AllUnsat => Some(false),
            _ => None,
        }
    }
}

/// `x <= y + c` (or `<`) with the comparison slack and the guard band
/// applied toward failure.
pub fn surely(x: f64, y: f64, c: f64, strict: bool, guard: f64) -> bool {
    if strict {
        x < y + c - CMP_SLACK - guard
    } else {
        x <= y + c + CMP_SLACK - guard
    }
}

/// Negation of the comparison, with the guard band applied toward failure.
pub fn surely_not(x: f64, y: f64, c: f64, strict: bool, guard: f64) -> bool {
    if strict {
        x >= y + c - CMP_SLACK + guard
    } else {
        x > y + c + CMP_SLACK + guard
    }
}

/// Case tag of a comparison given both intervals. Undecided comparisons are
/// tagged 3 when only `lb_a` vs `lb_b` holds, 4 when only `ub_a` vs `ub_b`
/// holds, and 5 otherwise.
pub fn classify(lb_a: f64, ub_a: f64, lb_b: f64, ub_b: f64, c: f64, strict: bool, guard: f64) -> Tag {
    if surely(ub_a, lb_b, c, strict, guard) {
        return Tag::AllSat;
    }
    if surely_not(lb_a, ub_b, c, strict, guard) {
        return Tag::AllUnsat;
    }
    let c3 = surely(lb_a, lb_b, c, strict, 0.0);
    let c4 = surely(ub_a, ub_b, c, strict, 0.0);
    match (c3, c4) {
        (true, false) => Tag::Ambiguous3,
        (false, true) => Tag::Ambiguous4,
        _ => Tag::Ambiguous5,
    }
}

/// An extremal controller of one side of a comparison.
#[derive(Debug, Clone)]
pub struct SideWitness {
    pub slot: usize,
    pub term: usize,
    pub dir: Dir,
    pub witness: Controller,
    /// States whose choices determine the side's value.
    pub relevant: Vec<bool>,
    /// The assignment fixing the relevant choices, or why it is inconsistent.
    pub assignment: Result<PartialAssignment, Vec<Conflict>>,
}

#[derive(Debug, Clone)]
pub struct IntervalVerdict {
    pub tag: Tag,
    pub lb_a: f64,
    pub ub_a: f64,
    pub lb_b: f64,
    pub ub_b: f64,
    /// Minimising controller of the left side (absent for a constant side).
    pub lhs: Option<SideWitness>,
    /// Maximising controller of the right side.
    pub rhs: Option<SideWitness>,
    /// Assignments whose members all satisfy the comparison, in the order
    /// minimiser only, maximiser only, both.
    pub candidates: Vec<PartialAssignment>,
    pub disagreement: Option<Disagreement>,
}

impl IntervalVerdict {
    pub fn conflicts(&self) -> impl Iterator<Item = (&SideWitness, &Conflict)> {
        self.lhs.iter().chain(self.rhs.iter()).flat_map(|w| match &w.assignment {
            Ok(_) => [].iter(),
            Err(cs) => cs.iter(),
        }.map(move |c| (w, c)))
    }
}

/// Cached analyses of one family node.
pub struct NodeAnalysis<'a> {
    pub m: &'a Mdp,
    pub ps: &'a ParameterSpace,
    pub node: &'a FamilyNode,
    pub settings: Settings,
    restricted: HashMap<usize, Rc<Mdp>>,
    results: HashMap<(usize, AtomKind, String, Dir), Rc<ExtremalResult>>,
    targets: HashMap<String, Rc<TargetSet>>,
}

impl<'a> NodeAnalysis<'a> {
    pub fn new(m: &'a Mdp, ps: &'a ParameterSpace, node: &'a FamilyNode, settings: Settings) -> Self {
        NodeAnalysis { m, ps, node, settings, restricted: HashMap::new(), results: HashMap::new(), targets: HashMap::new() }
    }

    /// The MDP restricted to the choices the node leaves to controller `slot`.
    pub fn restricted(&mut self, slot: usize) -> Rc<Mdp> {
        let (m, ps, node) = (self.m, self.ps, self.node);
        self.restricted.entry(slot).or_insert_with(|| Rc::new(node_restrict(m, ps, node, slot))).clone()
    }

    pub fn target(&mut self, name: &str) -> Result<Rc<TargetSet>, ModelError> {
        if let Some(t) = self.targets.get(name) {
            return Ok(t.clone());
        }
        let t = Rc::new(self.m.target(name)?);
        self.targets.insert(name.to_string(), t.clone());
        Ok(t)
    }

    pub fn extremal(&mut self, slot: usize, kind: AtomKind, target: &str, dir: Dir) -> Result<Rc<ExtremalResult>, ModelError> {
        let key = (slot, kind, target.to_string(), dir);
        if let Some(r) = self.results.get(&key) {
            return Ok(r.clone());
        }
        let rm = self.restricted(slot);
        let t = self.target(target)?;
        let r = Rc::new(extremal(&rm, kind, &t, dir, &self.settings)?);
        self.results.insert(key, r.clone());
        Ok(r)
    }

    /// Value of term `i` minimised or maximised over the node.
    pub fn bound(&mut self, f: &Instantiated, i: usize, dir: Dir) -> Result<f64, ModelError> {
        let t = &f.terms[i];
        Ok(self.extremal(t.slot, t.kind, &t.target, dir)?.values.values[t.state])
    }

    pub fn side(&mut self, f: &Instantiated, i: usize, dir: Dir) -> Result<SideWitness, ModelError> {
        let t = &f.terms[i];
        let r = self.extremal(t.slot, t.kind, &t.target, dir)?;
        let rm = self.restricted(t.slot);
        let target = self.target(&t.target)?;
        let relevant = relevant_states(&rm, &r.witness, t.state, &target.mask);
        let assignment = partial_from(self.ps, t.slot, &r.witness, &relevant);
        Ok(SideWitness { slot: t.slot, term: i, dir, witness: r.witness.clone(), relevant, assignment })
    }

    /// Bounds, case tag and candidate assignments of comparison `i`.
    pub fn atom_bounds(&mut self, f: &Instantiated, i: usize) -> Result<IntervalVerdict, ModelError> {
        let Cmp { lhs, rhs, c, strict } = f.cmps[i];
        let (lb_a, ub_a) = match lhs {
            Some(t) => (self.bound(f, t, Dir::Min)?, self.bound(f, t, Dir::Max)?),
            None => (0.0, 0.0),
        };
        let (lb_b, ub_b) = match rhs {
            Some(t) => (self.bound(f, t, Dir::Min)?, self.bound(f, t, Dir::Max)?),
            None => (0.0, 0.0),
        };
        let guard = self.settings.guard();
        let tag = classify(lb_a, ub_a, lb_b, ub_b, c, strict, guard);
        let mut v = IntervalVerdict {
            tag,
            lb_a,
            ub_a,
            lb_b,
            ub_b,
            lhs: None,
            rhs: None,
            candidates: Vec::new(),
            disagreement: None,
        };
        if tag.decided().is_some() {
            return Ok(v);
        }
        v.lhs = lhs.map(|t| self.side(f, t, Dir::Min)).transpose()?;
        v.rhs = rhs.map(|t| self.side(f, t, Dir::Max)).transpose()?;
        let empty = PartialAssignment::default();
        let pa = |w: &Option<SideWitness>| match w {
            None => Some(empty.clone()),
            Some(w) => w.assignment.as_ref().ok().cloned(),
        };
        let (pa_min, pa_max) = (pa(&v.lhs), pa(&v.rhs));
        if surely(lb_a, lb_b, c, strict, guard) {
            if let Some(p) = &pa_min {
                v.candidates.push(p.clone());
            }
        }
        if surely(ub_a, ub_b, c, strict, guard) {
            if let Some(p) = &pa_max {
                v.candidates.push(p.clone());
            }
        }
        if surely(lb_a, ub_b, c, strict, guard) {
            if let (Some(a), Some(b)) = (&pa_min, &pa_max) {
                match a.merge(b) {
                    Ok(p) => v.candidates.push(p),
                    Err(d) => v.disagreement = Some(d),
                }
            }
        }
        let mut seen = Vec::new();
        v.candidates.retain(|p| {
            if seen.contains(p) {
                false
            } else {
                seen.push(p.clone());
                true
            }
        });
        Ok(v)
    }

    pub fn all_bounds(&mut self, f: &Instantiated) -> Result<Vec<IntervalVerdict>, ModelError> {
        (0..f.cmps.len()).map(|i| self.atom_bounds(f, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_one_and_two() {
        assert_eq!(classify(0.1, 0.2, 0.3, 0.4, 0.0, false, 1e-7), Tag::AllSat);
        assert_eq!(classify(0.5, 0.9, 0.1, 0.4, 0.0, false, 1e-7), Tag::AllUnsat);
    }

    #[test]
    fn overlapping_rows() {
        // lb_a <= lb_b only
        assert_eq!(classify(0.1, 0.9, 0.3, 0.4, 0.0, false, 1e-7), Tag::Ambiguous3);
        // ub_a <= ub_b only
        assert_eq!(classify(0.35, 0.5, 0.3, 0.6, 0.0, false, 1e-7), Tag::Ambiguous4);
        // both
        assert_eq!(classify(0.2, 0.5, 0.3, 0.6, 0.0, false, 1e-7), Tag::Ambiguous5);
        // neither
        assert_eq!(classify(0.3, 0.9, 0.1, 0.4, 0.0, false, 1e-7), Tag::Ambiguous5);
    }

    #[test]
    fn guard_band_delays_decisions() {
        // touching intervals are ambiguous within the guard
        assert_eq!(classify(0.1, 0.3, 0.3 - 1e-10, 0.4, 0.0, false, 1e-7), Tag::Ambiguous5);
        assert_eq!(classify(0.1, 0.3, 0.3 - 1e-10, 0.4, 0.0, false, 0.0), Tag::AllSat);
        // strict comparison of equal points fails for all
        assert_eq!(classify(0.5, 0.5, 0.5, 0.5, 0.0, true, 1e-7), Tag::Ambiguous5);
        assert_eq!(classify(0.5, 0.5, 0.5, 0.5, 0.0, true, 0.0), Tag::AllUnsat);
    }

    #[test]
    fn infinite_rewards() {
        let inf = f64::INFINITY;
        assert_eq!(classify(inf, inf, inf, inf, 0.0, false, 1e-7), Tag::AllSat);
        assert_eq!(classify(inf, inf, 1.0, 2.0, 0.0, false, 1e-7), Tag::AllUnsat);
        assert_eq!(classify(inf, inf, inf, inf, 0.0, true, 1e-7), Tag::AllUnsat);
    }
}
