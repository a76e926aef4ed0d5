//! Composition of candidate assignments into one satisfying the formula.

use crate::family::{Disagreement, PartialAssignment};
use crate::synthesis::formula::Formula;
use crate::synthesis::interval::IntervalVerdict;

/// Default number of search steps before giving up.
pub const COMPOSE_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComposeResult {
    pub assignment: Option<PartialAssignment>,
    /// First disagreement met while intersecting candidates.
    pub disagreement: Option<Disagreement>,
}

struct Search<'v> {
    verdicts: &'v [IntervalVerdict],
    steps: usize,
    budget: usize,
    disagreement: Option<Disagreement>,
}

impl Search<'_> {
    fn solve(&mut self, goals: &mut Vec<&Formula>, pa: &PartialAssignment) -> Option<PartialAssignment> {
        self.steps += 1;
        if self.steps > self.budget {
            return None;
        }
        let Some(g) = goals.pop() else {
            return Some(pa.clone());
        };
        let out = match g {
            Formula::True => self.solve(goals, pa),
            Formula::False => None,
            Formula::And(v) => {
                let depth = goals.len();
                goals.extend(v.iter().rev());
                let r = self.solve(goals, pa);
                goals.truncate(depth);
                r
            }
            Formula::Or(v) => {
                let mut found = None;
                for b in v {
                    goals.push(b);
                    let r = self.solve(goals, pa);
                    goals.pop();
                    if r.is_some() {
                        found = r;
                        break;
                    }
                }
                found
            }
            Formula::Cmp(i) => {
                let mut found = None;
                for cand in &self.verdicts[*i].candidates {
                    match pa.merge(cand) {
                        Ok(next) => {
                            if let Some(r) = self.solve(goals, &next) {
                                found = Some(r);
                                break;
                            }
                        }
                        Err(d) => {
                            self.disagreement.get_or_insert(d);
                        }
                    }
                }
                found
            }
        };
        goals.push(g);
        out
    }
}

/// Searches for an assignment under which every member satisfies `f`.
///
/// Conjunctions intersect candidate assignments of their comparisons and
/// disjunctions try their branches in order, backtracking on disagreement.
pub fn compose(f: &Formula, verdicts: &[IntervalVerdict], budget: usize) -> ComposeResult {
    let mut s = Search { verdicts, steps: 0, budget, disagreement: None };
    let mut goals = vec![f];
    let assignment = s.solve(&mut goals, &PartialAssignment::default());
    ComposeResult { assignment, disagreement: s.disagreement }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::interval::Tag;
    use std::collections::BTreeMap;

    fn verdict(cands: Vec<PartialAssignment>) -> IntervalVerdict {
        IntervalVerdict {
            tag: Tag::Ambiguous5,
            lb_a: 0.0,
            ub_a: 1.0,
            lb_b: 0.0,
            ub_b: 1.0,
            lhs: None,
            rhs: None,
            candidates: cands,
            disagreement: None,
        }
    }

    fn pa(v: &[(usize, usize)]) -> PartialAssignment {
        PartialAssignment { fixed: v.iter().copied().collect::<BTreeMap<_, _>>() }
    }

    #[test]
    fn disjoint_maps_merge() {
        let vs = vec![verdict(vec![pa(&[(0, 1)])]), verdict(vec![pa(&[(1, 0)])])];
        let f = Formula::And(vec![Formula::Cmp(0), Formula::Cmp(1)]);
        let r = compose(&f, &vs, 100);
        assert_eq!(r.assignment, Some(pa(&[(0, 1), (1, 0)])));
    }

    #[test]
    fn conjunction_backtracks() {
        let vs = vec![verdict(vec![pa(&[(0, 1)]), pa(&[(0, 0)])]), verdict(vec![pa(&[(0, 0), (1, 1)])])];
        let f = Formula::And(vec![Formula::Cmp(0), Formula::Cmp(1)]);
        let r = compose(&f, &vs, 100);
        assert_eq!(r.assignment, Some(pa(&[(0, 0), (1, 1)])));
        assert_eq!(r.disagreement, Some(Disagreement { param: 0, a: 1, b: 0 }));
    }

    #[test]
    fn incompatible_gives_none() {
        let vs = vec![verdict(vec![pa(&[(0, 1)])]), verdict(vec![pa(&[(0, 0)])])];
        let f = Formula::And(vec![Formula::Cmp(0), Formula::Cmp(1)]);
        assert_eq!(compose(&f, &vs, 100).assignment, None);
        let f = Formula::Or(vec![Formula::Cmp(0), Formula::Cmp(1)]);
        assert_eq!(compose(&f, &vs, 100).assignment, Some(pa(&[(0, 1)])));
    }
}
