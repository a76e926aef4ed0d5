//! Family-aware counterexamples for reachability comparisons.
//!
//! A member of a node violating `A <= B + c` is explained by state sets
//! `C1` (for the left side) and `C2` (for the right side). Outside these
//! sets the member's behaviour is replaced by a two-way branch to fresh
//! sinks weighted by family bounds: lower bounds on the left, upper bounds
//! on the right. If the deflated chains still violate the comparison, every
//! member agreeing with the sampled one on the choices inside `C1 ∪ C2`
//! violates it too, and all of them can be pruned at once.

use std::collections::BTreeSet;

use crate::analysis::{check_mc, mc_reach, Dir};
use crate::error::ModelError;
use crate::family::{FamilyNode, ParameterSpace, Realisation};
use crate::model::{impose, Mc, Mdp, TargetSet};
use crate::synthesis::formula::{Formula, Instantiated};
use crate::synthesis::interval::{surely_not, NodeAnalysis};
use crate::textio::spec::AtomKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// A chain over the original states plus two sinks, `top` counting as
/// target and `bot` not.
#[derive(Debug, Clone)]
pub struct DeflatedMc {
    pub mc: Mc,
    pub top: usize,
    pub bot: usize,
    pub target: TargetSet,
    pub side: Side,
}

impl DeflatedMc {
    pub fn reach(&self) -> Vec<f64> {
        mc_reach(&self.mc, &self.target)
    }
}

/// Keeps the rows of states in `keep` and of targets; every other state
/// moves to `top` with probability `bounds[s]` and to `bot` otherwise.
pub fn build_deflated(mc: &Mc, keep: &[bool], bounds: &[f64], side: Side, target: &[bool]) -> DeflatedMc {
    let n = mc.state_count();
    let (top, bot) = (n, n + 1);
    let mut rows: Vec<Vec<Vec<(usize, f64)>>> = (0..n)
        .map(|s| {
            if keep[s] || target[s] {
                vec![mc.row(s).to_vec()]
            } else {
                let g = bounds[s].clamp(0.0, 1.0);
                vec![vec![(top, g), (bot, 1.0 - g)]]
            }
        })
        .collect();
    rows.push(vec![vec![(top, 1.0)]]);
    rows.push(vec![vec![(bot, 1.0)]]);
    let mdp = Mdp::from_rows(rows).expect("deflated rows are distributions");
    let t = TargetSet::new("deflated", n + 2, (0..n).filter(|&s| target[s]).chain([top]));
    DeflatedMc { mc: Mc::new(mdp).expect("one action per state"), top, bot, target: t, side }
}

/// One side of a comparison as seen by the counterexample search.
#[derive(Debug, Clone, Copy)]
pub struct CeSide<'a> {
    pub mc: &'a Mc,
    pub state: usize,
    pub target: &'a [bool],
    pub bounds: &'a [f64],
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CePair {
    pub left: BTreeSet<usize>,
    pub right: BTreeSet<usize>,
}

fn deflated_value(side: Option<&CeSide>, set: &BTreeSet<usize>, dir: Side) -> f64 {
    let Some(sd) = side else { return 0.0 };
    let n = sd.mc.state_count();
    let mut keep = vec![false; n];
    for &s in set {
        keep[s] = true;
    }
    build_deflated(sd.mc, &keep, sd.bounds, dir, sd.target).reach()[sd.state]
}

fn frontier(side: Option<&CeSide>, set: &BTreeSet<usize>) -> BTreeSet<usize> {
    let Some(sd) = side else { return BTreeSet::new() };
    if set.is_empty() {
        return if sd.target[sd.state] { BTreeSet::new() } else { BTreeSet::from([sd.state]) };
    }
    set.iter()
        .filter(|&&s| !sd.target[s])
        .flat_map(|&s| sd.mc.row(s).iter().map(|&(t, _)| t))
        .filter(|t| !set.contains(t) && !sd.target[*t])
        .collect()
}

fn add_state(side: &CeSide, set: &mut BTreeSet<usize>, s: usize) {
    set.insert(s);
    for &(t, _) in side.mc.row(s) {
        if side.target[t] {
            set.insert(t);
        }
    }
}

/// Greedy search for a counterexample to `A <= B + c` (`<` if `strict`).
///
/// Starting from empty sets, each step adds the frontier state with the
/// fewest enabled actions in `m` (ties: lower index, left side first) until
/// the deflated chains certify the violation. `None` if they never do.
pub fn grow_ce(m: &Mdp, left: Option<&CeSide>, right: Option<&CeSide>, c: f64, strict: bool, guard: f64) -> Option<CePair> {
    let mut pair = CePair::default();
    loop {
        let a = deflated_value(left, &pair.left, Side::Lower);
        let b = deflated_value(right, &pair.right, Side::Upper);
        if surely_not(a, b, c, strict, guard) {
            return Some(pair);
        }
        let fl = frontier(left, &pair.left);
        let fr = frontier(right, &pair.right);
        let best = fl
            .iter()
            .map(|&s| (m.actions(s).len(), s, 0))
            .chain(fr.iter().map(|&s| (m.actions(s).len(), s, 1)))
            .min()?;
        match best.2 {
            0 => add_state(left.unwrap(), &mut pair.left, best.1),
            _ => add_state(right.unwrap(), &mut pair.right, best.1),
        }
    }
}

/// Parameters of the non-target states of `set` (for controller `slot`)
/// that the node leaves open.
pub fn conflict_params(ps: &ParameterSpace, node: &FamilyNode, slot: usize, set: &BTreeSet<usize>, target: &[bool]) -> BTreeSet<usize> {
    set.iter()
        .filter(|&&s| !target[s])
        .map(|&s| ps.param(slot, s))
        .filter(|&k| node.domains[k].len() > 1)
        .collect()
}

/// Removes the members agreeing with `r` on `conflict`; the rest of the
/// node as disjoint boxes.
pub fn prune_by_conflict(node: &FamilyNode, r: &Realisation, conflict: &[usize]) -> Vec<FamilyNode> {
    node.complement(r, conflict)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CeOutcome {
    /// The sampled member satisfies the formula.
    Satisfies(Realisation),
    Pruned { sample: Realisation, conflict: Vec<usize>, remainder: Vec<FamilyNode> },
    /// No counterexample could be built (reward comparisons, or none found).
    Inapplicable,
}

type SideData = (usize, usize, Vec<bool>, Vec<f64>);

fn view<'a>(mcs: &'a [Mc], x: &'a Option<SideData>) -> Option<CeSide<'a>> {
    x.as_ref().map(|(slot, state, target, bounds)| CeSide { mc: &mcs[*slot], state: *state, target, bounds })
}

/// Samples the first member of the node and, if it violates the residual
/// formula, prunes all members sharing the choices that explain it.
pub fn ce_step(na: &mut NodeAnalysis, f: &Instantiated, residual: &Formula) -> Result<CeOutcome, ModelError> {
    let r = na.node.first();
    let cs = na.ps.induce(&r);
    let mcs = cs.iter().map(|c| impose(na.m, c)).collect::<Result<Vec<_>, _>>()?;
    let res = check_mc(&mcs, f)?;
    if res.holds {
        return Ok(CeOutcome::Satisfies(r));
    }
    let mut chosen: Vec<usize> = Vec::new();
    for i in residual.cmp_order() {
        if !res.cmp_truth[i] {
            chosen.push(i);
            if !residual.eval(&|j| !chosen.contains(&j)) {
                break;
            }
        }
    }
    if residual.eval(&|j| !chosen.contains(&j)) {
        return Ok(CeOutcome::Inapplicable);
    }
    let guard = na.settings.guard();
    let mut conflict = BTreeSet::new();
    for &i in &chosen {
        let cmp = f.cmps[i];
        let terms = [cmp.lhs, cmp.rhs];
        if terms.iter().flatten().any(|&t| f.terms[t].kind == AtomKind::Reward) {
            return Ok(CeOutcome::Inapplicable);
        }
        let mut sides = Vec::new();
        for (t, dir) in [(cmp.lhs, Dir::Min), (cmp.rhs, Dir::Max)] {
            sides.push(match t {
                None => None,
                Some(t) => {
                    let term = &f.terms[t];
                    let bounds = na.extremal(term.slot, AtomKind::Reach, &term.target, dir)?.values.values.clone();
                    let target = na.target(&term.target)?.mask.clone();
                    Some((term.slot, term.state, target, bounds))
                }
            });
        }
        let (l, rr) = (view(&mcs, &sides[0]), view(&mcs, &sides[1]));
        let Some(pair) = grow_ce(na.m, l.as_ref(), rr.as_ref(), cmp.c, cmp.strict, guard) else {
            return Ok(CeOutcome::Inapplicable);
        };
        if let Some((slot, _, target, _)) = &sides[0] {
            conflict.extend(conflict_params(na.ps, na.node, *slot, &pair.left, target));
        }
        if let Some((slot, _, target, _)) = &sides[1] {
            conflict.extend(conflict_params(na.ps, na.node, *slot, &pair.right, target));
        }
    }
    let conflict: Vec<usize> = conflict.into_iter().collect();
    let remainder = prune_by_conflict(na.node, &r, &conflict);
    Ok(CeOutcome::Pruned { sample: r, conflict, remainder })
}
