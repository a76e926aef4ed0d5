//! Conflicts, the immediate-impact heuristic, and node splitting.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::chain::{chain_reach, chain_reward, chain_visits};
use crate::family::{FamilyNode, ParameterSpace, PartialAssignment};
use crate::model::{Controller, Mdp, TargetSet};
use crate::textio::spec::AtomKind;

/// Stand-in for infinite values inside the heuristic.
pub const VALUE_CAP: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub param: usize,
    /// Distinct actions chosen on the class, ascending.
    pub actions: Vec<usize>,
}

/// States visited from `init` under `c` before reaching the target. Only
/// choices at these states influence the value of `init`.
pub fn relevant_states(m: &Mdp, c: &Controller, init: usize, target: &[bool]) -> Vec<bool> {
    let mut rel = vec![false; m.state_count()];
    if target[init] {
        return rel;
    }
    rel[init] = true;
    let mut stack = vec![init];
    while let Some(s) = stack.pop() {
        let a = m.action(s, c.choice[s]).expect("controller of m");
        for &(t, _) in &a.successors {
            if !rel[t] && !target[t] {
                rel[t] = true;
                stack.push(t);
            }
        }
    }
    rel
}

fn chosen(ps: &ParameterSpace, i: usize, c: &Controller, relevant: &[bool]) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut per: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (s, &r) in relevant.iter().enumerate() {
        if r {
            per.entry(ps.param(i, s)).or_default().insert(c.choice[s]);
        }
    }
    per
}

/// Parameters on which `c` picks more than one action among relevant states.
pub fn consistency_conflicts(
    ps: &ParameterSpace,
    node: &FamilyNode,
    i: usize,
    c: &Controller,
    relevant: &[bool],
) -> Vec<Conflict> {
    chosen(ps, i, c, relevant)
        .into_iter()
        .filter(|(k, acts)| acts.len() > 1 && node.domains[*k].len() > 1)
        .map(|(param, acts)| Conflict { param, actions: acts.into_iter().collect() })
        .collect()
}

/// The assignment fixing the parameters of relevant states to the choices
/// of `c`, or the conflicts preventing it.
pub fn partial_from(ps: &ParameterSpace, i: usize, c: &Controller, relevant: &[bool]) -> Result<PartialAssignment, Vec<Conflict>> {
    let per = chosen(ps, i, c, relevant);
    let conflicts: Vec<Conflict> = per
        .iter()
        .filter(|(_, a)| a.len() > 1)
        .map(|(&param, a)| Conflict { param, actions: a.iter().copied().collect() })
        .collect();
    if !conflicts.is_empty() {
        return Err(conflicts);
    }
    Ok(PartialAssignment { fixed: per.into_iter().map(|(k, a)| (k, *a.iter().next().unwrap())).collect() })
}

/// Immediate impact `gamma[s][k]` of the `k`-th action of `m` in state `s`,
/// given expected visits and per-state values of the chain induced by the
/// analysed controller. Target states get zero.
pub fn immediate_impact(m: &Mdp, visits: &[f64], values: &[f64], target: &[bool], kind: AtomKind) -> Vec<Vec<f64>> {
    (0..m.state_count())
        .map(|s| {
            m.actions(s)
                .iter()
                .map(|a| {
                    if target[s] {
                        return 0.0;
                    }
                    let mut v = if kind == AtomKind::Reward { a.reward } else { 0.0 };
                    for &(t, p) in &a.successors {
                        v += p * values[t].min(VALUE_CAP);
                    }
                    visits[s] * v
                })
                .collect()
        })
        .collect()
}

/// Expected visits from `init` and values in the chain of `c` on `m`, with
/// target states made absorbing for the visit count.
pub fn impact_inputs(m: &Mdp, c: &Controller, init: usize, target: &TargetSet, kind: AtomKind) -> (Vec<f64>, Vec<f64>) {
    let n = m.state_count();
    let rows: Vec<&[(usize, f64)]> = (0..n).map(|s| m.action(s, c.choice[s]).unwrap().successors.as_slice()).collect();
    let values = match kind {
        AtomKind::Reach => chain_reach(n, |s| rows[s], &target.mask),
        AtomKind::Reward => chain_reward(n, |s| rows[s], |s| m.action(s, c.choice[s]).unwrap().reward, &target.mask),
    };
    let selfloops: Vec<[(usize, f64); 1]> = (0..n).map(|s| [(s, 1.0)]).collect();
    let visits = chain_visits(n, |s| if target.mask[s] { &selfloops[s][..] } else { rows[s] }, init);
    (visits, values)
}

/// Average over the class members of controller `i` of the spread of
/// impact among the conflicting actions.
pub fn split_score(ps: &ParameterSpace, i: usize, conflict: &Conflict, gamma: &[Vec<f64>], m: &Mdp) -> f64 {
    let states: Vec<usize> = ps.members(conflict.param).iter().filter(|&&(j, _)| j == i).map(|&(_, s)| s).collect();
    if states.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &s in &states {
        let gs: Vec<f64> = conflict
            .actions
            .iter()
            .filter_map(|&a| m.actions(s).binary_search_by_key(&a, |x| x.id).ok())
            .map(|k| gamma[s][k])
            .collect();
        if gs.is_empty() {
            continue;
        }
        let hi = gs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = gs.iter().copied().fold(f64::INFINITY, f64::min);
        total += hi - lo;
    }
    total / states.len() as f64
}

/// Index of the best-scoring entry; ties go to the lowest parameter.
pub fn select_split(scored: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &(k, sc)) in scored.iter().enumerate() {
        match best {
            None => best = Some(j),
            Some(b) => {
                let (bk, bs) = scored[b];
                if sc > bs || (sc == bs && k < bk) {
                    best = Some(j);
                }
            }
        }
    }
    best
}

/// Splits the domain of `param` into singletons of `actions` and the rest.
pub fn split(node: &FamilyNode, param: usize, actions: &[usize]) -> Vec<FamilyNode> {
    let mut acts: Vec<usize> = actions.iter().copied().filter(|&a| node.allows(param, a)).collect();
    acts.sort_unstable();
    acts.dedup();
    let mut out: Vec<FamilyNode> = acts.iter().map(|&a| node.with_domain(param, vec![a])).collect();
    let rest: Vec<usize> = node.domains[param].iter().copied().filter(|a| !acts.contains(a)).collect();
    if !rest.is_empty() {
        out.push(node.with_domain(param, rest));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::spec_file::parse_spec;

    #[test]
    fn split_three_way() {
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, 1.0)]]]).unwrap();
        let ps = ParameterSpace::build(&m, &["c".into()], &[]).unwrap();
        let kids = split(&ps.root(), 0, &[0, 1]);
        assert_eq!(kids.len(), 3);
        assert_eq!(&*kids[2].domains[0], &[2]);
        let kids = split(&ps.root().with_domain(0, vec![0, 1]), 0, &[0, 1]);
        assert_eq!(kids.len(), 2);
    }

    #[test]
    fn obs_conflict_detected() {
        // states 0 and 1 observed alike, each with actions up (0) and left (1)
        let two = vec![vec![(2, 1.0)], vec![(2, 1.0)]];
        let m = Mdp::from_rows(vec![two.clone(), two, vec![vec![(2, 1.0)]]]).unwrap();
        let s = parse_spec("exists c : obs({0, 1}, c) ; forall x in {0}[c] : true").unwrap();
        let ps = ParameterSpace::from_spec(&m, &s).unwrap();
        let c = Controller::new(vec![0, 1, 0]);
        let all = vec![true, true, false];
        let cf = consistency_conflicts(&ps, &ps.root(), 0, &c, &all);
        assert_eq!(cf, vec![Conflict { param: 0, actions: vec![0, 1] }]);
        assert!(consistency_conflicts(&ps, &ps.root(), 0, &c, &[true, false, false]).is_empty());
        assert!(partial_from(&ps, 0, &c, &all).is_err());
    }

    #[test]
    fn zero_successor_value_gives_zero_impact() {
        let m = Mdp::from_rows(vec![vec![vec![(1, 1.0)], vec![(2, 1.0)]], vec![vec![(1, 1.0)]], vec![vec![(2, 1.0)]]])
            .unwrap();
        let g = immediate_impact(&m, &[1.0, 0.0, 0.0], &[0.5, 0.0, 1.0], &[false, false, true], AtomKind::Reach);
        assert_eq!(g[0], vec![0.0, 1.0]);
        let m = m.with_rewards(|_, _| 1.0).unwrap();
        let g = immediate_impact(&m, &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[false, false, true], AtomKind::Reward);
        assert_eq!(g[0][0], 1.0);
    }

    #[test]
    fn selection_ties_lowest_param() {
        assert_eq!(select_split(&[(3, 1.0), (1, 1.0), (2, 0.5)]), Some(1));
        assert_eq!(select_split(&[]), None);
    }
}
