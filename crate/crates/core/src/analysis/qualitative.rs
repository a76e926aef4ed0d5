//! Graph-based precomputation of states with extremal reachability 0 or 1.

use crate::analysis::Dir;
use crate::model::{Mdp, TargetSet};

fn predecessors(m: &Mdp) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); m.state_count()];
    for s in 0..m.state_count() {
        for a in m.actions(s) {
            for &(t, _) in &a.successors {
                if pred[t].last() != Some(&s) {
                    pred[t].push(s);
                }
            }
        }
    }
    pred
}

/// States from which some controller reaches `goal` with positive
/// probability while staying inside `allowed` (goal states count as reached).
fn exists_reach(m: &Mdp, pred: &[Vec<usize>], goal: &[bool], allowed: &[bool]) -> Vec<bool> {
    let mut mark = goal.to_vec();
    let mut stack: Vec<usize> = (0..m.state_count()).filter(|&s| goal[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &pred[t] {
            if !mark[s] && allowed[s] {
                mark[s] = true;
                stack.push(s);
            }
        }
    }
    mark
}

/// Max reachability is 0: the target is unreachable in the graph.
pub fn prob0a(m: &Mdp, t: &TargetSet) -> Vec<bool> {
    let pred = predecessors(m);
    let all = vec![true; m.state_count()];
    exists_reach(m, &pred, &t.mask, &all).into_iter().map(|r| !r).collect()
}

/// Min reachability is 0: some controller avoids the target surely.
pub fn prob0e(m: &Mdp, t: &TargetSet) -> Vec<bool> {
    // least fixpoint of "every action has a successor already marked"
    let n = m.state_count();
    let mut forced = t.mask.clone();
    loop {
        let mut changed = false;
        for s in 0..n {
            if forced[s] {
                continue;
            }
            if m.actions(s).iter().all(|a| a.successors.iter().any(|&(u, _)| forced[u])) {
                forced[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    forced.into_iter().map(|f| !f).collect()
}

/// Min reachability is 1: no controller can reach a `prob0e` state while
/// avoiding the target.
pub fn prob1a(m: &Mdp, t: &TargetSet, p0e: &[bool]) -> Vec<bool> {
    let pred = predecessors(m);
    let outside: Vec<bool> = t.mask.iter().map(|&x| !x).collect();
    exists_reach(m, &pred, p0e, &outside).into_iter().map(|r| !r).collect()
}

/// Max reachability is 1 (nested fixpoint).
pub fn prob1e(m: &Mdp, t: &TargetSet) -> Vec<bool> {
    let n = m.state_count();
    let mut u = vec![true; n];
    loop {
        let mut r = t.mask.clone();
        loop {
            let mut changed = false;
            for s in 0..n {
                if r[s] || !u[s] {
                    continue;
                }
                let ok = m.actions(s).iter().any(|a| {
                    a.successors.iter().all(|&(v, _)| u[v]) && a.successors.iter().any(|&(v, _)| r[v])
                });
                if ok {
                    r[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if r == u {
            return u;
        }
        u = r;
    }
}

/// Returns `(prob0, prob1)` for the extremum in direction `dir`.
pub fn qualitative_states(m: &Mdp, t: &TargetSet, dir: Dir) -> (Vec<bool>, Vec<bool>) {
    match dir {
        Dir::Min => {
            let p0 = prob0e(m, t);
            let p1 = prob1a(m, t, &p0);
            (p0, p1)
        }
        Dir::Max => (prob0a(m, t), prob1e(m, t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // s0: a0 -> s1, a1 -> s2 ; s1: target ; s2: sink
    fn fork() -> Mdp {
        Mdp::from_rows(vec![vec![vec![(1, 1.0)], vec![(2, 1.0)]], vec![vec![(1, 1.0)]], vec![vec![(2, 1.0)]]]).unwrap()
    }

    #[test]
    fn absorbing_target_is_prob1() {
        let m = fork();
        let t = TargetSet::new("t", 3, [1]);
        for dir in [Dir::Min, Dir::Max] {
            let (p0, p1) = qualitative_states(&m, &t, dir);
            assert!(p1[1] && !p0[1]);
            assert!(p0[2] && !p1[2]);
        }
        let (p0, p1) = qualitative_states(&m, &t, Dir::Min);
        assert!(p0[0] && !p1[0]);
        let (p0, p1) = qualitative_states(&m, &t, Dir::Max);
        assert!(!p0[0] && p1[0]);
    }

    #[test]
    fn end_component_is_not_prob1_for_min() {
        // s0 can loop forever or move to the target
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)], vec![(1, 1.0)]], vec![vec![(1, 1.0)]]]).unwrap();
        let t = TargetSet::new("t", 2, [1]);
        assert!(prob0e(&m, &t)[0]);
        assert!(prob1e(&m, &t)[0]);
        assert!(!prob0a(&m, &t)[0]);
    }
}
