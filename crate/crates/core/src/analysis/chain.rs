//! Markov chain solvers: reachability, expected reward, expected visits.
//!
//! Chains are given through a row accessor so the same code serves [`Mc`]
//! values and MDPs evaluated under a fixed policy.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::model::{Mc, TargetSet};

/// Systems with at most this many unknowns are solved by dense LU.
pub const DENSE_LIMIT: usize = 600;
/// Expected-visit value assigned to recurrent states.
pub const VISIT_CAP: f64 = 1e6;
const GS_TOL: f64 = 1e-14;
const GS_MAX_SWEEPS: usize = 1_000_000;

/// States that cannot reach `target`.
pub fn chain_prob0<'a>(n: usize, row: impl Fn(usize) -> &'a [(usize, f64)], target: &[bool]) -> Vec<bool> {
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for &(t, _) in row(s) {
            pred[t].push(s);
        }
    }
    let mut reach = target.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&s| target[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &pred[t] {
            if !reach[s] {
                reach[s] = true;
                stack.push(s);
            }
        }
    }
    reach.into_iter().map(|r| !r).collect()
}

/// States that reach `target` almost surely, given the complement of `prob0`.
pub fn chain_prob1<'a>(n: usize, row: impl Fn(usize) -> &'a [(usize, f64)], target: &[bool], prob0: &[bool]) -> Vec<bool> {
    // complement: states that can reach prob0 without passing through target
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        if target[s] {
            continue;
        }
        for &(t, _) in row(s) {
            pred[t].push(s);
        }
    }
    let mut bad = prob0.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&s| prob0[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &pred[t] {
            if !bad[s] {
                bad[s] = true;
                stack.push(s);
            }
        }
    }
    bad.into_iter().map(|b| !b).collect()
}

/// Solves `x = P_uu x + b` over the unknown states `u`.
///
/// The caller guarantees that the unknowns leave the set almost surely, so
/// `I - P_uu` is nonsingular.
fn solve_transient<'a>(
    unknown: &[usize],
    index: &[usize],
    row: &impl Fn(usize) -> &'a [(usize, f64)],
    b: &[f64],
) -> Vec<f64> {
    solve_transient_with(unknown, index, row, b, DENSE_LIMIT)
}

fn solve_transient_with<'a>(
    unknown: &[usize],
    index: &[usize],
    row: &impl Fn(usize) -> &'a [(usize, f64)],
    b: &[f64],
    dense_limit: usize,
) -> Vec<f64> {
    let m = unknown.len();
    if m == 0 {
        return Vec::new();
    }
    if m <= dense_limit {
        let mut a = DMatrix::<f64>::identity(m, m);
        for (i, &s) in unknown.iter().enumerate() {
            for &(t, p) in row(s) {
                let j = index[t];
                if j != usize::MAX {
                    a[(i, j)] -= p;
                }
            }
        }
        let rhs = DVector::from_column_slice(b);
        if let Some(x) = a.lu().solve(&rhs) {
            return x.iter().copied().collect();
        }
    }
    let mut x = vec![0.0; m];
    for _ in 0..GS_MAX_SWEEPS {
        let mut delta: f64 = 0.0;
        for (i, &s) in unknown.iter().enumerate() {
            let mut v = b[i];
            let mut self_p = 0.0;
            for &(t, p) in row(s) {
                let j = index[t];
                if j == i {
                    self_p += p;
                } else if j != usize::MAX {
                    v += p * x[j];
                }
            }
            let v = if self_p < 1.0 { v / (1.0 - self_p) } else { v };
            delta = delta.max((v - x[i]).abs() / v.abs().max(1.0));
            x[i] = v;
        }
        if delta < GS_TOL {
            break;
        }
    }
    x
}

pub fn chain_reach<'a>(n: usize, row: impl Fn(usize) -> &'a [(usize, f64)], target: &[bool]) -> Vec<f64> {
    let prob0 = chain_prob0(n, &row, target);
    let prob1 = chain_prob1(n, &row, target, &prob0);
    let unknown: Vec<usize> = (0..n).filter(|&s| !prob0[s] && !prob1[s]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let b: Vec<f64> = unknown
        .iter()
        .map(|&s| row(s).iter().filter(|&&(t, _)| prob1[t]).map(|&(_, p)| p).sum())
        .collect();
    let x = solve_transient(&unknown, &index, &row, &b);
    (0..n)
        .map(|s| if prob1[s] { 1.0 } else if prob0[s] { 0.0 } else { x[index[s]].clamp(0.0, 1.0) })
        .collect()
}

/// Expected reward accumulated before reaching `target`; `+inf` where the
/// target is not reached almost surely.
pub fn chain_reward<'a>(
    n: usize,
    row: impl Fn(usize) -> &'a [(usize, f64)],
    reward: impl Fn(usize) -> f64,
    target: &[bool],
) -> Vec<f64> {
    let prob0 = chain_prob0(n, &row, target);
    let prob1 = chain_prob1(n, &row, target, &prob0);
    let unknown: Vec<usize> = (0..n).filter(|&s| prob1[s] && !target[s]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let b: Vec<f64> = unknown.iter().map(|&s| reward(s)).collect();
    let x = solve_transient(&unknown, &index, &row, &b);
    (0..n)
        .map(|s| if target[s] { 0.0 } else if !prob1[s] { f64::INFINITY } else { x[index[s]].max(0.0) })
        .collect()
}

pub fn mc_reach(mc: &Mc, t: &TargetSet) -> Vec<f64> {
    chain_reach(mc.state_count(), |s| mc.row(s), &t.mask)
}

pub fn mc_reward(mc: &Mc, t: &TargetSet) -> Vec<f64> {
    chain_reward(mc.state_count(), |s| mc.row(s), |s| mc.reward(s), &t.mask)
}

/// Expected number of visits to each state when starting in `from`.
///
/// Transient states get their exact value. States in a bottom SCC reachable
/// from `from` get [`VISIT_CAP`]; unreachable states get 0.
pub fn chain_visits<'a>(n: usize, row: impl Fn(usize) -> &'a [(usize, f64)], from: usize) -> Vec<f64> {
    let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for s in 0..n {
        for &(t, _) in row(s) {
            g.add_edge(nodes[s], nodes[t], ());
        }
    }
    let mut comp = vec![0usize; n];
    let sccs = tarjan_scc(&g);
    for (ci, c) in sccs.iter().enumerate() {
        for v in c {
            comp[v.index()] = ci;
        }
    }
    let mut bottom = vec![true; sccs.len()];
    for s in 0..n {
        for &(t, _) in row(s) {
            if comp[t] != comp[s] {
                bottom[comp[s]] = false;
            }
        }
    }
    let mut reachable = vec![false; n];
    let mut stack = vec![from];
    reachable[from] = true;
    while let Some(s) = stack.pop() {
        for &(t, _) in row(s) {
            if !reachable[t] {
                reachable[t] = true;
                stack.push(t);
            }
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&s| reachable[s] && !bottom[comp[s]]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in transient.iter().enumerate() {
        index[s] = i;
    }
    let mut out = vec![0.0; n];
    for s in 0..n {
        if reachable[s] && bottom[comp[s]] {
            out[s] = VISIT_CAP;
        }
    }
    if index[from] == usize::MAX {
        return out;
    }
    // visits solve the transposed system: x_t = [t = from] + sum_s x_s P(s,t)
    let m = transient.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &s in &transient {
        for &(t, p) in row(s) {
            if index[t] != usize::MAX {
                cols[t].push((s, p));
            }
        }
    }
    let mut b = vec![0.0; m];
    b[index[from]] = 1.0;
    let x = solve_transient(&transient, &index, &|t: usize| cols[t].as_slice(), &b);
    for (i, &s) in transient.iter().enumerate() {
        out[s] = x[i].max(0.0);
    }
    out
}

pub fn expected_visits(mc: &Mc, from: usize) -> Vec<f64> {
    chain_visits(mc.state_count(), |s| mc.row(s), from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mdp;

    fn mc(rows: Vec<Vec<(usize, f64)>>) -> Mc {
        Mc::new(Mdp::from_rows(rows.into_iter().map(|r| vec![r]).collect()).unwrap()).unwrap()
    }

    #[test]
    fn chain_to_target() {
        let m = mc(vec![vec![(1, 1.0)], vec![(1, 1.0)]]);
        let t = TargetSet::new("t", 2, [1]);
        assert_eq!(mc_reach(&m, &t), vec![1.0, 1.0]);
    }

    #[test]
    fn three_unit_steps() {
        let m = mc(vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0)], vec![(3, 1.0)]]);
        let m = Mc::new(m.into_mdp().with_rewards(|_, _| 1.0).unwrap()).unwrap();
        let t = TargetSet::new("t", 4, [3]);
        assert_eq!(mc_reward(&m, &t), vec![3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn reward_infinite_when_target_may_be_missed() {
        let m = mc(vec![vec![(1, 0.5), (2, 0.5)], vec![(1, 1.0)], vec![(2, 1.0)]]);
        let m = Mc::new(m.into_mdp().with_rewards(|_, _| 1.0).unwrap()).unwrap();
        let t = TargetSet::new("t", 3, [1]);
        let r = mc_reward(&m, &t);
        assert!(r[0].is_infinite() && r[2].is_infinite() && r[1] == 0.0);
    }

    #[test]
    fn visits_geometric_and_chain() {
        let m = mc(vec![vec![(0, 0.5), (1, 0.5)], vec![(1, 1.0)]]);
        let v = expected_visits(&m, 0);
        assert!((v[0] - 2.0).abs() < 1e-12);
        assert_eq!(v[1], VISIT_CAP);
        let m = mc(vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(2, 1.0)]]);
        let v = expected_visits(&m, 0);
        assert_eq!(&v[..2], &[1.0, 1.0]);
    }

    #[test]
    fn gauss_seidel_matches_lu() {
        let rows: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 0.2), (1, 0.3), (3, 0.5)],
            vec![(0, 0.6), (2, 0.4)],
            vec![(1, 0.5), (2, 0.25), (4, 0.25)],
        ];
        let unknown = [0, 1, 2];
        let index = [0, 1, 2, usize::MAX, usize::MAX];
        let row = |s: usize| rows[s].as_slice();
        let b = [0.5, 0.0, 0.25];
        let lu = solve_transient_with(&unknown, &index, &row, &b, 10);
        let gs = solve_transient_with(&unknown, &index, &row, &b, 0);
        for (x, y) in lu.iter().zip(&gs) {
            assert!((x - y).abs() < 1e-12, "{lu:?} {gs:?}");
        }
    }
}
