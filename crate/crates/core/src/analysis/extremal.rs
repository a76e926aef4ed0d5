//! Extremal reachability and expected reward over all controllers of an MDP.
//!
//! Values come from Gauss-Seidel value iteration on top of the qualitative
//! precomputation. On models with at most `polish_limit` states the result is
//! then polished by policy iteration with exact policy evaluation, which makes
//! the witness values exact up to linear-solver rounding.

use crate::analysis::chain::{chain_reach, chain_reward};
use crate::analysis::qualitative::{prob0a, prob0e, prob1a, prob1e};
use crate::analysis::{Dir, ExtremalResult, Settings, ValueVector};
use crate::error::ModelError;
use crate::model::{Controller, Mdp, TargetSet};
use crate::textio::spec::AtomKind;

const IMPROVE_EPS: f64 = 1e-12;
const EXACT_TIE: f64 = 1e-10;

fn q_value(m: &Mdp, s: usize, k: usize, x: &[f64], reward: bool) -> f64 {
    let a = &m.actions(s)[k];
    let mut v = if reward { a.reward } else { 0.0 };
    for &(t, p) in &a.successors {
        v += p * x[t];
    }
    v
}

fn better(dir: Dir, a: f64, b: f64) -> bool {
    match dir {
        Dir::Min => a < b,
        Dir::Max => a > b,
    }
}

fn to_controller(m: &Mdp, pol: &[usize]) -> Controller {
    Controller::new(pol.iter().enumerate().map(|(s, &k)| m.actions(s)[k].id).collect())
}

fn evaluate(m: &Mdp, pol: &[usize], t: &TargetSet, reward: bool) -> Vec<f64> {
    let row = |s: usize| m.actions(s)[pol[s]].successors.as_slice();
    if reward {
        chain_reward(m.state_count(), row, |s| m.actions(s)[pol[s]].reward, &t.mask)
    } else {
        chain_reach(m.state_count(), row, &t.mask)
    }
}

/// Assigns, along a backward search from `base`, an allowed action that
/// moves to an already ranked state. Every state that gets a choice reaches
/// `base` with positive probability under the resulting policy.
fn progress_choices(m: &Mdp, base: &[bool], scope: &[bool], allowed: impl Fn(usize, usize) -> bool) -> Vec<Option<usize>> {
    let n = m.state_count();
    let mut ranked = base.to_vec();
    let mut choice = vec![None; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if ranked[s] || !scope[s] {
                continue;
            }
            let pick = (0..m.actions(s).len())
                .find(|&k| allowed(s, k) && m.actions(s)[k].successors.iter().any(|&(u, _)| ranked[u]));
            if let Some(k) = pick {
                choice[s] = Some(k);
                ranked[s] = true;
                changed = true;
            }
        }
        if !changed {
            return choice;
        }
    }
}

struct Query<'a> {
    m: &'a Mdp,
    t: &'a TargetSet,
    dir: Dir,
    reward: bool,
    /// States whose value is computed numerically.
    maybe: Vec<bool>,
    /// Actions that may be used in maybe states.
    safe: Vec<Vec<bool>>,
}

impl Query<'_> {
    fn opt_q(&self, s: usize, x: &[f64]) -> (usize, f64) {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..self.m.actions(s).len() {
            if !self.safe[s][k] {
                continue;
            }
            let q = q_value(self.m, s, k, x, self.reward);
            if best.is_none_or(|(_, b)| better(self.dir, q, b)) {
                best = Some((k, q));
            }
        }
        best.expect("maybe state without safe action")
    }

    fn value_iteration(&self, x: &mut [f64], settings: &Settings) -> (usize, f64) {
        let states: Vec<usize> = (0..self.m.state_count()).filter(|&s| self.maybe[s]).collect();
        let mut residual = 0.0;
        for sweep in 1..=settings.max_sweeps {
            residual = 0.0f64;
            for &s in &states {
                let (_, v) = self.opt_q(s, x);
                let d = (v - x[s]).abs() / if self.reward { v.abs().max(1.0) } else { 1.0 };
                residual = residual.max(d);
                x[s] = v;
            }
            if residual < settings.tol {
                return (sweep, residual);
            }
        }
        (settings.max_sweeps, residual)
    }

    /// Near-optimal actions per maybe state.
    fn near_optimal(&self, s: usize, x: &[f64], tie: f64) -> Vec<bool> {
        let (_, best) = self.opt_q(s, x);
        let scale = if self.reward { best.abs().max(1.0) } else { 1.0 };
        (0..self.m.actions(s).len())
            .map(|k| self.safe[s][k] && (q_value(self.m, s, k, x, self.reward) - best).abs() <= tie * scale)
            .collect()
    }
}

/// Extracts a witness from values. `fixed` gives the choice for states
/// outside the maybe set.
fn extract(q: &Query, x: &[f64], tie: f64, fixed: &[Option<usize>], needs_progress: bool) -> Vec<usize> {
    let n = q.m.state_count();
    let near: Vec<Vec<bool>> =
        (0..n).map(|s| if q.maybe[s] { q.near_optimal(s, x, tie) } else { Vec::new() }).collect();
    let mut pol: Vec<usize> = (0..n).map(|s| fixed[s].unwrap_or(0)).collect();
    if needs_progress {
        let base: Vec<bool> = (0..n).map(|s| !q.maybe[s]).collect();
        let prog = progress_choices(q.m, &base, &q.maybe, |s, k| near[s][k]);
        for s in 0..n {
            if q.maybe[s] {
                pol[s] = prog[s].unwrap_or_else(|| q.opt_q(s, x).0);
            }
        }
    } else {
        for s in 0..n {
            if q.maybe[s] {
                pol[s] = near[s].iter().position(|&b| b).unwrap_or_else(|| q.opt_q(s, x).0);
            }
        }
    }
    pol
}

fn policy_iteration(q: &Query, mut pol: Vec<usize>) -> (Vec<usize>, Vec<f64>, usize) {
    let mut rounds = 0;
    loop {
        rounds += 1;
        let v = evaluate(q.m, &pol, q.t, q.reward);
        let mut changed = false;
        for s in 0..q.m.state_count() {
            if !q.maybe[s] {
                continue;
            }
            let cur = q_value(q.m, s, pol[s], &v, q.reward);
            let (k, best) = q.opt_q(s, &v);
            let scale = if q.reward { cur.abs().max(1.0) } else { 1.0 };
            if better(q.dir, best, cur) && (best - cur).abs() > IMPROVE_EPS * scale {
                pol[s] = k;
                changed = true;
            }
        }
        if !changed || rounds > 10_000 {
            return (pol, v, rounds);
        }
    }
}

fn finish(q: &Query, mut x: Vec<f64>, fixed: Vec<Option<usize>>, needs_progress: bool, settings: &Settings, meta: (usize, f64)) -> ExtremalResult {
    let n = q.m.state_count();
    let (mut iterations, mut residual) = meta;
    let witness = if n <= settings.polish_limit {
        let start = extract(q, &x, settings.tol, &fixed, needs_progress);
        let (pol, v, rounds) = policy_iteration(q, start);
        iterations += rounds;
        residual = 0.0;
        x = v;
        let tidy = extract(q, &x, EXACT_TIE, &fixed, needs_progress);
        let tv = evaluate(q.m, &tidy, q.t, q.reward);
        let agrees = tv.iter().zip(&x).all(|(a, b)| {
            (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 10.0 * settings.tol * b.abs().max(1.0)
        });
        if agrees { tidy } else { pol }
    } else {
        extract(q, &x, settings.tol, &fixed, needs_progress)
    };
    if !q.reward {
        for v in x.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }
    ExtremalResult {
        values: ValueVector {
            values: x,
            kind: if q.reward { AtomKind::Reward } else { AtomKind::Reach },
            target: q.t.name.clone(),
            dir: q.dir,
            iterations,
            residual,
        },
        witness: to_controller(q.m, &witness),
    }
}

pub fn extremal_reach(m: &Mdp, t: &TargetSet, dir: Dir, settings: &Settings) -> ExtremalResult {
    let n = m.state_count();
    let all_safe: Vec<Vec<bool>> = (0..n).map(|s| vec![true; m.actions(s).len()]).collect();
    let (p0, p1, fixed) = match dir {
        Dir::Min => {
            let p0 = prob0e(m, t);
            let p1 = prob1a(m, t, &p0);
            let never = prob0a(m, t);
            // stay inside prob0 where the value is zero, preferring states
            // from which no controller reaches the target
            let fixed = (0..n)
                .map(|s| {
                    if p0[s] {
                        let into = |z: &[bool]| m.actions(s).iter().position(|a| a.successors.iter().all(|&(u, _)| z[u]));
                        into(&never).or_else(|| into(&p0))
                    } else {
                        Some(0)
                    }
                })
                .collect::<Vec<_>>();
            (p0, p1, fixed)
        }
        Dir::Max => {
            let p0 = prob0a(m, t);
            let p1 = prob1e(m, t);
            let scope: Vec<bool> = (0..n).map(|s| p1[s] && !t.mask[s]).collect();
            let attract = progress_choices(m, &t.mask, &scope, |s, k| {
                m.actions(s)[k].successors.iter().all(|&(u, _)| p1[u])
            });
            let fixed = (0..n).map(|s| if scope[s] { attract[s].or(Some(0)) } else { Some(0) }).collect();
            (p0, p1, fixed)
        }
    };
    let maybe: Vec<bool> = (0..n).map(|s| !p0[s] && !p1[s]).collect();
    let q = Query { m, t, dir, reward: false, maybe, safe: all_safe };
    let mut x: Vec<f64> = (0..n).map(|s| if p1[s] { 1.0 } else { 0.0 }).collect();
    let meta = q.value_iteration(&mut x, settings);
    finish(&q, x, fixed, dir == Dir::Max, settings, meta)
}

pub fn extremal_reward(m: &Mdp, t: &TargetSet, dir: Dir, settings: &Settings) -> Result<ExtremalResult, ModelError> {
    if !m.has_rewards() {
        return Err(ModelError::MissingRewards);
    }
    let n = m.state_count();
    let inf = f64::INFINITY;
    match dir {
        Dir::Max => {
            let p0 = prob0e(m, t);
            let finite = prob1a(m, t, &p0);
            // outside the finite region: steer into prob0e and stay there
            let scope: Vec<bool> = (0..n).map(|s| !finite[s] && !p0[s]).collect();
            let towards = progress_choices(m, &p0, &scope, |s, _| !t.mask[s]);
            let fixed: Vec<Option<usize>> = (0..n)
                .map(|s| {
                    if p0[s] {
                        m.actions(s).iter().position(|a| a.successors.iter().all(|&(u, _)| p0[u])).or(Some(0))
                    } else if scope[s] {
                        towards[s].or(Some(0))
                    } else {
                        Some(0)
                    }
                })
                .collect();
            let maybe: Vec<bool> = (0..n).map(|s| finite[s] && !t.mask[s]).collect();
            let safe = (0..n).map(|s| vec![true; m.actions(s).len()]).collect();
            let q = Query { m, t, dir, reward: true, maybe, safe };
            let mut x: Vec<f64> = (0..n).map(|s| if finite[s] { 0.0 } else { inf }).collect();
            let meta = q.value_iteration(&mut x, settings);
            Ok(finish(&q, x, fixed, false, settings, meta))
        }
        Dir::Min => {
            let p1 = prob1e(m, t);
            let maybe: Vec<bool> = (0..n).map(|s| p1[s] && !t.mask[s]).collect();
            let safe: Vec<Vec<bool>> = (0..n)
                .map(|s| m.actions(s).iter().map(|a| a.successors.iter().all(|&(u, _)| p1[u])).collect())
                .collect();
            let attract = progress_choices(m, &t.mask, &maybe, |s, k| safe[s][k]);
            let fixed: Vec<Option<usize>> = vec![Some(0); n];
            let proper: Vec<usize> = (0..n).map(|s| if maybe[s] { attract[s].unwrap_or(0) } else { 0 }).collect();
            // iterate downwards from the value of a proper policy
            let mut x = evaluate(m, &proper, t, true);
            for s in 0..n {
                if !p1[s] {
                    x[s] = inf;
                }
            }
            let q = Query { m, t, dir, reward: true, maybe, safe };
            let meta = q.value_iteration(&mut x, settings);
            Ok(finish(&q, x, fixed, true, settings, meta))
        }
    }
}

pub fn extremal(m: &Mdp, kind: AtomKind, t: &TargetSet, dir: Dir, settings: &Settings) -> Result<ExtremalResult, ModelError> {
    match kind {
        AtomKind::Reach => Ok(extremal_reach(m, t, dir, settings)),
        AtomKind::Reward => extremal_reward(m, t, dir, settings),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::chain::{mc_reach, mc_reward};
    use crate::model::impose;

    #[test]
    fn mc_min_equals_max() {
        let m = Mdp::from_rows(vec![vec![vec![(1, 1.0)]], vec![vec![(1, 1.0)]]]).unwrap();
        let t = TargetSet::new("t", 2, [1]);
        let s = Settings::default();
        assert_eq!(extremal_reach(&m, &t, Dir::Min, &s).values.values[0], 1.0);
        assert_eq!(extremal_reach(&m, &t, Dir::Max, &s).values.values[0], 1.0);
    }

    #[test]
    fn max_reach_witness_leaves_end_component() {
        // s0: a0 self-loop, a1 -> target ; max witness must pick a1
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)], vec![(1, 1.0)]], vec![vec![(1, 1.0)]]]).unwrap();
        let t = TargetSet::new("t", 2, [1]);
        let r = extremal_reach(&m, &t, Dir::Max, &Settings::default());
        assert_eq!(r.values.values[0], 1.0);
        assert_eq!(r.witness.choice[0], 1);
        let r = extremal_reach(&m, &t, Dir::Min, &Settings::default());
        assert_eq!(r.values.values[0], 0.0);
        assert_eq!(r.witness.choice[0], 0);
    }

    #[test]
    fn min_reward_avoids_zero_cycles() {
        // s0: a0 self-loop with reward 0, a1 -> target with reward 1
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)], vec![(1, 1.0)]], vec![vec![(1, 1.0)]]])
            .unwrap()
            .with_rewards(|s, a| if s == 0 && a == 1 { 1.0 } else { 0.0 })
            .unwrap();
        let t = TargetSet::new("t", 2, [1]);
        for limit in [0, 100] {
            let s = Settings { polish_limit: limit, ..Settings::default() };
            let r = extremal_reward(&m, &t, Dir::Min, &s).unwrap();
            assert_eq!(r.values.values[0], 1.0);
            assert_eq!(r.witness.choice[0], 1);
            let r = extremal_reward(&m, &t, Dir::Max, &s).unwrap();
            assert!(r.values.values[0].is_infinite());
            let mc = impose(&m, &r.witness).unwrap();
            assert!(mc_reward(&mc, &t)[0].is_infinite());
        }
    }

    #[test]
    fn missing_rewards_rejected() {
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)]]]).unwrap();
        let t = TargetSet::new("t", 1, [0]);
        assert_eq!(extremal_reward(&m, &t, Dir::Min, &Settings::default()).unwrap_err(), ModelError::MissingRewards);
    }

    #[test]
    fn witness_reproduces_values() {
        let m = Mdp::from_rows(vec![
            vec![vec![(1, 0.5), (2, 0.5)], vec![(0, 0.3), (3, 0.7)]],
            vec![vec![(3, 1.0)], vec![(0, 1.0)]],
            vec![vec![(2, 1.0)]],
            vec![vec![(3, 1.0)]],
        ])
        .unwrap();
        let t = TargetSet::new("t", 4, [3]);
        for dir in [Dir::Min, Dir::Max] {
            let r = extremal_reach(&m, &t, dir, &Settings::default());
            let v = mc_reach(&impose(&m, &r.witness).unwrap(), &t);
            for s in 0..4 {
                assert!((v[s] - r.values.values[s]).abs() < 1e-7, "{dir:?} {s}");
            }
        }
    }
}
