//! Explicit-state MDPs and Markov chains.
//!
//! Actions carry a per-state identifier. Identifiers are kept sorted and that
//! order is the tie-break order used everywhere else in the crate. Restriction
//! keeps the original identifiers, so a controller of a restricted MDP is also
//! a controller of the original one.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ModelError;

/// Distributions whose mass differs from 1 by more than this are rejected.
pub const PROB_TOL: f64 = 1e-9;
/// Default cap on memory bits accepted by [`unfold_memory`].
pub const MEMORY_CAP: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub id: usize,
    pub name: Option<String>,
    /// Sorted by successor, no zero entries.
    pub successors: Vec<(usize, f64)>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    actions: Vec<Vec<Action>>,
    labels: BTreeMap<String, Vec<usize>>,
    has_rewards: bool,
}

impl Mdp {
    pub fn state_count(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self, s: usize) -> &[Action] {
        &self.actions[s]
    }

    pub fn action(&self, s: usize, id: usize) -> Option<&Action> {
        let acts = &self.actions[s];
        acts.binary_search_by_key(&id, |a| a.id).ok().map(|i| &acts[i])
    }

    pub fn action_ids(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.actions[s].iter().map(|a| a.id)
    }

    pub fn labels(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.labels
    }

    pub fn label(&self, name: &str) -> Option<&[usize]> {
        self.labels.get(name).map(|v| v.as_slice())
    }

    pub fn has_rewards(&self) -> bool {
        self.has_rewards
    }

    pub fn is_mc(&self) -> bool {
        self.actions.iter().all(|a| a.len() == 1)
    }

    pub fn choice_count(&self) -> usize {
        self.actions.iter().map(|a| a.len()).sum()
    }

    pub fn target(&self, label: &str) -> Result<TargetSet, ModelError> {
        let states = self
            .label(label)
            .ok_or_else(|| ModelError::UnknownLabel(label.to_string()))?;
        Ok(TargetSet::new(label, self.state_count(), states.iter().copied()))
    }

    /// Builds an MDP from plain rows: `rows[s][k]` is the distribution of the
    /// action with id `k`. Rewards are zero and absent.
    pub fn from_rows(rows: Vec<Vec<Vec<(usize, f64)>>>) -> Result<Mdp, ModelError> {
        let mut b = MdpBuilder::new(rows.len());
        for (s, acts) in rows.into_iter().enumerate() {
            for (k, dist) in acts.into_iter().enumerate() {
                b.action(s, k, None)?;
                for (t, p) in dist {
                    b.transition(s, k, t, p)?;
                }
            }
        }
        b.build()
    }

    /// Returns a copy whose rewards are replaced by `rew(s, action id)`.
    pub fn with_rewards(mut self, rew: impl Fn(usize, usize) -> f64) -> Result<Mdp, ModelError> {
        for (s, acts) in self.actions.iter_mut().enumerate() {
            for a in acts.iter_mut() {
                let r = rew(s, a.id);
                if !(r.is_finite() && r >= 0.0) {
                    return Err(ModelError::BadReward { state: s, action: a.id, value: r });
                }
                a.reward = r;
            }
        }
        self.has_rewards = true;
        Ok(self)
    }

    /// Adds or replaces a label.
    pub fn with_label(mut self, name: &str, states: &[usize]) -> Result<Mdp, ModelError> {
        let n = self.state_count();
        let mut v: Vec<usize> = states.to_vec();
        v.sort_unstable();
        v.dedup();
        if let Some(&s) = v.iter().find(|&&s| s >= n) {
            return Err(ModelError::StateOutOfRange { state: s, count: n });
        }
        self.labels.insert(name.to_string(), v);
        Ok(self)
    }

    pub(crate) fn map_actions(&self, mut keep: impl FnMut(usize, &Action) -> bool) -> Result<Mdp, ModelError> {
        let mut actions = Vec::with_capacity(self.actions.len());
        for (s, acts) in self.actions.iter().enumerate() {
            let kept: Vec<Action> = acts.iter().filter(|a| keep(s, a)).cloned().collect();
            if kept.is_empty() {
                return Err(ModelError::EmptyRestriction(s));
            }
            actions.push(kept);
        }
        Ok(Mdp { actions, labels: self.labels.clone(), has_rewards: self.has_rewards })
    }
}

/// A Markov chain: an MDP with exactly one action per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Mc(Mdp);

impl Mc {
    pub fn new(mdp: Mdp) -> Option<Mc> {
        mdp.is_mc().then_some(Mc(mdp))
    }

    pub fn as_mdp(&self) -> &Mdp {
        &self.0
    }

    pub fn into_mdp(self) -> Mdp {
        self.0
    }

    pub fn state_count(&self) -> usize {
        self.0.state_count()
    }

    pub fn row(&self, s: usize) -> &[(usize, f64)] {
        &self.0.actions[s][0].successors
    }

    pub fn reward(&self, s: usize) -> f64 {
        self.0.actions[s][0].reward
    }

    pub fn action_id(&self, s: usize) -> usize {
        self.0.actions[s][0].id
    }

    pub fn has_rewards(&self) -> bool {
        self.0.has_rewards
    }

    pub fn target(&self, label: &str) -> Result<TargetSet, ModelError> {
        self.0.target(label)
    }
}

/// Deterministic memoryless controller: one action id per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Controller {
    pub choice: Vec<usize>,
}

impl Controller {
    pub fn new(choice: Vec<usize>) -> Controller {
        Controller { choice }
    }

    /// The controller picking the first enabled action everywhere.
    pub fn first(m: &Mdp) -> Controller {
        Controller { choice: (0..m.state_count()).map(|s| m.actions(s)[0].id).collect() }
    }

    pub fn validate(&self, m: &Mdp) -> Result<(), ModelError> {
        if self.choice.len() != m.state_count() {
            return Err(ModelError::ControllerSize { got: self.choice.len(), expected: m.state_count() });
        }
        for (s, &a) in self.choice.iter().enumerate() {
            if m.action(s, a).is_none() {
                return Err(ModelError::InvalidController { state: s, action: a });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    pub name: String,
    pub mask: Vec<bool>,
    pub states: Vec<usize>,
}

impl TargetSet {
    pub fn new(name: &str, n: usize, states: impl IntoIterator<Item = usize>) -> TargetSet {
        let mut mask = vec![false; n];
        for s in states {
            if s < n {
                mask[s] = true;
            }
        }
        let states = (0..n).filter(|&s| mask[s]).collect();
        TargetSet { name: name.to_string(), mask, states }
    }

    pub fn contains(&self, s: usize) -> bool {
        self.mask[s]
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }
}

pub fn impose(m: &Mdp, c: &Controller) -> Result<Mc, ModelError> {
    c.validate(m)?;
    let mdp = m.map_actions(|s, a| a.id == c.choice[s])?;
    Ok(Mc(mdp))
}

/// Shrinks action menus. States missing from `allowed` keep their full menu.
pub fn restrict(m: &Mdp, allowed: &BTreeMap<usize, BTreeSet<usize>>) -> Result<Mdp, ModelError> {
    for (&s, ids) in allowed {
        if s >= m.state_count() {
            return Err(ModelError::StateOutOfRange { state: s, count: m.state_count() });
        }
        if ids.is_empty() {
            return Err(ModelError::EmptyRestriction(s));
        }
        if let Some(&a) = ids.iter().find(|&&a| m.action(s, a).is_none()) {
            return Err(ModelError::UnknownAction { state: s, action: a });
        }
    }
    m.map_actions(|s, a| allowed.get(&s).is_none_or(|ids| ids.contains(&a.id)))
}

/// Product with a memory of `bits` bits.
///
/// State `s` with memory `v` becomes `s * 2^bits + v`. Action `a` followed by a
/// memory update to `w` gets id `a * 2^bits + w`.
pub fn unfold_memory(m: &Mdp, bits: u32, cap: u32) -> Result<Mdp, ModelError> {
    if bits > cap {
        return Err(ModelError::MemoryCap { bits, cap });
    }
    let mem = 1usize << bits;
    let mut actions = Vec::with_capacity(m.state_count() * mem);
    for s in 0..m.state_count() {
        for _v in 0..mem {
            let mut acts = Vec::with_capacity(m.actions(s).len() * mem);
            for a in m.actions(s) {
                for w in 0..mem {
                    acts.push(Action {
                        id: a.id * mem + w,
                        name: a.name.as_ref().map(|n| if bits == 0 { n.clone() } else { format!("{n}@{w}") }),
                        successors: a.successors.iter().map(|&(t, p)| (t * mem + w, p)).collect(),
                        reward: a.reward,
                    });
                }
            }
            actions.push(acts);
        }
    }
    let labels = m
        .labels
        .iter()
        .map(|(k, v)| (k.clone(), v.iter().flat_map(|&s| (0..mem).map(move |w| s * mem + w)).collect()))
        .collect();
    Ok(Mdp { actions, labels, has_rewards: m.has_rewards })
}

/// Maps a state of the original model to its copy with memory value `v`.
pub fn memory_state(s: usize, v: usize, bits: u32) -> usize {
    (s << bits) + v
}

#[derive(Debug, Clone, Default)]
struct ActionDraft {
    name: Option<String>,
    succ: BTreeMap<usize, f64>,
    reward: Option<f64>,
}

/// Incremental construction with validation in [`MdpBuilder::build`].
#[derive(Debug, Clone)]
pub struct MdpBuilder {
    actions: Vec<BTreeMap<usize, ActionDraft>>,
    labels: BTreeMap<String, Vec<usize>>,
    has_rewards: bool,
}

impl MdpBuilder {
    pub fn new(n: usize) -> MdpBuilder {
        MdpBuilder { actions: vec![BTreeMap::new(); n], labels: BTreeMap::new(), has_rewards: false }
    }

    pub fn state_count(&self) -> usize {
        self.actions.len()
    }

    fn check_state(&self, s: usize) -> Result<(), ModelError> {
        if s >= self.actions.len() {
            Err(ModelError::StateOutOfRange { state: s, count: self.actions.len() })
        } else {
            Ok(())
        }
    }

    pub fn action(&mut self, s: usize, id: usize, name: Option<String>) -> Result<&mut Self, ModelError> {
        self.check_state(s)?;
        if self.actions[s].contains_key(&id) {
            return Err(ModelError::DuplicateAction { state: s, action: id });
        }
        self.actions[s].insert(id, ActionDraft { name, ..Default::default() });
        Ok(self)
    }

    /// Adds a transition, declaring the action implicitly if needed.
    pub fn transition(&mut self, s: usize, id: usize, t: usize, p: f64) -> Result<&mut Self, ModelError> {
        self.check_state(s)?;
        self.check_state(t)?;
        if !(0.0..=1.0 + PROB_TOL).contains(&p) || p.is_nan() {
            return Err(ModelError::BadProbability { state: s, action: id, value: p });
        }
        let draft = self.actions[s].entry(id).or_default();
        if draft.succ.insert(t, p).is_some() {
            return Err(ModelError::DuplicateTransition { state: s, action: id, target: t });
        }
        Ok(self)
    }

    pub fn reward(&mut self, s: usize, id: usize, r: f64) -> Result<&mut Self, ModelError> {
        self.check_state(s)?;
        if !(r.is_finite() && r >= 0.0) {
            return Err(ModelError::BadReward { state: s, action: id, value: r });
        }
        let draft = self.actions[s].get_mut(&id).ok_or(ModelError::UnknownAction { state: s, action: id })?;
        if draft.reward.replace(r).is_some() {
            return Err(ModelError::DuplicateReward { state: s, action: id });
        }
        self.has_rewards = true;
        Ok(self)
    }

    /// Marks the model as carrying rewards even if every reward is zero.
    pub fn enable_rewards(&mut self) -> &mut Self {
        self.has_rewards = true;
        self
    }

    pub fn label(&mut self, name: &str, states: &[usize]) -> Result<&mut Self, ModelError> {
        for &s in states {
            self.check_state(s)?;
        }
        if self.labels.contains_key(name) {
            return Err(ModelError::DuplicateLabel(name.to_string()));
        }
        let mut v = states.to_vec();
        v.sort_unstable();
        v.dedup();
        self.labels.insert(name.to_string(), v);
        Ok(self)
    }

    pub fn build(self) -> Result<Mdp, ModelError> {
        let mut actions = Vec::with_capacity(self.actions.len());
        for (s, drafts) in self.actions.into_iter().enumerate() {
            if drafts.is_empty() {
                return Err(ModelError::NoActions(s));
            }
            let mut acts = Vec::with_capacity(drafts.len());
            for (id, d) in drafts {
                let sum: f64 = d.succ.values().sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(ModelError::BadDistribution { state: s, action: id, sum });
                }
                let scale = if (sum - 1.0).abs() > 1e-12 { 1.0 / sum } else { 1.0 };
                let successors = d
                    .succ
                    .into_iter()
                    .filter(|&(_, p)| p > 0.0)
                    .map(|(t, p)| (t, p * scale))
                    .collect();
                acts.push(Action { id, name: d.name, successors, reward: d.reward.unwrap_or(0.0) });
            }
            actions.push(acts);
        }
        Ok(Mdp { actions, labels: self.labels, has_rewards: self.has_rewards })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Mdp {
        Mdp::from_rows(vec![
            vec![vec![(0, 0.5), (1, 0.5)], vec![(1, 1.0)]],
            vec![vec![(1, 1.0)], vec![(0, 1.0)]],
        ])
        .unwrap()
    }

    #[test]
    fn impose_single_state() {
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)], vec![(0, 1.0)]]]).unwrap();
        let mc = impose(&m, &Controller::new(vec![1])).unwrap();
        assert_eq!(mc.row(0), &[(0, 1.0)]);
        assert_eq!(mc.action_id(0), 1);
    }

    #[test]
    fn impose_rejects_disabled_action() {
        let m = two_state();
        let err = impose(&m, &Controller::new(vec![0, 5])).unwrap_err();
        assert_eq!(err, ModelError::InvalidController { state: 1, action: 5 });
    }

    #[test]
    fn restrict_identity_and_empty() {
        let m = two_state();
        let full: BTreeMap<_, _> = (0..2).map(|s| (s, m.action_ids(s).collect())).collect();
        assert_eq!(restrict(&m, &full).unwrap(), m);
        let empty = BTreeMap::from([(0, BTreeSet::new())]);
        assert_eq!(restrict(&m, &empty).unwrap_err(), ModelError::EmptyRestriction(0));
    }

    #[test]
    fn restrict_keeps_ids() {
        let m = two_state();
        let r = restrict(&m, &BTreeMap::from([(0, BTreeSet::from([1]))])).unwrap();
        assert_eq!(r.action_ids(0).collect::<Vec<_>>(), vec![1]);
        assert_eq!(r.actions(1).len(), 2);
    }

    #[test]
    fn memory_zero_bits_is_identity() {
        let m = two_state().with_label("t", &[1]).unwrap();
        assert_eq!(unfold_memory(&m, 0, MEMORY_CAP).unwrap(), m);
    }

    #[test]
    fn memory_one_bit_shape() {
        let m = two_state().with_label("t", &[1]).unwrap();
        let u = unfold_memory(&m, 1, MEMORY_CAP).unwrap();
        assert_eq!(u.state_count(), 4);
        assert!((0..4).all(|s| u.actions(s).len() == 4));
        assert_eq!(u.label("t").unwrap(), &[2, 3]);
        assert!(unfold_memory(&m, 3, MEMORY_CAP).is_err());
        let a = u.action(memory_state(0, 1, 1), 0 * 2 + 1).unwrap();
        assert_eq!(a.successors, vec![(1, 0.5), (3, 0.5)]);
    }

    #[test]
    fn builder_validates() {
        let mut b = MdpBuilder::new(2);
        b.transition(0, 0, 1, 0.5).unwrap();
        b.transition(1, 0, 1, 1.0).unwrap();
        assert!(matches!(b.clone().build(), Err(ModelError::BadDistribution { state: 0, .. })));
        assert!(matches!(b.transition(0, 0, 1, 0.1), Err(ModelError::DuplicateTransition { .. })));
        let mut b = MdpBuilder::new(2);
        b.transition(0, 0, 1, 1.0).unwrap();
        assert_eq!(b.build().unwrap_err(), ModelError::NoActions(1));
    }

    #[test]
    fn builder_renormalizes_within_tolerance() {
        let mut b = MdpBuilder::new(2);
        b.transition(0, 0, 0, 0.5).unwrap().transition(0, 0, 1, 0.5 + 5e-10).unwrap();
        b.transition(1, 0, 1, 1.0).unwrap();
        let m = b.build().unwrap();
        let sum: f64 = m.actions(0)[0].successors.iter().map(|x| x.1).sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }
}
