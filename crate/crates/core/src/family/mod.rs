//! Symbolic families of n-controllers.
//!
//! Each pair (controller index i, state s) has a raw parameter. Structural
//! constraints merge raw parameters into classes with a union-find; each
//! class is one parameter of the family, numbered by its smallest raw index
//! `i * |S| + s`. A realisation picks one action per parameter, and a
//! [`FamilyNode`] is a box of realisations given by per-parameter domains.

pub mod split;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use petgraph::unionfind::UnionFind;

use crate::error::{FamilyError, SpecError};
use crate::model::{Controller, Mdp};
use crate::textio::spec::{Constraint, HyperSpec};

pub use split::{
    consistency_conflicts, immediate_impact, partial_from, relevant_states, select_split, split, split_score,
    Conflict, VALUE_CAP,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    controllers: usize,
    states: usize,
    class_of: Vec<usize>,
    members: Vec<Vec<(usize, usize)>>,
    domains: Vec<Arc<[usize]>>,
}

impl ParameterSpace {
    /// `names` lists the controller names referenced by `struc`.
    pub fn build(m: &Mdp, names: &[String], struc: &[Constraint]) -> Result<ParameterSpace, FamilyError> {
        let n = names.len();
        let states = m.state_count();
        let idx = |name: &str| {
            names.iter().position(|c| c == name).ok_or_else(|| SpecError::UndeclaredController(name.to_string()))
        };
        let in_range = |s: usize| {
            if s < states {
                Ok(())
            } else {
                Err(SpecError::StateOutOfRange { state: s, count: states })
            }
        };
        let mut uf = UnionFind::<usize>::new(n * states);
        for c in struc {
            match c {
                Constraint::Same { state, controllers } => {
                    in_range(*state)?;
                    let ids = controllers.iter().map(|c| idx(c)).collect::<Result<Vec<_>, _>>()?;
                    for w in ids.windows(2) {
                        uf.union(w[0] * states + state, w[1] * states + state);
                    }
                }
                Constraint::Obs { states: obs, controller } => {
                    let i = idx(controller)?;
                    for &s in obs {
                        in_range(s)?;
                    }
                    for w in obs.windows(2) {
                        let same_menu = m.action_ids(w[0]).eq(m.action_ids(w[1]));
                        if !same_menu {
                            return Err(FamilyError::IncompatibleObservation { a: w[0], b: w[1] });
                        }
                        uf.union(i * states + w[0], i * states + w[1]);
                    }
                }
            }
        }
        let mut class_of = vec![usize::MAX; n * states];
        let mut root_param: BTreeMap<usize, usize> = BTreeMap::new();
        let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut domains: Vec<Arc<[usize]>> = Vec::new();
        for raw in 0..n * states {
            let root = uf.find(raw);
            let k = *root_param.entry(root).or_insert_with(|| {
                members.push(Vec::new());
                let s = raw % states;
                domains.push(m.action_ids(s).collect::<Vec<_>>().into());
                members.len() - 1
            });
            class_of[raw] = k;
            members[k].push((raw / states, raw % states));
        }
        Ok(ParameterSpace { controllers: n, states, class_of, members, domains })
    }

    pub fn from_spec(m: &Mdp, spec: &HyperSpec) -> Result<ParameterSpace, FamilyError> {
        Self::build(m, &spec.controllers, &spec.struc)
    }

    pub fn controllers(&self) -> usize {
        self.controllers
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn param(&self, i: usize, s: usize) -> usize {
        self.class_of[i * self.states + s]
    }

    pub fn members(&self, k: usize) -> &[(usize, usize)] {
        &self.members[k]
    }

    pub fn domain(&self, k: usize) -> &[usize] {
        &self.domains[k]
    }

    pub fn root(&self) -> FamilyNode {
        FamilyNode { domains: self.domains.clone() }
    }

    pub fn family_size(&self) -> BigUint {
        self.root().size()
    }

    /// Controllers induced by a realisation, one per controller index.
    pub fn induce(&self, r: &Realisation) -> Vec<Controller> {
        (0..self.controllers)
            .map(|i| Controller::new((0..self.states).map(|s| r.0[self.param(i, s)]).collect()))
            .collect()
    }

    /// The realisation inducing the given controllers, if they are consistent
    /// with the synonym classes.
    pub fn realisation_of(&self, cs: &[Controller]) -> Option<Realisation> {
        let mut r = vec![usize::MAX; self.len()];
        for (k, ms) in self.members.iter().enumerate() {
            for &(i, s) in ms {
                let a = cs[i].choice[s];
                if r[k] == usize::MAX {
                    r[k] = a;
                } else if r[k] != a {
                    return None;
                }
            }
        }
        Some(Realisation(r))
    }
}

/// Direct check of structural constraints on concrete controllers.
pub fn satisfies_struc(cs: &[Controller], names: &[String], struc: &[Constraint]) -> bool {
    let idx = |n: &String| names.iter().position(|c| c == n);
    struc.iter().all(|c| match c {
        Constraint::Same { state, controllers } => {
            let acts: Vec<usize> = controllers.iter().filter_map(idx).map(|i| cs[i].choice[*state]).collect();
            acts.windows(2).all(|w| w[0] == w[1])
        }
        Constraint::Obs { states, controller } => match idx(controller) {
            Some(i) => states.windows(2).all(|w| cs[i].choice[w[0]] == cs[i].choice[w[1]]),
            None => false,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Realisation(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FamilyNode {
    pub domains: Vec<Arc<[usize]>>,
}

impl FamilyNode {
    pub fn size(&self) -> BigUint {
        let mut s = BigUint::one();
        for d in &self.domains {
            s *= d.len();
        }
        s
    }

    pub fn size_f64(&self) -> f64 {
        self.domains.iter().map(|d| d.len() as f64).product()
    }

    /// Size when it fits in a `u64`.
    pub fn size_u64(&self) -> Option<u64> {
        self.size().to_u64()
    }

    pub fn is_singleton(&self) -> bool {
        self.domains.iter().all(|d| d.len() == 1)
    }

    pub fn first(&self) -> Realisation {
        Realisation(self.domains.iter().map(|d| d[0]).collect())
    }

    pub fn contains(&self, r: &Realisation) -> bool {
        self.domains.iter().zip(&r.0).all(|(d, a)| d.binary_search(a).is_ok())
    }

    pub fn allows(&self, k: usize, a: usize) -> bool {
        self.domains[k].binary_search(&a).is_ok()
    }

    pub fn with_domain(&self, k: usize, values: Vec<usize>) -> FamilyNode {
        let mut d = self.domains.clone();
        d[k] = values.into();
        FamilyNode { domains: d }
    }

    /// All members in lexicographic order.
    pub fn realisations(&self) -> impl Iterator<Item = Realisation> + '_ {
        let mut idx = vec![0usize; self.domains.len()];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let r = Realisation(idx.iter().zip(&self.domains).map(|(&i, d)| d[i]).collect());
            done = true;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.domains[k].len() {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            Some(r)
        })
    }

    /// Disjoint boxes covering this node minus the box fixing `params` to
    /// the values of `r`. Parameters are processed in ascending order.
    pub fn complement(&self, r: &Realisation, params: &[usize]) -> Vec<FamilyNode> {
        let mut ks = params.to_vec();
        ks.sort_unstable();
        ks.dedup();
        let mut out = Vec::new();
        let mut prefix = self.clone();
        for &k in &ks {
            let rest: Vec<usize> = self.domains[k].iter().copied().filter(|&a| a != r.0[k]).collect();
            if !rest.is_empty() {
                out.push(prefix.with_domain(k, rest));
            }
            prefix = prefix.with_domain(k, vec![r.0[k]]);
        }
        out
    }
}

/// A partial realisation; the members of a node agreeing with it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    pub fixed: BTreeMap<usize, usize>,
}

/// Two assignments fixing a parameter to different actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Disagreement {
    pub param: usize,
    pub a: usize,
    pub b: usize,
}

impl PartialAssignment {
    pub fn merge(&self, other: &PartialAssignment) -> Result<PartialAssignment, Disagreement> {
        let mut fixed = self.fixed.clone();
        for (&k, &b) in &other.fixed {
            match fixed.get(&k) {
                Some(&a) if a != b => return Err(Disagreement { param: k, a, b }),
                _ => {
                    fixed.insert(k, b);
                }
            }
        }
        Ok(PartialAssignment { fixed })
    }

    /// Completes with the lowest domain value of the node.
    pub fn complete(&self, node: &FamilyNode) -> Realisation {
        Realisation(
            node.domains.iter().enumerate().map(|(k, d)| self.fixed.get(&k).copied().unwrap_or(d[0])).collect(),
        )
    }
}

/// Restriction of `m` to the choices the node leaves to controller `i`.
pub fn node_restrict(m: &Mdp, ps: &ParameterSpace, node: &FamilyNode, i: usize) -> Mdp {
    m.map_actions(|s, a| node.allows(ps.param(i, s), a.id)).expect("node domains are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::spec_file::parse_spec;

    fn three_states() -> Mdp {
        let two = vec![vec![(0, 1.0)], vec![(0, 1.0)]];
        Mdp::from_rows(vec![two.clone(), two.clone(), two]).unwrap()
    }

    #[test]
    fn unconstrained_family() {
        let ps = ParameterSpace::build(&three_states(), &["c".into()], &[]).unwrap();
        assert_eq!(ps.len(), 3);
        assert_eq!(ps.family_size(), BigUint::from(8u32));
    }

    #[test]
    fn obs_merges_parameters() {
        let m = three_states();
        let s = parse_spec("exists c : obs({1, 2}, c) ; forall x in {0}[c] : true").unwrap();
        let ps = ParameterSpace::from_spec(&m, &s).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.param(0, 1), ps.param(0, 2));
        assert_eq!(ps.family_size(), BigUint::from(4u32));
    }

    #[test]
    fn same_forces_agreement() {
        let m = three_states();
        let s = parse_spec("exists a, b : same(1, {a, b}) ; forall x in {0}[a] : true").unwrap();
        let ps = ParameterSpace::from_spec(&m, &s).unwrap();
        assert_eq!(ps.len(), 5);
        for r in ps.root().realisations() {
            let cs = ps.induce(&r);
            assert_eq!(cs[0].choice[1], cs[1].choice[1]);
            assert!(satisfies_struc(&cs, &s.controllers, &s.struc));
            assert_eq!(ps.realisation_of(&cs), Some(r));
        }
    }

    #[test]
    fn obs_with_different_menus_rejected() {
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)], vec![(0, 1.0)]], vec![vec![(0, 1.0)]]]).unwrap();
        let s = parse_spec("exists c : obs({0, 1}, c) ; forall x in {0}[c] : true").unwrap();
        assert_eq!(ParameterSpace::from_spec(&m, &s).unwrap_err(), FamilyError::IncompatibleObservation { a: 0, b: 1 });
    }

    #[test]
    fn root_restriction_is_identity() {
        let m = three_states();
        let ps = ParameterSpace::build(&m, &["c".into()], &[]).unwrap();
        assert_eq!(node_restrict(&m, &ps, &ps.root(), 0), m);
        let node = ps.root().with_domain(ps.param(0, 1), vec![1]);
        let r = node_restrict(&m, &ps, &node, 0);
        assert_eq!(r.action_ids(1).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn complement_counts() {
        let m = three_states();
        let ps = ParameterSpace::build(&m, &["c".into()], &[]).unwrap();
        let root = ps.root();
        let r = root.first();
        let boxes = root.complement(&r, &[0, 2]);
        let total: BigUint = boxes.iter().map(|b| b.size()).sum();
        assert_eq!(total + BigUint::from(2u32), root.size());
        assert!(root.complement(&r, &[]).is_empty());
        let all = root.complement(&r, &[0, 1, 2]);
        assert_eq!(all.iter().map(|b| b.size()).sum::<BigUint>(), BigUint::from(7u32));
        assert!(all.iter().all(|b| !b.contains(&r)));
    }

    #[test]
    fn partial_assignment_merge() {
        let a = PartialAssignment { fixed: BTreeMap::from([(0, 1), (2, 0)]) };
        let b = PartialAssignment { fixed: BTreeMap::from([(1, 1), (2, 0)]) };
        let c = PartialAssignment { fixed: BTreeMap::from([(2, 1)]) };
        assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
        assert_eq!(a.merge(&c).unwrap_err(), Disagreement { param: 2, a: 0, b: 1 });
    }
}
