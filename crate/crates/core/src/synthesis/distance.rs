//! The distance objective: number of choices on which the first two
//! controllers differ.
//!
//! Choices are counted per pair of parameter classes `(k(0,s), k(1,s))`, so
//! an observation class contributes once however many states it covers.
//! States where both controllers share a parameter never count.

use std::collections::BTreeSet;

use crate::error::SpecError;
use crate::family::{FamilyNode, ParameterSpace, Realisation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistancePairs(pub Vec<(usize, usize)>);

impl DistancePairs {
    pub fn new(ps: &ParameterSpace) -> Result<DistancePairs, SpecError> {
        if ps.controllers() < 2 {
            return Err(SpecError::TooFewControllers { needed: 2, got: ps.controllers() });
        }
        let set: BTreeSet<(usize, usize)> =
            (0..ps.states()).map(|s| (ps.param(0, s), ps.param(1, s))).filter(|(a, b)| a != b).collect();
        Ok(DistancePairs(set.into_iter().collect()))
    }

    pub fn distance(&self, r: &Realisation) -> u64 {
        self.0.iter().filter(|&&(a, b)| r.0[a] != r.0[b]).count() as u64
    }

    /// Upper bound over the node: pairs whose domains allow a difference.
    pub fn bound(&self, node: &FamilyNode) -> u64 {
        self.0
            .iter()
            .filter(|&&(a, b)| {
                let (da, db) = (&node.domains[a], &node.domains[b]);
                !(da.len() == 1 && db.len() == 1 && da[0] == db[0])
            })
            .count() as u64
    }

    /// A member of the node with a large distance, built greedily.
    pub fn greedy(&self, node: &FamilyNode) -> Realisation {
        let mut r = node.first();
        let mut locked = vec![false; node.domains.len()];
        for &(a, b) in &self.0 {
            if r.0[a] == r.0[b] {
                let pick = |k: usize, other: usize| node.domains[k].iter().copied().find(|&x| x != other);
                if !locked[b] {
                    if let Some(x) = pick(b, r.0[a]) {
                        r.0[b] = x;
                    }
                } else if !locked[a] {
                    if let Some(x) = pick(a, r.0[b]) {
                        r.0[a] = x;
                    }
                }
            }
            locked[a] = true;
            locked[b] = true;
        }
        r
    }

    /// A parameter of some pair with a non-singleton domain.
    pub fn open_param(&self, node: &FamilyNode) -> Option<usize> {
        self.0.iter().flat_map(|&(a, b)| [a, b]).find(|&k| node.domains[k].len() > 1)
    }
}
