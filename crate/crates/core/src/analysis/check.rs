//! Evaluation of ground formulas on concrete Markov chains.

use std::collections::HashMap;

use crate::analysis::chain::{mc_reach, mc_reward};
use crate::error::ModelError;
use crate::model::Mc;
use crate::synthesis::formula::Instantiated;
use crate::textio::spec::AtomKind;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub holds: bool,
    pub term_values: Vec<f64>,
    pub cmp_truth: Vec<bool>,
}

/// Values of every term, `mcs[i]` being the chain induced by controller `i`.
pub fn term_values(mcs: &[Mc], f: &Instantiated) -> Result<Vec<f64>, ModelError> {
    let mut cache: HashMap<(usize, &str, AtomKind), Vec<f64>> = HashMap::new();
    let mut out = Vec::with_capacity(f.terms.len());
    for t in &f.terms {
        let key = (t.slot, t.target.as_str(), t.kind);
        if !cache.contains_key(&key) {
            let mc = &mcs[t.slot];
            let target = mc.target(&t.target)?;
            let v = match t.kind {
                AtomKind::Reach => mc_reach(mc, &target),
                AtomKind::Reward => {
                    if !mc.has_rewards() {
                        return Err(ModelError::MissingRewards);
                    }
                    if target.is_empty() {
                        return Err(ModelError::EmptyTarget(t.target.clone()));
                    }
                    mc_reward(mc, &target)
                }
            };
            cache.insert(key, v);
        }
        out.push(cache[&key][t.state]);
    }
    Ok(out)
}

pub fn check_mc(mcs: &[Mc], f: &Instantiated) -> Result<CheckResult, ModelError> {
    let term_values = term_values(mcs, f)?;
    let cmp_truth: Vec<bool> = f.cmps.iter().map(|c| c.holds(&term_values)).collect();
    let holds = f.root.eval(&|i| cmp_truth[i]);
    Ok(CheckResult { holds, term_values, cmp_truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mdp;
    use crate::synthesis::formula::instantiate;
    use crate::textio::spec_file::parse_spec;

    #[test]
    fn reflexive_comparison_holds() {
        let m = Mdp::from_rows(vec![vec![vec![(0, 0.5), (1, 0.5)]], vec![vec![(1, 1.0)]]])
            .unwrap()
            .with_label("t", &[1])
            .unwrap();
        let mc = Mc::new(m).unwrap();
        let s = parse_spec("exists c : forall x in {0}[c] : P(x, F t) <= P(x, F t)").unwrap();
        let r = check_mc(&[mc], &instantiate(&s, None)).unwrap();
        assert!(r.holds);
        assert_eq!(r.term_values, vec![1.0]);
    }

    #[test]
    fn reward_without_rewards_is_error() {
        let m = Mdp::from_rows(vec![vec![vec![(0, 1.0)]]]).unwrap().with_label("t", &[0]).unwrap();
        let s = parse_spec("exists c : forall x in {0}[c] : R(x, F t) <= 1").unwrap();
        let r = check_mc(&[Mc::new(m).unwrap()], &instantiate(&s, None));
        assert_eq!(r.unwrap_err(), ModelError::MissingRewards);
    }
}
