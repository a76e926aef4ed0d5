//! Conformance of a coin-driven implementation with a fair die.
//!
//! States 0..=6 form the die: state 0 moves to each outcome 1..=6 with
//! probability 1/6. States 7..=19 form the implementation: seven coin
//! states `s0..s6` followed by six outcome states `d1..d6`. Without
//! nondeterminism each coin state flips to the successor pair of the
//! Knuth-Yao procedure. A nondeterministic coin state instead offers one
//! action per unordered pair of distinct implementation states.

use crate::error::Error;
use crate::generators::Generated;
use crate::model::{Controller, Mdp, MdpBuilder};
use crate::textio::parse_spec;

/// First implementation state.
pub const IMPL: usize = 7;
/// Implementation states: seven coin states and six outcomes.
pub const IMPL_STATES: usize = 13;
/// Actions of a nondeterministic coin state.
pub const PAIRS: usize = IMPL_STATES * (IMPL_STATES - 1) / 2;

/// Knuth-Yao successors of the coin states, as local indices.
const KY: [(usize, usize); 7] = [(1, 2), (3, 4), (5, 6), (1, 7), (8, 9), (10, 11), (2, 12)];

fn local_name(u: usize) -> String {
    if u < 7 {
        format!("s{u}")
    } else {
        format!("d{}", u - 6)
    }
}

/// Index of the unordered pair `{u, v}`, `u < v`, in lexicographic order.
pub fn pair_index(u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < IMPL_STATES);
    (0..u).map(|w| IMPL_STATES - 1 - w).sum::<usize>() + (v - u - 1)
}

pub fn pair_of(index: usize) -> (usize, usize) {
    let mut k = index;
    for u in 0..IMPL_STATES {
        let row = IMPL_STATES - 1 - u;
        if k < row {
            return (u, u + 1 + k);
        }
        k -= row;
    }
    panic!("pair index {index} out of range")
}

/// Coin states with nondeterminism and the actions they offer.
///
/// With one stage the first coin state offers every pair and the second
/// one its own pair plus the first pair in order. With `n >= 2` stages the
/// first `n` coin states offer every pair.
pub fn stage_menus(stages: usize) -> Vec<Vec<usize>> {
    let own = |s: usize| pair_index(KY[s].0, KY[s].1);
    (0..7)
        .map(|s| {
            let all = s < stages;
            if all {
                (0..PAIRS).collect()
            } else if stages == 1 && s == 1 {
                let mut v = vec![0, own(s)];
                v.sort_unstable();
                v.dedup();
                v
            } else {
                vec![own(s)]
            }
        })
        .collect()
}

pub fn model(stages: usize) -> Result<Mdp, Error> {
    if stages > 7 {
        return Err(Error::Generator(format!("at most 7 stages, got {stages}")));
    }
    let mut b = MdpBuilder::new(IMPL + IMPL_STATES);
    b.action(0, 0, Some("roll".into()))?;
    for d in 1..=6 {
        b.transition(0, 0, d, 1.0 / 6.0)?;
        b.action(d, 0, Some("stay".into()))?;
        b.transition(d, 0, d, 1.0)?;
    }
    for (s, menu) in stage_menus(stages).iter().enumerate() {
        for &k in menu {
            let (u, v) = pair_of(k);
            let name = format!("{}_{}", local_name(u), local_name(v));
            b.action(IMPL + s, k, Some(name))?;
            b.transition(IMPL + s, k, IMPL + u, 0.5)?;
            b.transition(IMPL + s, k, IMPL + v, 0.5)?;
        }
    }
    for d in 7..IMPL_STATES {
        b.action(IMPL + d, 0, Some("stay".into()))?;
        b.transition(IMPL + d, 0, IMPL + d, 1.0)?;
    }
    for d in 1..=6 {
        b.label(&format!("die{d}"), &[d, IMPL + 6 + d])?;
    }
    Ok(b.build()?)
}

pub fn spec_text() -> String {
    let atoms: Vec<String> = (1..=6)
        .flat_map(|d| {
            [format!("P(x, F die{d}) <= P(y, F die{d})"), format!("P(x, F die{d}) >= P(y, F die{d})")]
        })
        .collect();
    format!("exists c :\n  forall x in {{0}}[c], forall y in {{{IMPL}}}[c] :\n    {}\n", atoms.join("\n    & "))
}

/// The Knuth-Yao implementation controller.
pub fn ky_controller() -> Controller {
    let mut choice = vec![0; IMPL + IMPL_STATES];
    for (s, &(u, v)) in KY.iter().enumerate() {
        choice[IMPL + s] = pair_index(u, v);
    }
    Controller::new(choice)
}

pub fn generate(stages: usize) -> Result<Generated, Error> {
    Ok(Generated { model: model(stages)?, spec: parse_spec(&spec_text())?, controllers: vec![ky_controller()] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indexing_is_a_bijection() {
        let mut k = 0;
        for u in 0..IMPL_STATES {
            for v in u + 1..IMPL_STATES {
                assert_eq!(pair_index(u, v), k);
                assert_eq!(pair_of(k), (u, v));
                k += 1;
            }
        }
        assert_eq!(k, PAIRS);
    }

    #[test]
    fn menus() {
        assert_eq!(stage_menus(0).iter().map(Vec::len).collect::<Vec<_>>(), vec![1; 7]);
        let one: Vec<usize> = stage_menus(1).iter().map(Vec::len).collect();
        assert_eq!(one, vec![78, 2, 1, 1, 1, 1, 1]);
        assert_eq!(stage_menus(3).iter().map(Vec::len).product::<usize>(), 78usize.pow(3));
    }

    #[test]
    fn controller_is_valid_for_every_stage_count() {
        for n in 0..=7 {
            ky_controller().validate(&model(n).unwrap()).unwrap();
        }
        assert!(model(8).is_err());
    }
}
