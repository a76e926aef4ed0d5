//! Brute-force enumeration of every realisation; the ground truth for tests.

use std::time::Instant;

use num_bigint::BigUint;

use crate::error::{Error, FamilyError};
use crate::synthesis::ar::{Method, Mode, SatisfyingSet, Stats, SynthesisOutcome, Verdict};
use crate::synthesis::distance::DistancePairs;
use crate::synthesis::Problem;

/// Checks every member of the family. The witness is the first satisfying
/// member in lexicographic order (in optimal mode, the first one with the
/// largest distance); all satisfying members are listed as singletons.
pub fn enumerate_oracle(p: &Problem, mode: Mode, cap: u64) -> Result<SynthesisOutcome, Error> {
    let start = Instant::now();
    let root = p.ps.root();
    let size = root.size();
    if size > BigUint::from(cap) {
        return Err(FamilyError::CapExceeded { size: size.to_string(), cap }.into());
    }
    let pairs = match mode {
        Mode::Optimal => Some(DistancePairs::new(&p.ps)?),
        _ => None,
    };
    let mut sat = SatisfyingSet::default();
    let mut best: Option<(u64, usize)> = None;
    let mut checked = 0u64;
    for r in root.realisations() {
        checked += 1;
        if p.check(&r)?.holds {
            if let Some(pairs) = &pairs {
                let d = pairs.distance(&r);
                if best.is_none_or(|(b, _)| d > b) {
                    best = Some((d, sat.singletons.len()));
                }
            }
            sat.singletons.push(r);
        }
    }
    let witness = match mode {
        Mode::Optimal => best.map(|(_, i)| sat.singletons[i].clone()),
        _ => sat.singletons.first().cloned(),
    };
    let verdict = if witness.is_some() { Verdict::Feasible } else { Verdict::Unfeasible };
    let stats = Stats {
        family_size: size.clone(),
        mdp_states: p.m.state_count(),
        iterations: checked,
        decided_families: checked,
        avg_decided_size: 1.0,
        explored: size,
        explored_fraction: 1.0,
        wall_time: start.elapsed(),
        counterexamples: 0,
        avg_conflict_size: 0.0,
        root_atoms: Vec::new(),
        limit_hit: false,
    };
    Ok(SynthesisOutcome {
        verdict,
        mode,
        method: Method::Oracle,
        controllers: witness.as_ref().map(|r| p.ps.induce(r)).unwrap_or_default(),
        witness,
        satisfying: Some(sat),
        optimum: best.map(|(d, _)| d),
        stats,
    })
}
