//! Synthesis of controllers against a hyperspecification.

pub mod ar;
pub mod compose;
pub mod distance;
pub mod formula;
pub mod interval;
pub mod oracle;

pub use ar::{
    ar_loop, synthesize, AtomReport, Limits, Method, Mode, SatisfyingSet, Stats, SynthConfig, SynthesisOutcome, Verdict,
};
pub use compose::{compose, ComposeResult};
pub use distance::DistancePairs;
pub use formula::{instantiate, Cmp, Formula, Instantiated, Term};
pub use interval::{classify, IntervalVerdict, NodeAnalysis, Tag};
pub use oracle::enumerate_oracle;

use crate::analysis::{check_mc, CheckResult};
use crate::error::{Error, ModelError};
use crate::family::{ParameterSpace, Realisation};
use crate::model::{impose, memory_state, unfold_memory, Controller, Mdp, MEMORY_CAP};
use crate::textio::spec::{Constraint, HyperSpec, StateQuant};

/// A validated synthesis problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub m: Mdp,
    pub spec: HyperSpec,
    pub ps: ParameterSpace,
    pub formula: Instantiated,
}

impl Problem {
    pub fn new(m: Mdp, spec: HyperSpec, eps_eq: Option<f64>) -> Result<Problem, Error> {
        spec.validate_for(&m)?;
        let ps = ParameterSpace::from_spec(&m, &spec)?;
        let formula = instantiate(&spec, eps_eq);
        Ok(Problem { m, spec, ps, formula })
    }

    /// Checks the controllers induced by `r` against the formula.
    pub fn check(&self, r: &Realisation) -> Result<CheckResult, ModelError> {
        self.check_controllers(&self.ps.induce(r))
    }

    pub fn check_controllers(&self, cs: &[Controller]) -> Result<CheckResult, ModelError> {
        let mcs = cs.iter().map(|c| impose(&self.m, c)).collect::<Result<Vec<_>, _>>()?;
        check_mc(&mcs, &self.formula)
    }
}

/// Unfolds the model with `bits` bits of memory and lifts the spec: states
/// in quantifier domains start with memory 0, and structural constraints
/// apply to each memory copy separately.
pub fn with_memory(m: &Mdp, spec: &HyperSpec, bits: u32) -> Result<(Mdp, HyperSpec), ModelError> {
    let um = unfold_memory(m, bits, MEMORY_CAP)?;
    let mem = 1usize << bits;
    let mut struc = Vec::new();
    for c in &spec.struc {
        for v in 0..mem {
            struc.push(match c {
                Constraint::Same { state, controllers } => {
                    Constraint::Same { state: memory_state(*state, v, bits), controllers: controllers.clone() }
                }
                Constraint::Obs { states, controller } => Constraint::Obs {
                    states: states.iter().map(|&s| memory_state(s, v, bits)).collect(),
                    controller: controller.clone(),
                },
            });
        }
    }
    let quants = spec
        .quants
        .iter()
        .map(|q| StateQuant { domain: q.domain.iter().map(|&s| memory_state(s, 0, bits)).collect(), ..q.clone() })
        .collect();
    Ok((um, HyperSpec { controllers: spec.controllers.clone(), struc, quants, prob: spec.prob.clone() }))
}
