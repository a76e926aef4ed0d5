//! Synthesis of memoryless deterministic controllers for Markov decision
//! processes against probabilistic hyperproperties with structural
//! constraints.
//!
//! The family of all admissible n-controllers is explored by abstraction
//! refinement: bounds obtained from extremal analysis of restricted MDPs
//! decide comparisons for whole subfamilies, and undecided subfamilies are
//! split on conflicting parameters.

pub mod analysis;
pub mod counterexample;
pub mod error;
pub mod family;
pub mod generators;
pub mod model;
pub mod synthesis;
pub mod textio;

pub use analysis::{check_mc, CheckResult, Dir, ExtremalResult, Settings, ValueVector};
pub use error::{Error, FamilyError, ModelError, ParseError, Result, SpecError};
pub use family::{FamilyNode, ParameterSpace, PartialAssignment, Realisation};
pub use model::{impose, restrict, unfold_memory, Action, Controller, Mc, Mdp, MdpBuilder, TargetSet};
pub use synthesis::{
    synthesize, Limits, Method, Mode, Problem, SatisfyingSet, Stats, SynthConfig, SynthesisOutcome, Verdict,
};
pub use textio::spec::{AtomKind, HyperSpec};
