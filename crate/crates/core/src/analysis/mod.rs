//! Numerical analysis of MDPs and Markov chains.

pub mod chain;
pub mod check;
pub mod exact;
pub mod extremal;
pub mod qualitative;

pub use chain::{expected_visits, mc_reach, mc_reward, VISIT_CAP};
pub use check::{check_mc, CheckResult};
pub use extremal::{extremal, extremal_reach, extremal_reward};
pub use qualitative::qualitative_states;

use crate::model::Controller;
use crate::textio::spec::AtomKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    /// Sup-norm residual at which value iteration stops.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Models with at most this many states get policy-iteration polishing.
    pub polish_limit: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { tol: 1e-8, max_sweeps: 1_000_000, polish_limit: 400 }
    }
}

impl Settings {
    /// Guard band used when comparing bounds obtained from analysis.
    pub fn guard(&self) -> f64 {
        10.0 * self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector {
    pub values: Vec<f64>,
    pub kind: AtomKind,
    pub target: String,
    pub dir: Dir,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalResult {
    pub values: ValueVector,
    pub witness: Controller,
}
