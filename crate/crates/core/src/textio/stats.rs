//! JSON statistics documents. The schema is described in `docs/stats-schema.md`.

use serde::Serialize;

use crate::synthesis::ar::{AtomReport, Method, Mode, SynthesisOutcome, Verdict};

pub const STATS_SCHEMA: &str = "hypersynth-stats/1";

#[derive(Debug, Clone, Serialize)]
pub struct StatsDoc<'a> {
    pub schema: &'static str,
    pub mode: Mode,
    pub method: Method,
    pub verdict: Verdict,
    /// Decimal string; families can exceed 64 bits.
    pub family_size: String,
    pub mdp_states: usize,
    pub iterations: u64,
    pub decided_families: u64,
    pub avg_decided_size: f64,
    pub explored: String,
    pub explored_fraction: f64,
    pub wall_time_s: f64,
    pub counterexamples: u64,
    pub avg_conflict_size: f64,
    pub limit_hit: bool,
    /// One action per parameter.
    pub witness: Option<&'a [usize]>,
    /// One action per state, per controller.
    pub controllers: Vec<&'a [usize]>,
    pub optimum: Option<u64>,
    pub satisfying_count: Option<String>,
    pub atoms: &'a [AtomReport],
}

pub fn stats_doc(o: &SynthesisOutcome) -> StatsDoc<'_> {
    let s = &o.stats;
    StatsDoc {
        schema: STATS_SCHEMA,
        mode: o.mode,
        method: o.method,
        verdict: o.verdict,
        family_size: s.family_size.to_string(),
        mdp_states: s.mdp_states,
        iterations: s.iterations,
        decided_families: s.decided_families,
        avg_decided_size: s.avg_decided_size,
        explored: s.explored.to_string(),
        explored_fraction: s.explored_fraction,
        wall_time_s: s.wall_time.as_secs_f64(),
        counterexamples: s.counterexamples,
        avg_conflict_size: s.avg_conflict_size,
        limit_hit: s.limit_hit,
        witness: o.witness.as_ref().map(|r| r.0.as_slice()),
        controllers: o.controllers.iter().map(|c| c.choice.as_slice()).collect(),
        optimum: o.optimum,
        satisfying_count: o.satisfying.as_ref().map(|s| s.count().to_string()),
        atoms: &s.root_atoms,
    }
}

/// Pretty-printed JSON with keys in schema order. Infinite bounds are
/// written as `null`.
pub fn write_stats(o: &SynthesisOutcome) -> String {
    let mut s = serde_json::to_string_pretty(&stats_doc(o)).expect("stats serialise");
    s.push('\n');
    s
}
