//! The abstraction-refinement loop.
//!
//! Nodes are popped from a stack. Each comparison is bounded over the node;
//! decided comparisons are substituted into the formula. A node whose
//! residual formula is true or false is decided as a whole. Otherwise the
//! loop tries to compose a witness from candidate assignments, checks nodes
//! whose relevant choices are all fixed with a single member, optionally
//! prunes with a counterexample, and finally splits on a conflicting
//! parameter.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::analysis::Settings;
use crate::counterexample::{ce_step, CeOutcome};
use crate::error::{Error, ModelError};
use crate::family::{
    immediate_impact, select_split, split, split::impact_inputs, split_score, Disagreement, FamilyNode, Realisation,
};
use crate::model::Controller;
use crate::synthesis::compose::{compose, COMPOSE_BUDGET};
use crate::synthesis::distance::DistancePairs;
use crate::synthesis::formula::Formula;
use crate::synthesis::interval::{IntervalVerdict, NodeAnalysis, Tag};
use crate::synthesis::oracle::enumerate_oracle;
use crate::synthesis::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Feasibility,
    Complete,
    /// Maximise the distance between the first two controllers.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ar,
    /// Abstraction refinement with counterexample pruning.
    Hybrid,
    Oracle,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub max_iters: Option<u64>,
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub mode: Mode,
    pub method: Method,
    pub settings: Settings,
    pub limits: Limits,
    /// Largest family the oracle enumerates.
    pub oracle_cap: u64,
    pub compose_budget: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            mode: Mode::Feasibility,
            method: Method::Ar,
            settings: Settings::default(),
            limits: Limits::default(),
            oracle_cap: 1_000_000,
            compose_budget: COMPOSE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Unfeasible,
    /// A limit stopped the exploration first.
    Unknown,
}

/// Satisfying members of a complete run: whole nodes plus single members.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SatisfyingSet {
    pub nodes: Vec<FamilyNode>,
    pub singletons: Vec<Realisation>,
}

impl SatisfyingSet {
    pub fn count(&self) -> BigUint {
        let n: BigUint = self.nodes.iter().map(|n| n.size()).sum();
        n + BigUint::from(self.singletons.len())
    }

    pub fn contains(&self, r: &Realisation) -> bool {
        self.singletons.contains(r) || self.nodes.iter().any(|n| n.contains(r))
    }

    /// Every member, enumerated. Only sensible for small sets.
    pub fn members(&self) -> BTreeSet<Realisation> {
        let mut out: BTreeSet<Realisation> = self.singletons.iter().cloned().collect();
        for n in &self.nodes {
            out.extend(n.realisations());
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.singletons.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomReport {
    pub comparison: String,
    pub tag: Tag,
    pub lb_lhs: f64,
    pub ub_lhs: f64,
    pub lb_rhs: f64,
    pub ub_rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub family_size: BigUint,
    pub mdp_states: usize,
    pub iterations: u64,
    pub decided_families: u64,
    pub avg_decided_size: f64,
    pub explored: BigUint,
    pub explored_fraction: f64,
    pub wall_time: Duration,
    pub counterexamples: u64,
    pub avg_conflict_size: f64,
    /// Bounds of every comparison over the whole family.
    pub root_atoms: Vec<AtomReport>,
    pub limit_hit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutcome {
    pub verdict: Verdict,
    pub mode: Mode,
    pub method: Method,
    pub witness: Option<Realisation>,
    /// Controllers induced by the witness.
    pub controllers: Vec<Controller>,
    pub satisfying: Option<SatisfyingSet>,
    pub optimum: Option<u64>,
    pub stats: Stats,
}

pub fn explored_fraction(explored: &BigUint, total: &BigUint) -> f64 {
    if explored == total {
        1.0
    } else {
        explored.to_f64().unwrap_or(f64::NAN) / total.to_f64().unwrap_or(f64::NAN)
    }
}

/// Runs the configured method.
pub fn synthesize(p: &Problem, cfg: &SynthConfig) -> Result<SynthesisOutcome, Error> {
    match cfg.method {
        Method::Oracle => enumerate_oracle(p, cfg.mode, cfg.oracle_cap),
        _ => ar_loop(p, cfg),
    }
}

enum Flow {
    Continue,
    Stop,
}

struct Runner<'p> {
    p: &'p Problem,
    cfg: &'p SynthConfig,
    start: Instant,
    stack: Vec<(FamilyNode, bool)>,
    iterations: u64,
    decided: u64,
    decided_size: f64,
    explored: BigUint,
    ces: u64,
    ce_conflicts: u64,
    root_atoms: Vec<AtomReport>,
    witness: Option<Realisation>,
    sat: SatisfyingSet,
    pairs: Option<DistancePairs>,
    best: Option<(u64, Realisation)>,
}

impl Runner<'_> {
    fn decide(&mut self, node: &FamilyNode) {
        self.decide_size(node.size());
    }

    fn decide_size(&mut self, size: BigUint) {
        self.decided += 1;
        self.decided_size += size.to_f64().unwrap_or(f64::INFINITY);
        self.explored += size;
    }

    fn limit_reached(&self) -> bool {
        let l = &self.cfg.limits;
        l.max_iters.is_some_and(|m| self.iterations >= m) || l.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn push_all(&mut self, children: Vec<FamilyNode>, known_sat: bool) {
        for c in children.into_iter().rev() {
            self.stack.push((c, known_sat));
        }
    }

    /// Records `r` as incumbent if it is verified and beats the current one.
    fn offer(&mut self, r: Realisation) -> Result<(), ModelError> {
        let pairs = self.pairs.as_ref().expect("optimal mode");
        let d = pairs.distance(&r);
        if self.best.as_ref().is_some_and(|(b, _)| *b >= d) {
            return Ok(());
        }
        if self.p.check(&r)?.holds {
            self.best = Some((d, r));
        }
        Ok(())
    }

    fn optimal_sat(&mut self, node: FamilyNode) -> Result<(), ModelError> {
        let pairs = self.pairs.as_ref().expect("optimal mode");
        let r = pairs.greedy(&node);
        let d = pairs.distance(&r);
        let bound = pairs.bound(&node);
        let open = pairs.open_param(&node);
        self.offer(r)?;
        match open {
            Some(k) if d < bound => {
                let all = node.domains[k].to_vec();
                self.push_all(split(&node, k, &all), true);
            }
            _ => self.decide(&node),
        }
        Ok(())
    }

    fn all_sat(&mut self, node: FamilyNode) -> Result<Flow, ModelError> {
        match self.cfg.mode {
            Mode::Feasibility => {
                let r = node.first();
                if self.p.check(&r)?.holds {
                    self.witness = Some(r);
                    return Ok(Flow::Stop);
                }
                // bounds and the member disagree; fall back to splitting
                if node.is_singleton() {
                    self.decide(&node);
                } else {
                    let k = (0..node.domains.len()).find(|&k| node.domains[k].len() > 1).unwrap();
                    let all = node.domains[k].to_vec();
                    self.push_all(split(&node, k, &all), false);
                }
            }
            Mode::Complete => {
                self.decide(&node);
                self.sat.nodes.push(node);
            }
            Mode::Optimal => self.optimal_sat(node)?,
        }
        Ok(Flow::Continue)
    }

    fn singleton(&mut self, node: FamilyNode) -> Result<Flow, ModelError> {
        let r = node.first();
        let holds = self.p.check(&r)?.holds;
        self.decide(&node);
        if holds {
            match self.cfg.mode {
                Mode::Feasibility => {
                    self.witness = Some(r);
                    return Ok(Flow::Stop);
                }
                Mode::Complete => self.sat.singletons.push(r),
                Mode::Optimal => self.offer(r)?,
            }
        }
        Ok(Flow::Continue)
    }

    fn uniform(&self, node: &FamilyNode, residual: &Formula, verdicts: &[IntervalVerdict]) -> bool {
        let ps = &self.p.ps;
        residual.cmp_order().iter().all(|&i| {
            let v = &verdicts[i];
            v.lhs.iter().chain(v.rhs.iter()).all(|w| {
                w.relevant.iter().enumerate().all(|(s, &r)| !r || node.domains[ps.param(w.slot, s)].len() == 1)
            })
        })
    }

    fn choose_split(
        &self,
        na: &mut NodeAnalysis,
        residual: &Formula,
        verdicts: &[IntervalVerdict],
        disagreement: Option<Disagreement>,
    ) -> Result<Vec<FamilyNode>, ModelError> {
        let node = na.node;
        let ps = &self.p.ps;
        let f = &self.p.formula;
        let order = residual.cmp_order();
        for &i in &order {
            let mut scored = Vec::new();
            let mut picked = Vec::new();
            let mut gammas: Vec<((usize, usize), Vec<Vec<f64>>)> = Vec::new();
            for (w, conflict) in verdicts[i].conflicts() {
                let rm = na.restricted(w.slot);
                let key = (w.slot, w.term);
                if !gammas.iter().any(|(k, _)| *k == key) {
                    let term = &f.terms[w.term];
                    let target = na.target(&term.target)?;
                    let (visits, values) = impact_inputs(&rm, &w.witness, term.state, &target, term.kind);
                    gammas.push((key, immediate_impact(&rm, &visits, &values, &target.mask, term.kind)));
                }
                let gamma = &gammas.iter().find(|(k, _)| *k == key).unwrap().1;
                scored.push((conflict.param, split_score(ps, w.slot, conflict, gamma, &rm)));
                picked.push(conflict);
            }
            if let Some(j) = select_split(&scored) {
                return Ok(split(node, picked[j].param, &picked[j].actions));
            }
        }
        let d = disagreement.or_else(|| order.iter().find_map(|&i| verdicts[i].disagreement));
        if let Some(d) = d {
            return Ok(split(node, d.param, &[d.a, d.b]));
        }
        for &i in &order {
            let v = &verdicts[i];
            for w in v.lhs.iter().chain(v.rhs.iter()) {
                for (s, &r) in w.relevant.iter().enumerate() {
                    let k = ps.param(w.slot, s);
                    if r && node.domains[k].len() > 1 {
                        return Ok(split(node, k, &[w.witness.choice[s]]));
                    }
                }
            }
        }
        let k = (0..node.domains.len()).find(|&k| node.domains[k].len() > 1).expect("node is not a singleton");
        Ok(split(node, k, &node.domains[k].to_vec()))
    }

    fn process(&mut self, node: FamilyNode) -> Result<Flow, ModelError> {
        let p = self.p;
        let mut na = NodeAnalysis::new(&p.m, &p.ps, &node, self.cfg.settings);
        let verdicts = na.all_bounds(&p.formula)?;
        if self.iterations == 1 {
            self.root_atoms = verdicts
                .iter()
                .enumerate()
                .map(|(i, v)| AtomReport {
                    comparison: p.formula.describe_cmp(i),
                    tag: v.tag,
                    lb_lhs: v.lb_a,
                    ub_lhs: v.ub_a,
                    lb_rhs: v.lb_b,
                    ub_rhs: v.ub_b,
                })
                .collect();
        }
        let residual = p.formula.root.substitute(&|i| verdicts[i].tag.decided());
        match residual {
            Formula::True => {
                drop(na);
                return self.all_sat(node);
            }
            Formula::False => {
                self.decide(&node);
                return Ok(Flow::Continue);
            }
            _ => {}
        }
        if node.is_singleton() {
            drop(na);
            return self.singleton(node);
        }
        let mut disagreement = None;
        if self.cfg.mode == Mode::Feasibility {
            let c = compose(&residual, &verdicts, self.cfg.compose_budget);
            if let Some(pa) = c.assignment {
                let r = pa.complete(&node);
                if p.check(&r)?.holds {
                    self.witness = Some(r);
                    return Ok(Flow::Stop);
                }
            }
            disagreement = c.disagreement;
        }
        if self.uniform(&node, &residual, &verdicts) {
            let holds = p.check(&node.first())?.holds;
            drop(na);
            if holds {
                return self.all_sat(node);
            }
            self.decide(&node);
            return Ok(Flow::Continue);
        }
        if self.cfg.method == Method::Hybrid {
            match ce_step(&mut na, &p.formula, &residual)? {
                CeOutcome::Satisfies(r) => match self.cfg.mode {
                    Mode::Feasibility => {
                        self.witness = Some(r);
                        return Ok(Flow::Stop);
                    }
                    Mode::Optimal => self.offer(r)?,
                    Mode::Complete => {}
                },
                CeOutcome::Pruned { conflict, remainder, .. } => {
                    self.ces += 1;
                    self.ce_conflicts += conflict.len() as u64;
                    let kept: BigUint = remainder.iter().map(|n| n.size()).sum();
                    self.decide_size(node.size() - kept);
                    self.push_all(remainder, false);
                    return Ok(Flow::Continue);
                }
                CeOutcome::Inapplicable => {}
            }
        }
        let children = self.choose_split(&mut na, &residual, &verdicts, disagreement)?;
        self.push_all(children, false);
        Ok(Flow::Continue)
    }
}

/// Abstraction refinement in the configured mode.
pub fn ar_loop(p: &Problem, cfg: &SynthConfig) -> Result<SynthesisOutcome, Error> {
    let pairs = match cfg.mode {
        Mode::Optimal => Some(DistancePairs::new(&p.ps)?),
        _ => None,
    };
    let root = p.ps.root();
    let family_size = root.size();
    let mut run = Runner {
        p,
        cfg,
        start: Instant::now(),
        stack: vec![(root, false)],
        iterations: 0,
        decided: 0,
        decided_size: 0.0,
        explored: BigUint::zero(),
        ces: 0,
        ce_conflicts: 0,
        root_atoms: Vec::new(),
        witness: None,
        sat: SatisfyingSet::default(),
        pairs,
        best: None,
    };
    let mut limit_hit = false;
    while let Some((node, known_sat)) = run.stack.pop() {
        if run.limit_reached() {
            run.stack.push((node, known_sat));
            limit_hit = true;
            break;
        }
        run.iterations += 1;
        if let (Some(pairs), Some((best, _))) = (&run.pairs, &run.best) {
            if pairs.bound(&node) <= *best {
                run.decide(&node);
                continue;
            }
        }
        if known_sat {
            run.optimal_sat(node)?;
            continue;
        }
        if let Flow::Stop = run.process(node)? {
            break;
        }
    }
    let verdict = match cfg.mode {
        Mode::Feasibility if run.witness.is_some() => Verdict::Feasible,
        _ if limit_hit => Verdict::Unknown,
        Mode::Feasibility => Verdict::Unfeasible,
        Mode::Complete if run.sat.is_empty() => Verdict::Unfeasible,
        Mode::Optimal if run.best.is_none() => Verdict::Unfeasible,
        _ => Verdict::Feasible,
    };
    let witness = match cfg.mode {
        Mode::Feasibility => run.witness.clone(),
        Mode::Complete => run.sat.singletons.first().cloned().or_else(|| run.sat.nodes.first().map(|n| n.first())),
        Mode::Optimal => run.best.as_ref().map(|(_, r)| r.clone()),
    };
    let controllers = witness.as_ref().map(|r| p.ps.induce(r)).unwrap_or_default();
    let stats = Stats {
        explored_fraction: explored_fraction(&run.explored, &family_size),
        family_size,
        mdp_states: p.m.state_count(),
        iterations: run.iterations,
        decided_families: run.decided,
        avg_decided_size: if run.decided == 0 { 0.0 } else { run.decided_size / run.decided as f64 },
        explored: run.explored.clone(),
        wall_time: run.start.elapsed(),
        counterexamples: run.ces,
        avg_conflict_size: if run.ces == 0 { 0.0 } else { run.ce_conflicts as f64 / run.ces as f64 },
        root_atoms: run.root_atoms.clone(),
        limit_hit,
    };
    Ok(SynthesisOutcome {
        verdict,
        mode: cfg.mode,
        method: cfg.method,
        witness,
        controllers,
        satisfying: (cfg.mode == Mode::Complete).then_some(run.sat),
        optimum: run.best.map(|(d, _)| d),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mdp;
    use crate::textio::spec_file::parse_spec;

    /// Two decision states with actions alpha (0) and beta (1); target 2.
    fn notes_mdp() -> Mdp {
        Mdp::from_rows(vec![
            vec![vec![(2, 0.7), (3, 0.3)], vec![(1, 0.5), (3, 0.5)]],
            vec![vec![(2, 0.8), (3, 0.2)], vec![(2, 0.4), (3, 0.6)]],
            vec![vec![(2, 1.0)]],
            vec![vec![(3, 1.0)]],
        ])
        .unwrap()
        .with_label("goal", &[2])
        .unwrap()
    }

    fn problem(spec: &str) -> Problem {
        Problem::new(notes_mdp(), parse_spec(spec).unwrap(), None).unwrap()
    }

    #[test]
    fn finds_the_only_member() {
        let p = problem("exists c : forall x in {0, 1}[c] : P(x, F goal) <= 0.6");
        for method in [Method::Ar, Method::Hybrid, Method::Oracle] {
            let cfg = SynthConfig { method, ..Default::default() };
            let out = synthesize(&p, &cfg).unwrap();
            assert_eq!(out.verdict, Verdict::Feasible);
            assert_eq!(out.controllers[0].choice[..2], [1, 1]);
        }
    }

    #[test]
    fn unfeasible_explores_everything() {
        let p = problem("exists c : forall x in {0, 1}[c] : P(x, F goal) <= 0.1");
        for method in [Method::Ar, Method::Hybrid] {
            let out = synthesize(&p, &SynthConfig { method, ..Default::default() }).unwrap();
            assert_eq!(out.verdict, Verdict::Unfeasible);
            assert_eq!(out.stats.explored_fraction, 1.0);
        }
    }

    #[test]
    fn complete_matches_oracle() {
        let p = problem("exists c : exists x in {0, 1}[c] : P(x, F goal) >= 0.5");
        let cfg = SynthConfig { mode: Mode::Complete, ..Default::default() };
        let ar = synthesize(&p, &cfg).unwrap();
        let or = synthesize(&p, &SynthConfig { method: Method::Oracle, ..cfg }).unwrap();
        assert_eq!(ar.satisfying.unwrap().members(), or.satisfying.unwrap().members());
    }

    #[test]
    fn iteration_limit_gives_unknown() {
        let p = problem("exists c : exists x in {0, 1}[c] : P(x, F goal) >= 0.5");
        let limits = Limits { max_iters: Some(1), time_limit: None };
        let cfg = SynthConfig { mode: Mode::Complete, limits, ..Default::default() };
        let out = synthesize(&p, &cfg).unwrap();
        assert_eq!(out.verdict, Verdict::Unknown);
        assert!(out.stats.limit_hit);
    }
}
