//! Abstract syntax of hyperspecifications.

use std::collections::BTreeSet;

use crate::error::SpecError;
use crate::model::Mdp;

/// Default tolerance of `=` comparisons.
pub const DEFAULT_EQ_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// All listed controllers take the same action in `state`.
    Same { state: usize, controllers: Vec<String> },
    /// The controller takes the same action in all listed states.
    Obs { states: Vec<usize>, controller: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateQuant {
    pub quantifier: Quantifier,
    pub var: String,
    pub domain: Vec<usize>,
    pub controller: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    Reach,
    Reward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operand {
    pub var: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Const(f64),
    Operand(Operand),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbAtom {
    pub kind: AtomKind,
    pub left: Operand,
    pub rel: Rel,
    pub right: Rhs,
    /// Tolerance of `=`; `None` means the default.
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prob {
    True,
    False,
    Atom(ProbAtom),
    Not(Box<Prob>),
    And(Vec<Prob>),
    Or(Vec<Prob>),
}

impl Prob {
    pub fn atoms(&self) -> Vec<&ProbAtom> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Prob, out: &mut Vec<&'a ProbAtom>) {
            match p {
                Prob::Atom(a) => out.push(a),
                Prob::Not(q) => go(q, out),
                Prob::And(v) | Prob::Or(v) => v.iter().for_each(|q| go(q, out)),
                Prob::True | Prob::False => {}
            }
        }
        go(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperSpec {
    pub controllers: Vec<String>,
    pub struc: Vec<Constraint>,
    pub quants: Vec<StateQuant>,
    pub prob: Prob,
}

impl HyperSpec {
    pub fn controller_index(&self, name: &str) -> Option<usize> {
        self.controllers.iter().position(|c| c == name)
    }

    pub fn quant(&self, var: &str) -> Option<&StateQuant> {
        self.quants.iter().find(|q| q.var == var)
    }

    /// Checks the model-independent invariants.
    pub fn validate(&self) -> Result<(), SpecError> {
        let mut seen = BTreeSet::new();
        for c in &self.controllers {
            if !seen.insert(c.as_str()) {
                return Err(SpecError::DuplicateController(c.clone()));
            }
        }
        let declared = |name: &str| {
            if seen.contains(name) {
                Ok(())
            } else {
                Err(SpecError::UndeclaredController(name.to_string()))
            }
        };
        for c in &self.struc {
            match c {
                Constraint::Same { controllers, .. } => {
                    if controllers.is_empty() {
                        return Err(SpecError::EmptyDomain("same".into()));
                    }
                    for n in controllers {
                        declared(n)?;
                    }
                }
                Constraint::Obs { states, controller } => {
                    if states.is_empty() {
                        return Err(SpecError::EmptyDomain("obs".into()));
                    }
                    declared(controller)?;
                }
            }
        }
        let mut vars = BTreeSet::new();
        for q in &self.quants {
            declared(&q.controller)?;
            if !vars.insert(q.var.as_str()) {
                return Err(SpecError::DuplicateVariable(q.var.clone()));
            }
            if q.domain.is_empty() {
                return Err(SpecError::EmptyDomain(q.var.clone()));
            }
        }
        for a in self.prob.atoms() {
            let operands = std::iter::once(&a.left).chain(match &a.right {
                Rhs::Operand(o) => Some(o),
                Rhs::Const(_) => None,
            });
            for o in operands {
                if !vars.contains(o.var.as_str()) {
                    return Err(SpecError::UndeclaredVariable(o.var.clone()));
                }
            }
            if let Rhs::Const(v) = a.right {
                let ok = match a.kind {
                    AtomKind::Reach => (0.0..=1.0).contains(&v),
                    AtomKind::Reward => v >= 0.0 && v.is_finite(),
                };
                if !ok {
                    return Err(SpecError::BadBound(v));
                }
            }
            if let Some(e) = a.eps {
                if !(e >= 0.0 && e.is_finite()) {
                    return Err(SpecError::BadBound(e));
                }
            }
        }
        Ok(())
    }

    /// Checks the spec against a concrete model.
    pub fn validate_for(&self, m: &Mdp) -> Result<(), SpecError> {
        self.validate()?;
        let n = m.state_count();
        let in_range = |s: usize| {
            if s < n {
                Ok(())
            } else {
                Err(SpecError::StateOutOfRange { state: s, count: n })
            }
        };
        for c in &self.struc {
            match c {
                Constraint::Same { state, .. } => in_range(*state)?,
                Constraint::Obs { states, .. } => states.iter().try_for_each(|&s| in_range(s))?,
            }
        }
        for q in &self.quants {
            q.domain.iter().try_for_each(|&s| in_range(s))?;
        }
        for a in self.prob.atoms() {
            if a.kind == AtomKind::Reward && !m.has_rewards() {
                return Err(crate::error::ModelError::MissingRewards.into());
            }
            let operands = std::iter::once(&a.left).chain(match &a.right {
                Rhs::Operand(o) => Some(o),
                Rhs::Const(_) => None,
            });
            for o in operands {
                let t = m.target(&o.target)?;
                if a.kind == AtomKind::Reward && t.is_empty() {
                    return Err(crate::error::ModelError::EmptyTarget(o.target.clone()).into());
                }
            }
        }
        Ok(())
    }
}
