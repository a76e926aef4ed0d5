//! Ground formulas: quantifier instantiation and canonical comparisons.
//!
//! Every atom is rewritten into comparisons of the form `A <= B + c` or
//! `A < B + c` where each side is a term (a reachability probability or an
//! expected reward from a concrete state under a controller slot) or zero.
//! `=` becomes a conjunction of two `<=` comparisons and negation is pushed
//! down to the comparisons, so ground formulas are negation-free.

use std::collections::HashMap;
use std::fmt;

use crate::textio::spec::{AtomKind, HyperSpec, Operand, Prob, ProbAtom, Quantifier, Rel, Rhs, DEFAULT_EQ_EPS};

/// Absolute slack of floating-point comparisons: `<=` accepts up to this
/// much excess, `<` requires this much margin.
pub const CMP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub kind: AtomKind,
    pub state: usize,
    pub target: String,
    pub slot: usize,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = if self.kind == AtomKind::Reach { "P" } else { "R" };
        write!(f, "{k}[{}]({}, F {})", self.slot, self.state, self.target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cmp {
    pub lhs: Option<usize>,
    pub rhs: Option<usize>,
    pub c: f64,
    pub strict: bool,
}

impl Cmp {
    pub fn negate(&self) -> Cmp {
        Cmp { lhs: self.rhs, rhs: self.lhs, c: norm_zero(-self.c), strict: !self.strict }
    }

    /// Evaluates the comparison on side values (zero for absent sides).
    pub fn holds_on(&self, a: f64, b: f64) -> bool {
        cmp_holds(a, b, self.c, self.strict)
    }

    pub fn holds(&self, term_values: &[f64]) -> bool {
        let a = self.lhs.map_or(0.0, |t| term_values[t]);
        let b = self.rhs.map_or(0.0, |t| term_values[t]);
        self.holds_on(a, b)
    }
}

/// `a <= b + c` with slack, or `a < b + c` with margin.
pub fn cmp_holds(a: f64, b: f64, c: f64, strict: bool) -> bool {
    let r = b + c;
    if strict {
        a < r - CMP_SLACK
    } else {
        a <= r + CMP_SLACK
    }
}

fn norm_zero(c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Cmp(usize),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    fn and(v: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in v {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(w) => out.extend(w),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    fn or(v: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in v {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(w) => out.extend(w),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Replaces decided comparisons by constants and simplifies.
    pub fn substitute(&self, truth: &impl Fn(usize) -> Option<bool>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Cmp(i) => match truth(*i) {
                Some(true) => Formula::True,
                Some(false) => Formula::False,
                None => Formula::Cmp(*i),
            },
            Formula::And(v) => Formula::and(v.iter().map(|f| f.substitute(truth)).collect()),
            Formula::Or(v) => Formula::or(v.iter().map(|f| f.substitute(truth)).collect()),
        }
    }

    pub fn eval(&self, truth: &impl Fn(usize) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Cmp(i) => truth(*i),
            Formula::And(v) => v.iter().all(|f| f.eval(truth)),
            Formula::Or(v) => v.iter().any(|f| f.eval(truth)),
        }
    }

    /// Comparison indices in first-occurrence order.
    pub fn cmp_order(&self) -> Vec<usize> {
        fn go(f: &Formula, out: &mut Vec<usize>) {
            match f {
                Formula::Cmp(i) => {
                    if !out.contains(i) {
                        out.push(*i)
                    }
                }
                Formula::And(v) | Formula::Or(v) => v.iter().for_each(|g| go(g, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instantiated {
    pub terms: Vec<Term>,
    pub cmps: Vec<Cmp>,
    pub root: Formula,
    pub controllers: usize,
}

impl Instantiated {
    pub fn describe_cmp(&self, i: usize) -> String {
        let c = &self.cmps[i];
        let side = |t: Option<usize>| t.map_or("0".to_string(), |t| self.terms[t].to_string());
        let op = if c.strict { "<" } else { "<=" };
        if c.c == 0.0 {
            format!("{} {op} {}", side(c.lhs), side(c.rhs))
        } else if c.rhs.is_none() {
            format!("{} {op} {}", side(c.lhs), c.c)
        } else {
            format!("{} {op} {} + {}", side(c.lhs), side(c.rhs), c.c)
        }
    }

    /// Evaluates the formula on term values.
    pub fn holds(&self, term_values: &[f64]) -> bool {
        self.root.eval(&|i| self.cmps[i].holds(term_values))
    }
}

struct Builder<'a> {
    spec: &'a HyperSpec,
    eps_override: Option<f64>,
    terms: Vec<Term>,
    term_ix: HashMap<Term, usize>,
    cmps: Vec<Cmp>,
    cmp_ix: HashMap<(Option<usize>, Option<usize>, u64, bool), usize>,
}

impl Builder<'_> {
    fn term(&mut self, kind: AtomKind, o: &Operand, env: &HashMap<&str, usize>) -> usize {
        let q = self.spec.quant(&o.var).expect("validated spec");
        let slot = self.spec.controller_index(&q.controller).expect("validated spec");
        let t = Term { kind, state: env[o.var.as_str()], target: o.target.clone(), slot };
        if let Some(&i) = self.term_ix.get(&t) {
            return i;
        }
        self.terms.push(t.clone());
        self.term_ix.insert(t, self.terms.len() - 1);
        self.terms.len() - 1
    }

    fn cmp(&mut self, c: Cmp) -> Formula {
        let key = (c.lhs, c.rhs, c.c.to_bits(), c.strict);
        if let Some(&i) = self.cmp_ix.get(&key) {
            return Formula::Cmp(i);
        }
        self.cmps.push(c);
        self.cmp_ix.insert(key, self.cmps.len() - 1);
        Formula::Cmp(self.cmps.len() - 1)
    }

    fn atom(&mut self, a: &ProbAtom, env: &HashMap<&str, usize>, positive: bool) -> Formula {
        let l = Some(self.term(a.kind, &a.left, env));
        let (r, k) = match &a.right {
            Rhs::Const(v) => (None, *v),
            Rhs::Operand(o) => (Some(self.term(a.kind, o, env)), 0.0),
        };
        // l REL r + k
        let le = |x: Option<usize>, y: Option<usize>, c: f64| Cmp { lhs: x, rhs: y, c: norm_zero(c), strict: false };
        let lt = |x: Option<usize>, y: Option<usize>, c: f64| Cmp { lhs: x, rhs: y, c: norm_zero(c), strict: true };
        let parts = match a.rel {
            Rel::Le => vec![le(l, r, k)],
            Rel::Lt => vec![lt(l, r, k)],
            Rel::Ge => vec![le(r, l, -k)],
            Rel::Gt => vec![lt(r, l, -k)],
            Rel::Eq => {
                let eps = a.eps.or(self.eps_override).unwrap_or(DEFAULT_EQ_EPS);
                vec![le(l, r, k + eps), le(r, l, -k + eps)]
            }
        };
        if positive {
            let v = parts.into_iter().map(|c| self.cmp(c)).collect();
            Formula::and(v)
        } else {
            let v = parts.into_iter().map(|c| self.cmp(c.negate())).collect();
            Formula::or(v)
        }
    }

    fn prob(&mut self, p: &Prob, env: &HashMap<&str, usize>, positive: bool) -> Formula {
        match p {
            Prob::True => if positive { Formula::True } else { Formula::False },
            Prob::False => if positive { Formula::False } else { Formula::True },
            Prob::Atom(a) => self.atom(a, env, positive),
            Prob::Not(q) => self.prob(q, env, !positive),
            Prob::And(v) | Prob::Or(v) => {
                let parts: Vec<Formula> = v.iter().map(|q| self.prob(q, env, positive)).collect();
                if matches!(p, Prob::And(_)) == positive {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
        }
    }

    fn quants<'s>(&mut self, i: usize, env: &mut HashMap<&'s str, usize>, spec: &'s HyperSpec) -> Formula {
        if i == spec.quants.len() {
            return self.prob(&spec.prob, env, true);
        }
        let q = &spec.quants[i];
        let mut parts = Vec::with_capacity(q.domain.len());
        for &s in &q.domain {
            env.insert(q.var.as_str(), s);
            parts.push(self.quants(i + 1, env, spec));
        }
        env.remove(q.var.as_str());
        match q.quantifier {
            Quantifier::Forall => Formula::and(parts),
            Quantifier::Exists => Formula::or(parts),
        }
    }
}

/// Expands state quantifiers: a universal quantifier becomes a conjunction
/// over its domain, an existential one a disjunction.
///
/// `eps_override` replaces the default tolerance of `=` atoms that carry no
/// explicit tolerance.
pub fn instantiate(spec: &HyperSpec, eps_override: Option<f64>) -> Instantiated {
    let mut b = Builder {
        spec,
        eps_override,
        terms: Vec::new(),
        term_ix: HashMap::new(),
        cmps: Vec::new(),
        cmp_ix: HashMap::new(),
    };
    let mut env = HashMap::new();
    let root = b.quants(0, &mut env, spec);
    Instantiated { terms: b.terms, cmps: b.cmps, root, controllers: spec.controllers.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::spec_file::parse_spec;

    #[test]
    fn singleton_exists_is_substitution() {
        let s = parse_spec("exists c : exists x in {3}[c] : P(x, F t) <= 0.4").unwrap();
        let f = instantiate(&s, None);
        assert_eq!(f.terms, vec![Term { kind: AtomKind::Reach, state: 3, target: "t".into(), slot: 0 }]);
        assert_eq!(f.cmps, vec![Cmp { lhs: Some(0), rhs: None, c: 0.4, strict: false }]);
        assert_eq!(f.root, Formula::Cmp(0));
    }

    #[test]
    fn forall_over_two_states_truth_table() {
        let s = parse_spec("exists c : forall x in {1, 2}[c] : P(x, F t) > 0.5").unwrap();
        let f = instantiate(&s, None);
        assert_eq!(f.terms.len(), 2);
        for (v1, v2) in [(0.2, 0.2), (0.2, 0.9), (0.9, 0.2), (0.9, 0.9)] {
            let expect = v1 > 0.5 && v2 > 0.5;
            assert_eq!(f.holds(&[v1, v2]), expect);
        }
        let s = parse_spec("exists c : exists x in {1, 2}[c] : P(x, F t) > 0.5").unwrap();
        let f = instantiate(&s, None);
        for (v1, v2) in [(0.2, 0.2), (0.2, 0.9), (0.9, 0.2), (0.9, 0.9)] {
            assert_eq!(f.holds(&[v1, v2]), v1 > 0.5 || v2 > 0.5);
        }
    }

    #[test]
    fn two_controllers_two_quantifiers() {
        let s = parse_spec(
            "exists a, b : forall x in {0}[a], forall y in {4}[b] : P(x, F t) = P(y, F t) ~0.01 & P(x, F t) >= 0.3",
        )
        .unwrap();
        let f = instantiate(&s, None);
        assert_eq!(f.terms[0].slot, 0);
        assert_eq!(f.terms[1].slot, 1);
        assert_eq!(f.cmps.len(), 3);
        assert!(f.holds(&[0.5, 0.505]));
        assert!(!f.holds(&[0.5, 0.52]));
        assert!(!f.holds(&[0.2, 0.2]));
    }

    #[test]
    fn negation_flips_comparisons() {
        let s = parse_spec("exists c : forall x in {0}[c], forall y in {1}[c] : !(P(x, F t) <= P(y, F t))").unwrap();
        let f = instantiate(&s, None);
        assert_eq!(f.cmps[0], Cmp { lhs: Some(1), rhs: Some(0), c: 0.0, strict: true });
        assert!(f.holds(&[0.6, 0.5]));
        assert!(!f.holds(&[0.5, 0.5]));
    }

    #[test]
    fn infinite_rewards_compare() {
        let inf = f64::INFINITY;
        assert!(cmp_holds(inf, inf, 0.1, false));
        assert!(!cmp_holds(inf, inf, 0.1, true));
        assert!(!cmp_holds(inf, 3.0, 0.0, false));
        assert!(cmp_holds(3.0, inf, -1.0, true));
    }
}
