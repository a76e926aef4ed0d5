//! Scheduling of two threads whose observable outcome depends on a secret.
//!
//! State `A_h` holds the secret `h`. The scheduler either lets the first
//! thread count the secret down (`t1`, to `A_{h-1}`, or to `C` at zero) or
//! hands over to the second thread (`t2`, to `B_h`), which counts down
//! deterministically and ends in `L2`. `C` ends in `L1`. The question is
//! whether some scheduler lets an observer of `l1` distinguish two secrets.

use crate::error::Error;
use crate::generators::Generated;
use crate::model::{Mdp, MdpBuilder};
use crate::textio::parse_spec;

pub struct Layout {
    pub h_max: usize,
}

impl Layout {
    pub fn a(&self, h: usize) -> usize {
        h
    }

    pub fn b(&self, h: usize) -> usize {
        self.h_max + 1 + h
    }

    pub fn c(&self) -> usize {
        2 * self.h_max + 2
    }

    pub fn l1(&self) -> usize {
        2 * self.h_max + 3
    }

    pub fn l2(&self) -> usize {
        2 * self.h_max + 4
    }

    pub fn states(&self) -> usize {
        2 * self.h_max + 5
    }
}

pub fn model(h_max: usize) -> Result<Mdp, Error> {
    let l = Layout { h_max };
    let mut b = MdpBuilder::new(l.states());
    for h in 0..=h_max {
        let down = if h == 0 { l.c() } else { l.a(h - 1) };
        b.action(l.a(h), 0, Some("t1".into()))?;
        b.transition(l.a(h), 0, down, 1.0)?;
        b.action(l.a(h), 1, Some("t2".into()))?;
        b.transition(l.a(h), 1, l.b(h), 1.0)?;
        let next = if h == 0 { l.l2() } else { l.b(h - 1) };
        b.action(l.b(h), 0, Some("run".into()))?;
        b.transition(l.b(h), 0, next, 1.0)?;
    }
    for (s, t) in [(l.c(), l.l1()), (l.l1(), l.l1()), (l.l2(), l.l2())] {
        b.action(s, 0, Some("run".into()))?;
        b.transition(s, 0, t, 1.0)?;
    }
    b.label("l1", &[l.l1()])?;
    b.label("l2", &[l.l2()])?;
    Ok(b.build()?)
}

pub fn spec_text(h1: usize, h2: usize) -> String {
    format!("exists c :\n  forall x in {{{h1}}}[c], forall y in {{{h2}}}[c] :\n    !(P(x, F l1) = P(y, F l1))\n")
}

pub fn generate(h1: usize, h2: usize) -> Result<Generated, Error> {
    if h1 == h2 {
        return Err(Error::Generator("the two secrets must differ".into()));
    }
    let model = model(h1.max(h2))?;
    Ok(Generated { model, spec: parse_spec(&spec_text(h1, h2))?, controllers: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let m = model(20).unwrap();
        assert_eq!(m.state_count(), 45);
        let choices: usize = (0..m.state_count()).filter(|&s| m.actions(s).len() > 1).count();
        assert_eq!(choices, 21);
    }
}
