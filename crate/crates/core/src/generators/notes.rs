//! Four-member example: two choice states, each with actions `alpha` and
//! `beta`. Only the controller picking `beta` in both keeps the probability
//! of reaching the goal at most 0.6 from both states.

use crate::error::Error;
use crate::generators::Generated;
use crate::model::{Mdp, MdpBuilder};
use crate::textio::parse_spec;

pub const SPEC: &str = "exists c :\n  forall x in {0, 1}[c] :\n    P(x, F goal) <= 0.6\n";

pub fn model() -> Result<Mdp, Error> {
    let mut b = MdpBuilder::new(4);
    let rows: [(usize, usize, &str, [(usize, f64); 2]); 4] = [
        (0, 0, "alpha", [(2, 0.7), (3, 0.3)]),
        (0, 1, "beta", [(1, 0.5), (3, 0.5)]),
        (1, 0, "alpha", [(2, 0.8), (3, 0.2)]),
        (1, 1, "beta", [(2, 0.4), (3, 0.6)]),
    ];
    for (s, a, name, succ) in rows {
        b.action(s, a, Some(name.into()))?;
        for (t, p) in succ {
            b.transition(s, a, t, p)?;
        }
    }
    for s in [2, 3] {
        b.action(s, 0, Some("stay".into()))?;
        b.transition(s, 0, s, 1.0)?;
    }
    b.label("goal", &[2])?;
    Ok(b.build()?)
}

pub fn generate() -> Result<Generated, Error> {
    Ok(Generated { model: model()?, spec: parse_spec(SPEC)?, controllers: Vec::new() })
}
