//! Timing side channel of an `n`-bit secret.
//!
//! State `(h, i, t)` holds the secret `h`, the number `i` of processed bits
//! and the elapsed time `t`. Processing a bit either computes directly,
//! which takes one time unit with probability 1/2 if the bit is set and
//! none otherwise, or computes blinded, which takes one time unit with
//! probability 1/2 whatever the bit. The scheduler only sees `(i, t)`.
//! When all bits are processed the time is observable through the labels
//! `time0 .. timeN`. A counterexample to timing security is a scheduler
//! under which two secrets yield different time distributions.

use crate::error::Error;
use crate::generators::Generated;
use crate::model::{Mdp, MdpBuilder};
use crate::textio::parse_spec;

/// Largest number of secret bits.
pub const MAX_BITS: usize = 8;

pub struct Layout {
    pub bits: usize,
}

impl Layout {
    pub fn state(&self, h: usize, i: usize, t: usize) -> usize {
        let w = self.bits + 1;
        (h * w + i) * w + t
    }

    pub fn secrets(&self) -> usize {
        1 << self.bits
    }

    pub fn states(&self) -> usize {
        self.secrets() * (self.bits + 1) * (self.bits + 1)
    }
}

pub fn model(bits: usize) -> Result<Mdp, Error> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::Generator(format!("bits must be in 1..={MAX_BITS}, got {bits}")));
    }
    let l = Layout { bits };
    let mut b = MdpBuilder::new(l.states());
    for h in 0..l.secrets() {
        for i in 0..=bits {
            for t in 0..=bits {
                let s = l.state(h, i, t);
                if i == bits || t == bits {
                    let next = if i == bits { s } else { l.state(h, i + 1, t) };
                    b.action(s, 0, Some("done".into()))?;
                    b.transition(s, 0, next, 1.0)?;
                    if i < bits {
                        b.action(s, 1, Some("blind".into()))?;
                        b.transition(s, 1, next, 1.0)?;
                    }
                    continue;
                }
                let (stay, tick) = (l.state(h, i + 1, t), l.state(h, i + 1, t + 1));
                b.action(s, 0, Some("compute".into()))?;
                if h >> i & 1 == 1 {
                    b.transition(s, 0, stay, 0.5)?;
                    b.transition(s, 0, tick, 0.5)?;
                } else {
                    b.transition(s, 0, stay, 1.0)?;
                }
                b.action(s, 1, Some("blind".into()))?;
                b.transition(s, 1, stay, 0.5)?;
                b.transition(s, 1, tick, 0.5)?;
            }
        }
    }
    for t in 0..=bits {
        let done: Vec<usize> = (0..l.secrets()).map(|h| l.state(h, bits, t)).collect();
        b.label(&format!("time{t}"), &done)?;
    }
    Ok(b.build()?)
}

fn set(v: impl Iterator<Item = usize>) -> String {
    let items: Vec<String> = v.map(|s| s.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn spec_text(bits: usize) -> String {
    let l = Layout { bits };
    let obs: Vec<String> = (0..bits)
        .flat_map(|i| (0..=bits).map(move |t| (i, t)))
        .map(|(i, t)| format!("obs({}, c)", set((0..l.secrets()).map(|h| l.state(h, i, t)))))
        .collect();
    let inits = set((0..l.secrets()).map(|h| l.state(h, 0, 0)));
    let leaks: Vec<String> = (0..=bits).map(|t| format!("!(P(x, F time{t}) = P(y, F time{t}))")).collect();
    format!(
        "exists c :\n  {} ;\n  exists x in {inits}[c], exists y in {inits}[c] :\n    {}\n",
        obs.join("\n  & "),
        leaks.join("\n    | ")
    )
}

pub fn generate(bits: usize) -> Result<Generated, Error> {
    let model = model(bits)?;
    Ok(Generated { model, spec: parse_spec(&spec_text(bits))?, controllers: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::ParameterSpace;

    #[test]
    fn family_has_one_choice_per_observation() {
        let g = generate(2).unwrap();
        assert_eq!(g.model.state_count(), 4 * 9);
        let ps = ParameterSpace::from_spec(&g.model, &g.spec).unwrap();
        assert_eq!(ps.family_size(), 2u32.pow(6).into());
    }
}
