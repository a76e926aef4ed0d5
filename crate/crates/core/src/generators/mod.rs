//! Benchmark generators. Every generator is a pure function of its
//! parameters and seed.

pub mod knuth_yao;
pub mod maze;
pub mod notes;
pub mod random;
pub mod thread_scheduling;
pub mod timing_attack;

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::Error;
use crate::model::{Controller, Mdp};
use crate::textio::spec::HyperSpec;

/// A model, its specification and reference controllers, if any.
#[derive(Debug, Clone)]
pub struct Generated {
    pub model: Mdp,
    pub spec: HyperSpec,
    pub controllers: Vec<Controller>,
}

pub const IDS: &[&str] = &[
    "maze-sd",
    "maze-noninterference",
    "maze-opacity",
    "knuth-yao-pc",
    "timing-attack",
    "thread-scheduling",
    "notes",
    "random",
];

/// Typed access to `key=value` parameters; every key must be consumed.
pub struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    pub fn new(map: BTreeMap<String, String>) -> Params {
        Params { map }
    }

    pub fn parse(items: &[String]) -> Result<Params, Error> {
        let mut map = BTreeMap::new();
        for it in items {
            let (k, v) = it
                .split_once('=')
                .ok_or_else(|| Error::Generator(format!("parameter `{it}` is not of the form key=value")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Generator(format!("parameter `{k}` given twice")));
            }
        }
        Ok(Params { map })
    }

    pub fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, Error> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Generator(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn finish(self) -> Result<(), Error> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::Generator(format!("unknown parameter `{k}`"))),
        }
    }
}

fn layout(p: &mut Params, default: &[&str], seed: u64) -> Result<Vec<String>, Error> {
    let name: String = p.get("layout", "default".to_string())?;
    match name.as_str() {
        "default" => Ok(default.iter().map(|s| s.to_string()).collect()),
        "simple" => Ok(maze::SIMPLE.iter().map(|s| s.to_string()).collect()),
        "larger" => Ok(maze::LARGER.iter().map(|s| s.to_string()).collect()),
        "random" => {
            let (h, w) = (p.get("height", 4)?, p.get("width", 4)?);
            maze::random_layout(h, w, p.get("walls", 0.2)?, p.get("traps", 0.1)?, seed)
        }
        rows => Ok(rows.split('/').map(str::to_string).collect()),
    }
}

/// Runs generator `id`.
pub fn generate(id: &str, mut p: Params, seed: u64) -> Result<Generated, Error> {
    let g = match id {
        "knuth-yao-pc" => knuth_yao::generate(p.get("stages", 1)?)?,
        "maze-sd" => {
            let rows = layout(&mut p, &maze::SIMPLE, seed)?;
            let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
            maze::sd(&rows, p.get("slip", 0.2)?)?
        }
        "maze-noninterference" | "maze-opacity" => {
            let rows = layout(&mut p, &maze::LARGER, seed)?;
            let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
            let (slip, error) = (p.get("slip", 0.1)?, p.get("error", 0.05)?);
            let (lambda, eps) = (p.get("lambda", 0.0)?, p.get("eps", 0.01)?);
            if id == "maze-opacity" {
                maze::opacity(&rows, slip, error, lambda, eps)?
            } else {
                maze::noninterference(&rows, slip, error, lambda, eps)?
            }
        }
        "timing-attack" => timing_attack::generate(p.get("bits", 2)?)?,
        "thread-scheduling" => thread_scheduling::generate(p.get("h1", 10)?, p.get("h2", 20)?)?,
        "notes" => notes::generate()?,
        "random" => {
            let d = random::Shape::default();
            let shape = random::Shape {
                max_states: p.get("states", d.max_states)?,
                max_actions: p.get("actions", d.max_actions)?,
                max_params: p.get("params", d.max_params)?,
                rewards: p.get("rewards", d.rewards)?,
            };
            random::instance(seed, &shape)?
        }
        _ => return Err(Error::Generator(format!("unknown generator `{id}`; known: {}", IDS.join(", ")))),
    };
    p.finish()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_ids_and_parameters_are_rejected() {
        assert!(generate("nope", Params::new(BTreeMap::new()), 0).is_err());
        let p = Params::parse(&["colour=red".to_string()]).unwrap();
        assert!(generate("notes", p, 0).is_err());
        assert!(Params::parse(&["stages".to_string()]).is_err());
    }

    #[test]
    fn every_id_generates_with_defaults() {
        for id in IDS {
            let g = generate(id, Params::new(BTreeMap::new()), 1).unwrap();
            g.spec.validate_for(&g.model).unwrap();
        }
    }
}
