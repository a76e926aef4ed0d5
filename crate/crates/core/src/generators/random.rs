//! Small random models and specifications for cross-checking.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::family::ParameterSpace;
use crate::generators::Generated;
use crate::model::{Mc, Mdp, MdpBuilder};
use crate::textio::parse_spec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub max_states: usize,
    pub max_actions: usize,
    /// Largest number of family parameters with more than one value.
    pub max_params: usize,
    pub rewards: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_states: 8, max_actions: 3, max_params: 3, rewards: true }
    }
}

/// Distribution over 1 to 3 distinct successors with weights in 1..=4.
fn distribution(rng: &mut impl Rng, n: usize) -> Vec<(usize, f64)> {
    let k = rng.random_range(1..=3.min(n));
    let mut targets: Vec<usize> = (0..n).collect();
    let (picked, _) = targets.partial_shuffle(rng, k);
    let mut picked = picked.to_vec();
    picked.sort_unstable();
    let weights: Vec<u32> = picked.iter().map(|_| rng.random_range(1..=4)).collect();
    let total: u32 = weights.iter().sum();
    picked.into_iter().zip(weights).map(|(t, w)| (t, f64::from(w) / f64::from(total))).collect()
}

/// A random MDP with `n` states; state `s` gets `menus[s]` actions with ids
/// `0..menus[s]`. Labels `t` and `u` are random nonempty state sets.
pub fn mdp_with_menus(rng: &mut impl Rng, menus: &[usize], rewards: bool) -> Result<Mdp, Error> {
    let n = menus.len();
    let mut b = MdpBuilder::new(n);
    for (s, &k) in menus.iter().enumerate() {
        for a in 0..k {
            b.action(s, a, None)?;
            for (t, p) in distribution(rng, n) {
                b.transition(s, a, t, p)?;
            }
            if rewards {
                b.reward(s, a, f64::from(rng.random_range(0..=3u32)))?;
            }
        }
    }
    for name in ["t", "u"] {
        let k = rng.random_range(1..=2.min(n));
        let states: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
        b.label(name, &states)?;
    }
    if rewards {
        b.enable_rewards();
    }
    Ok(b.build()?)
}

pub fn mdp(rng: &mut impl Rng, n: usize, max_actions: usize, rewards: bool) -> Result<Mdp, Error> {
    let menus: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_actions.max(1))).collect();
    mdp_with_menus(rng, &menus, rewards)
}

pub fn mc(rng: &mut impl Rng, n: usize) -> Mc {
    let m = mdp_with_menus(rng, &vec![1; n], false).expect("random rows are distributions");
    Mc::new(m).expect("one action per state")
}

fn set(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn subset(rng: &mut impl Rng, n: usize, max: usize) -> Vec<usize> {
    let k = rng.random_range(1..=max.min(n));
    let mut v: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    v.sort_unstable();
    v
}

fn target(rng: &mut impl Rng) -> &'static str {
    if rng.random_bool(0.5) {
        "t"
    } else {
        "u"
    }
}

fn atom(rng: &mut impl Rng, vars: &[String], rewards: bool) -> String {
    let reward = rewards && rng.random_bool(0.3);
    let op = if reward { "R" } else { "P" };
    let lhs = format!("{op}({}, F {})", vars.choose(rng).unwrap(), target(rng));
    let rel = ["<", "<=", "=", ">", ">="].choose(rng).unwrap();
    let rhs = if rng.random_bool(0.5) {
        format!("{op}({}, F {})", vars.choose(rng).unwrap(), target(rng))
    } else if reward {
        format!("{}", rng.random_range(0..=8u32))
    } else {
        format!("{}", f64::from(rng.random_range(0..=8u32)) / 8.0)
    };
    let eps = if *rel == "=" && rng.random_bool(0.5) { " ~0.05" } else { "" };
    format!("{lhs} {rel} {rhs}{eps}")
}

fn formula(rng: &mut impl Rng, vars: &[String], rewards: bool, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.4) {
        return atom(rng, vars, rewards);
    }
    match rng.random_range(0..3) {
        0 => format!("!({})", formula(rng, vars, rewards, depth - 1)),
        1 => format!("({}) & ({})", formula(rng, vars, rewards, depth - 1), formula(rng, vars, rewards, depth - 1)),
        _ => format!("({}) | ({})", formula(rng, vars, rewards, depth - 1), formula(rng, vars, rewards, depth - 1)),
    }
}

/// Spec text over the given model.
pub fn spec_text(rng: &mut impl Rng, m: &Mdp, rewards: bool) -> String {
    let n = m.state_count();
    let controllers: Vec<&str> = if rng.random_bool(0.5) { vec!["c"] } else { vec!["c", "d"] };
    let mut struc = Vec::new();
    if controllers.len() == 2 && rng.random_bool(0.5) {
        struc.push(format!("same({}, {{c, d}})", rng.random_range(0..n)));
    }
    if rng.random_bool(0.4) {
        let s = rng.random_range(0..n);
        let same_menu: Vec<usize> =
            (0..n).filter(|&t| t != s && m.actions(t).len() == m.actions(s).len()).collect();
        if let Some(&t) = same_menu.choose(rng) {
            struc.push(format!("obs({}, {})", set(&[s.min(t), s.max(t)]), controllers.choose(rng).unwrap()));
        }
    }
    let nvars = rng.random_range(1..=2);
    let vars: Vec<String> = ["x", "y"][..nvars].iter().map(|v| v.to_string()).collect();
    let quants: Vec<String> = vars
        .iter()
        .map(|v| {
            let q = if rng.random_bool(0.5) { "forall" } else { "exists" };
            format!("{q} {v} in {}[{}]", set(&subset(rng, n, 2)), controllers.choose(rng).unwrap())
        })
        .collect();
    let struc = if struc.is_empty() { String::new() } else { format!(" {} ;", struc.join(" & ")) };
    format!(
        "exists {} :{struc} {} : {}\n",
        controllers.join(", "),
        quants.join(", "),
        formula(rng, &vars, rewards, 2)
    )
}

/// Number of family parameters with more than one value.
pub fn open_params(ps: &ParameterSpace) -> usize {
    (0..ps.len()).filter(|&k| ps.domain(k).len() > 1).count()
}

/// A random instance within `shape`, a pure function of the seed.
pub fn instance(seed: u64, shape: &Shape) -> Result<Generated, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(2..=shape.max_states.max(2));
        let choice_states = rng.random_range(0..=shape.max_params.min(n));
        let mut menus = vec![1; n];
        for s in (0..n).collect::<Vec<_>>().choose_multiple(&mut rng, choice_states) {
            menus[*s] = rng.random_range(2..=shape.max_actions.max(2));
        }
        let model = mdp_with_menus(&mut rng, &menus, shape.rewards)?;
        let text = spec_text(&mut rng, &model, shape.rewards);
        let spec = parse_spec(&text)?;
        let Ok(ps) = ParameterSpace::from_spec(&model, &spec) else { continue };
        if open_params(&ps) <= shape.max_params && spec.validate_for(&model).is_ok() {
            return Ok(Generated { model, spec, controllers: Vec::new() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{write_model, write_spec};

    #[test]
    fn instances_are_pure_functions_of_the_seed() {
        for seed in 0..20 {
            let a = instance(seed, &Shape::default()).unwrap();
            let b = instance(seed, &Shape::default()).unwrap();
            assert_eq!(write_model(&a.model), write_model(&b.model));
            assert_eq!(write_spec(&a.spec), write_spec(&b.spec));
            let ps = ParameterSpace::from_spec(&a.model, &a.spec).unwrap();
            assert!(open_params(&ps) <= 3);
            assert!(a.model.state_count() <= 8);
        }
    }
}
