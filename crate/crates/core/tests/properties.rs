use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypersynth_core::analysis::exact::{exact_reach, to_f64};
use hypersynth_core::analysis::{expected_visits, extremal, mc_reach};
use hypersynth_core::generators::random;
use hypersynth_core::synthesis::instantiate;
use hypersynth_core::textio::{parse_model, parse_spec, write_model, write_spec};
use hypersynth_core::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_controller(r: &mut impl Rng, m: &Mdp) -> Controller {
    Controller::new((0..m.state_count()).map(|s| m.actions(s).choose(r).unwrap().id).collect())
}

/// Probability of visiting each state, by enumerating every path of an
/// acyclic chain.
fn path_visits(mc: &Mc, s: usize, p: f64, out: &mut [f64]) {
    out[s] += p;
    for &(t, q) in mc.row(s) {
        if t != s {
            path_visits(mc, t, p * q, out);
        }
    }
}

fn acyclic_mc(r: &mut impl Rng, n: usize) -> Mc {
    let rows = (0..n)
        .map(|s| {
            if s + 1 == n {
                return vec![vec![(s, 1.0)]];
            }
            let k = r.random_range(1..=(n - 1 - s).min(3));
            let succ: Vec<usize> = (s + 1..n).collect::<Vec<_>>().choose_multiple(r, k).copied().collect();
            let w: Vec<f64> = succ.iter().map(|_| f64::from(r.random_range(1..=4u32))).collect();
            let total: f64 = w.iter().sum();
            vec![succ.into_iter().zip(w).map(|(t, x)| (t, x / total)).collect()]
        })
        .collect();
    Mc::new(Mdp::from_rows(rows).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn extremal_values_bracket_every_controller(seed in any::<u64>(), reward in any::<bool>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=8);
        let m = random::mdp(&mut r, n, 3, true).unwrap();
        let kind = if reward { AtomKind::Reward } else { AtomKind::Reach };
        let t = m.target("t").unwrap();
        let s = Settings::default();
        let lo = extremal(&m, kind, &t, Dir::Min, &s).unwrap().values.values;
        let hi = extremal(&m, kind, &t, Dir::Max, &s).unwrap().values.values;
        for _ in 0..5 {
            let mc = impose(&m, &random_controller(&mut r, &m)).unwrap();
            let v = match kind {
                AtomKind::Reach => mc_reach(&mc, &t),
                AtomKind::Reward => hypersynth_core::analysis::mc_reward(&mc, &t),
            };
            for st in 0..n {
                let tol = 1e-7 * v[st].abs().max(1.0);
                prop_assert!(lo[st] <= v[st] + tol, "min {} above {}", lo[st], v[st]);
                prop_assert!(v[st] == f64::INFINITY || v[st] <= hi[st] + tol, "max {} below {}", hi[st], v[st]);
            }
        }
    }

    #[test]
    fn float_and_rational_reachability_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=8);
        let mc = random::mc(&mut r, n);
        let t = mc.target("t").unwrap();
        let (approx, exact) = (mc_reach(&mc, &t), exact_reach(&mc, &t));
        for s in 0..n {
            prop_assert!((approx[s] - to_f64(&exact[s])).abs() <= 1e-9);
        }
    }

    #[test]
    fn visits_of_acyclic_chains_match_path_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=7);
        let mc = acyclic_mc(&mut r, n);
        let mut paths = vec![0.0; n];
        path_visits(&mc, 0, 1.0, &mut paths);
        let v = expected_visits(&mc, 0);
        for s in 0..n - 1 {
            prop_assert!((v[s] - paths[s]).abs() <= 1e-10, "state {s}: {} vs {}", v[s], paths[s]);
        }
    }

    #[test]
    fn model_and_spec_text_round_trip(seed in 0u64..5000) {
        let g = random::instance(seed, &random::Shape::default()).unwrap();
        prop_assert_eq!(parse_model(&write_model(&g.model)).unwrap(), g.model);
        prop_assert_eq!(parse_spec(&write_spec(&g.spec)).unwrap(), g.spec);
    }

    #[test]
    fn complement_and_fixed_box_partition_the_node(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random::instance(seed, &random::Shape { max_params: 4, ..Default::default() }).unwrap();
        let ps = ParameterSpace::from_spec(&g.model, &g.spec).unwrap();
        let node = ps.root();
        let member = Realisation(node.domains.iter().map(|d| *d.choose(&mut r).unwrap()).collect());
        let conflict: Vec<usize> = (0..ps.len()).filter(|_| r.random_bool(0.5)).collect();
        let boxes = node.complement(&member, &conflict);
        for m in node.realisations() {
            let fixed = conflict.iter().all(|&k| m.0[k] == member.0[k]);
            let hits = boxes.iter().filter(|b| b.contains(&m)).count();
            prop_assert_eq!(hits, usize::from(!fixed));
        }
    }

    #[test]
    fn substitution_agrees_with_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random::instance(seed, &random::Shape::default()).unwrap();
        let f = instantiate(&g.spec, None);
        let truth: Vec<bool> = (0..f.cmps.len()).map(|_| r.random_bool(0.5)).collect();
        let known: Vec<bool> = (0..f.cmps.len()).map(|_| r.random_bool(0.5)).collect();
        let partial = f.root.substitute(&|i| known[i].then_some(truth[i]));
        prop_assert_eq!(partial.eval(&|i| truth[i]), f.root.eval(&|i| truth[i]));
        let full = f.root.substitute(&|i| Some(truth[i]));
        let expected = if f.root.eval(&|i| truth[i]) { synthesis::Formula::True } else { synthesis::Formula::False };
        prop_assert_eq!(full, expected);
    }

    #[test]
    fn satisfying_members_check_true(seed in 0u64..3000) {
        let g = random::instance(seed, &random::Shape::default()).unwrap();
        let p = Problem::new(g.model, g.spec, None).unwrap();
        let cfg = SynthConfig { mode: Mode::Complete, ..Default::default() };
        let o = synthesize(&p, &cfg).unwrap();
        let sat = o.satisfying.unwrap();
        for m in p.ps.root().realisations() {
            prop_assert_eq!(sat.contains(&m), p.check(&m).unwrap().holds);
        }
    }
}
