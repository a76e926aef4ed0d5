use std::collections::BTreeMap;

use hypersynth_core::generators::{generate, Params};
use hypersynth_core::synthesis::enumerate_oracle;
use hypersynth_core::*;

fn problem(id: &str, params: &[&str]) -> Problem {
    let items: Vec<String> = params.iter().map(|s| s.to_string()).collect();
    let g = generate(id, Params::parse(&items).unwrap(), 0).unwrap();
    Problem::new(g.model, g.spec, None).unwrap()
}

fn run(p: &Problem, mode: Mode, method: Method) -> SynthesisOutcome {
    synthesize(p, &SynthConfig { mode, method, ..Default::default() }).unwrap()
}

#[test]
fn notes_example_has_exactly_one_member() {
    let p = problem("notes", &[]);
    let o = enumerate_oracle(&p, Mode::Complete, 100).unwrap();
    let members = o.satisfying.unwrap().members();
    assert_eq!(members.len(), 1);
    let c = &p.ps.induce(members.first().unwrap())[0];
    assert_eq!(&c.choice[..2], &[1, 1]);
    for method in [Method::Ar, Method::Hybrid] {
        let o = run(&p, Mode::Complete, method);
        assert_eq!(o.satisfying.unwrap().members(), members);
    }
}

#[test]
fn two_stage_knuth_yao_is_feasible() {
    let p = problem("knuth-yao-pc", &["stages=2"]);
    for method in [Method::Ar, Method::Hybrid] {
        let o = run(&p, Mode::Feasibility, method);
        assert_eq!(o.verdict, Verdict::Feasible);
        assert!(p.check(o.witness.as_ref().unwrap()).unwrap().holds);
    }
}

#[test]
fn timing_leak_exists_and_is_counted_exactly() {
    let p = problem("timing-attack", &["bits=2"]);
    let oracle = enumerate_oracle(&p, Mode::Complete, 1000).unwrap();
    let ar = run(&p, Mode::Complete, Method::Ar);
    assert_eq!(ar.verdict, Verdict::Feasible);
    assert_eq!(ar.satisfying.unwrap().count(), oracle.satisfying.unwrap().count());
}

#[test]
fn thread_scheduling_with_equal_sizes_is_rejected() {
    let items = vec!["h1=5".to_string(), "h2=5".to_string()];
    assert!(generate("thread-scheduling", Params::parse(&items).unwrap(), 0).is_err());
}

#[test]
fn optimal_mode_matches_the_oracle_on_noninterference() {
    let p = problem("maze-noninterference", &["layout=a.b/.#./..T"]);
    let oracle = enumerate_oracle(&p, Mode::Optimal, 1_000_000).unwrap();
    for method in [Method::Ar, Method::Hybrid] {
        let o = run(&p, Mode::Optimal, method);
        assert_eq!(o.verdict, oracle.verdict);
        assert_eq!(o.optimum, oracle.optimum);
        if let Some(w) = &o.witness {
            assert!(p.check(w).unwrap().holds);
        }
    }
}

#[test]
fn limits_stop_the_search() {
    let p = problem("maze-sd", &[]);
    let cfg = SynthConfig { limits: Limits { max_iters: Some(3), time_limit: None }, ..Default::default() };
    let o = synthesize(&p, &cfg).unwrap();
    assert_eq!(o.verdict, Verdict::Unknown);
    assert!(o.stats.limit_hit);
    assert!(o.stats.explored_fraction < 1.0);
}

#[test]
fn generators_are_deterministic() {
    use hypersynth_core::textio::{write_model, write_spec};
    for id in hypersynth_core::generators::IDS {
        let a = generate(id, Params::new(BTreeMap::new()), 7).unwrap();
        let b = generate(id, Params::new(BTreeMap::new()), 7).unwrap();
        assert_eq!(write_model(&a.model), write_model(&b.model), "{id}");
        assert_eq!(write_spec(&a.spec), write_spec(&b.spec), "{id}");
    }
}
