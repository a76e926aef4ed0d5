use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypersynth"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate(dir: &Path, id: &str, params: &[&str]) -> (String, String) {
    let mut args = vec!["generate", id, "--out", dir.to_str().unwrap()];
    for p in params {
        args.extend(["--param", p]);
    }
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = |ext: &str| dir.join(format!("{id}.{ext}")).to_str().unwrap().to_string();
    (path("model"), path("spec"))
}

#[test]
fn thread_scheduling_is_feasible_in_one_iteration() {
    let dir = TempDir::new().unwrap();
    let (m, s) = generate(dir.path(), "thread-scheduling", &["h1=10", "h2=20"]);
    let stats = dir.path().join("stats.json");
    let o = run(&["synth", "--model", &m, "--spec", &s, "--stats-out", stats.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("iterations: 1\n"));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(stats).unwrap()).unwrap();
    assert_eq!(doc["schema"], "hypersynth-stats/1");
    assert_eq!(doc["verdict"], "feasible");
    assert_eq!(doc["iterations"], 1);
}

#[test]
fn simple_maze_is_unfeasible_for_every_method() {
    let dir = TempDir::new().unwrap();
    let (m, s) = generate(dir.path(), "maze-sd", &[]);
    for method in ["ar", "hybrid", "oracle"] {
        let stats = dir.path().join(format!("{method}.json"));
        let o = run(&["synth", "--model", &m, "--spec", &s, "--method", method, "--stats-out", stats.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{method}");
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(stats).unwrap()).unwrap();
        assert_eq!(doc["explored_fraction"], 1.0);
    }
}

#[test]
fn knuth_yao_controller_checks_true() {
    let dir = TempDir::new().unwrap();
    let (m, s) = generate(dir.path(), "knuth-yao-pc", &["stages=1"]);
    let c = dir.path().join("knuth-yao-pc.c.ctrl");
    let o = run(&["check", "--model", &m, "--spec", &s, "--controller", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.contains(" = 0.1666666666")).count(), 12);
    assert!(out.ends_with("verdict: true\n"));
}

#[test]
fn structural_violation_is_reported_before_values() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.txt");
    let s = dir.path().join("s.txt");
    let c = dir.path().join("c.txt");
    let d = dir.path().join("d.txt");
    fs::write(&m, "mdp\nstates 2\naction 0 0\ntrans 0 0 1 1\naction 0 1\ntrans 0 1 1 1\naction 1 0\ntrans 1 0 1 1\nlabel goal 1\n")
        .unwrap();
    fs::write(&s, "exists c, d : same(0, {c, d}) ; forall x in {0}[c] : P(x, F goal) >= 0\n").unwrap();
    fs::write(&c, "0 0\n").unwrap();
    fs::write(&d, "0 1\n").unwrap();
    let (m, s) = (m.to_str().unwrap(), s.to_str().unwrap());
    let o = run(&["check", "--model", m, "--spec", s, "--controller", c.to_str().unwrap(), "--controller", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("structural constraints violated"));
    assert!(!out.contains("P["));
}

#[test]
fn enumerate_finds_the_single_note_member() {
    let dir = TempDir::new().unwrap();
    let (m, s) = generate(dir.path(), "notes", &[]);
    let o = run(&["enumerate", "--model", &m, "--spec", &s]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("members checked: 4"));
    assert!(out.contains("satisfying members: 1"));
    assert!(out.contains("0 -> beta") && out.contains("1 -> beta"));
}

#[test]
fn enumerate_count_matches_complete_synthesis() {
    let dir = TempDir::new().unwrap();
    let (m, s) = generate(dir.path(), "timing-attack", &["bits=2"]);
    let count = |o: &Output| stdout(o).lines().find(|l| l.starts_with("satisfying members")).unwrap().to_string();
    let oracle = run(&["enumerate", "--model", &m, "--spec", &s]);
    let ar = run(&["synth", "--model", &m, "--spec", &s, "--mode", "complete"]);
    assert_eq!(oracle.status.code(), ar.status.code());
    assert_eq!(count(&oracle), count(&ar));
}

#[test]
fn exit_codes_for_errors_and_limits() {
    let dir = TempDir::new().unwrap();
    let (m, s) = generate(dir.path(), "maze-sd", &[]);
    let bad = dir.path().join("bad.spec");
    fs::write(&bad, "exists c : forall x in {0}[c] : P(x, F goal) <=\n").unwrap();
    let o = run(&["synth", "--model", &m, "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
    let o = run(&["synth", "--model", &m, "--spec", &s, "--max-iters", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["enumerate", "--model", &m, "--spec", &s, "--cap", "10"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["synth", "--model", "/nonexistent", "--spec", &s]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["generate", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["synth", "--model", &m, "--spec", &s, "--memory-bits", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_files_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        generate(dir.path(), "random", &["states=6"]);
        generate(dir.path(), "maze-opacity", &["layout=random", "height=3", "width=4"]);
    }
    for file in ["random.model", "random.spec", "maze-opacity.model", "maze-opacity.spec"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn memory_bits_unfold_the_family() {
    let dir = TempDir::new().unwrap();
    let (m, s) = generate(dir.path(), "notes", &[]);
    let stats = dir.path().join("stats.json");
    let o = run(&["synth", "--model", &m, "--spec", &s, "--memory-bits", "1", "--stats-out", stats.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(stats).unwrap()).unwrap();
    assert_eq!(doc["mdp_states"], 8);
    assert!(stdout(&o).contains("0:0 -> "));
}
