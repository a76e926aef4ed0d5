//! Command-line front end: synthesis, checking, enumeration and benchmark
//! generation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hypersynth_core::family::satisfies_struc;
use hypersynth_core::generators::{generate, Params, IDS};
use hypersynth_core::model::memory_state;
use hypersynth_core::synthesis::{enumerate_oracle, with_memory};
use hypersynth_core::textio::{parse_controller, parse_model, parse_spec, resolve_controllers, write_controller, write_model, write_spec, write_stats};
use hypersynth_core::{
    synthesize, Error, FamilyError, Limits, Method, Mode, ParameterSpace, Problem, Settings, SynthConfig, SynthesisOutcome,
    Verdict,
};

const EXIT_OK: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "hypersynth", version, about = "Controller synthesis against probabilistic hyperproperties")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search the controller family for members satisfying the spec.
    Synth(SynthArgs),
    /// Check given controllers against the spec.
    Check(CheckArgs),
    /// Check every member of the family.
    Enumerate(EnumArgs),
    /// Write a benchmark model and spec.
    Generate(GenArgs),
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    /// Tolerance for approximate equality `=`.
    #[arg(long)]
    eps_eq: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Feasibility,
    Complete,
    Optimal,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Feasibility => Mode::Feasibility,
            ModeArg::Complete => Mode::Complete,
            ModeArg::Optimal => Mode::Optimal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ar,
    Hybrid,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Ar => Method::Ar,
            MethodArg::Hybrid => Method::Hybrid,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_enum, default_value = "feasibility")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "ar")]
    method: MethodArg,
    /// Bits of controller memory (at most 2).
    #[arg(long, default_value_t = 0)]
    memory_bits: u32,
    /// Convergence tolerance of value iteration.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Largest family the oracle enumerates.
    #[arg(long, default_value_t = 1_000_000)]
    oracle_cap: u64,
    /// Write the JSON statistics document here.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// One controller file per declared controller, in declaration order.
    #[arg(long = "controller", required = true)]
    controllers: Vec<PathBuf>,
}

#[derive(Args)]
struct EnumArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_enum, default_value = "complete")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    memory_bits: u32,
    #[arg(long, default_value_t = 1_000_000)]
    cap: u64,
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Benchmark id.
    id: String,
    /// Generator parameter as key=value; repeatable.
    #[arg(long = "param", short = 'p')]
    params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.downcast_ref::<Error>() {
            Some(Error::Family(FamilyError::CapExceeded { .. })) => EXIT_LIMIT,
            _ => EXIT_INPUT,
        };
        Failure { code, err }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(inputs: &Inputs, memory_bits: u32) -> Result<Problem, Failure> {
    let model = parse_model(&read(&inputs.model)?).map_err(Error::from).with_context(|| inputs.model.display().to_string())?;
    let spec = parse_spec(&read(&inputs.spec)?).map_err(Error::from).with_context(|| inputs.spec.display().to_string())?;
    let (model, spec) = if memory_bits > 0 { with_memory(&model, &spec, memory_bits).map_err(Error::from)? } else { (model, spec) };
    Ok(Problem::new(model, spec, inputs.eps_eq)?)
}

fn state_name(s: usize, bits: u32) -> String {
    if bits == 0 {
        s.to_string()
    } else {
        let (orig, mem) = (s >> bits, s & ((1 << bits) - 1));
        debug_assert_eq!(memory_state(orig, mem, bits), s);
        format!("{orig}:{mem}")
    }
}

fn report(p: &Problem, o: &SynthesisOutcome, bits: u32) -> String {
    let mut out = String::new();
    let s = &o.stats;
    let _ = writeln!(out, "verdict: {}", verdict_name(o.verdict));
    if let Some(d) = o.optimum {
        let _ = writeln!(out, "optimum: {d}");
    }
    if let Some(sat) = &o.satisfying {
        let _ = writeln!(out, "satisfying members: {}", sat.count());
    }
    for (name, c) in p.spec.controllers.iter().zip(&o.controllers) {
        let _ = writeln!(out, "controller {name}:");
        for (st, a) in c.choice.iter().enumerate() {
            if p.m.actions(st).len() > 1 {
                let act = p.m.action(st, *a).and_then(|x| x.name.clone()).unwrap_or_else(|| a.to_string());
                let _ = writeln!(out, "  {} -> {act}", state_name(st, bits));
            }
        }
    }
    let _ = writeln!(out, "family size: {}", s.family_size);
    let _ = writeln!(out, "MDP states: {}", s.mdp_states);
    let _ = writeln!(out, "iterations: {}", s.iterations);
    let _ = writeln!(out, "decided families: {}", s.decided_families);
    let _ = writeln!(out, "average decided size: {:.3}", s.avg_decided_size);
    let _ = writeln!(out, "explored fraction: {}", s.explored_fraction);
    let _ = writeln!(out, "wall time: {:.3} s", s.wall_time.as_secs_f64());
    if s.counterexamples > 0 {
        let _ = writeln!(out, "counterexamples: {} (average conflict {:.2})", s.counterexamples, s.avg_conflict_size);
    }
    if s.limit_hit {
        let _ = writeln!(out, "limit reached before the family was explored");
    }
    out
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Feasible => "feasible",
        Verdict::Unfeasible => "unfeasible",
        Verdict::Unknown => "unknown",
    }
}

fn exit_for(v: Verdict) -> u8 {
    match v {
        Verdict::Feasible => EXIT_OK,
        Verdict::Unfeasible => EXIT_NO,
        Verdict::Unknown => EXIT_LIMIT,
    }
}

fn write_stats_file(path: &Option<PathBuf>, o: &SynthesisOutcome) -> anyhow::Result<()> {
    if let Some(path) = path {
        fs::write(path, write_stats(o)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn positive(name: &str, x: Option<f64>) -> anyhow::Result<()> {
    match x {
        Some(v) if !(v > 0.0 && v.is_finite()) => anyhow::bail!("--{name} must be positive, got {v}"),
        _ => Ok(()),
    }
}

fn synth(a: SynthArgs) -> Result<u8, Failure> {
    positive("tol", a.tol)?;
    positive("time-limit", a.time_limit)?;
    positive("eps-eq", a.inputs.eps_eq)?;
    if a.max_iters == Some(0) {
        return Err(anyhow::anyhow!("--max-iters must be positive").into());
    }
    let p = load(&a.inputs, a.memory_bits)?;
    let mut settings = Settings::default();
    if let Some(t) = a.tol {
        settings.tol = t;
    }
    let cfg = SynthConfig {
        mode: a.mode.into(),
        method: a.method.into(),
        settings,
        limits: Limits { max_iters: a.max_iters, time_limit: a.time_limit.map(Duration::from_secs_f64) },
        oracle_cap: a.oracle_cap,
        ..Default::default()
    };
    let o = synthesize(&p, &cfg)?;
    print!("{}", report(&p, &o, a.memory_bits));
    write_stats_file(&a.stats_out, &o)?;
    Ok(exit_for(o.verdict))
}

fn check(a: CheckArgs) -> Result<u8, Failure> {
    positive("eps-eq", a.inputs.eps_eq)?;
    let p = load(&a.inputs, 0)?;
    if a.controllers.len() != p.spec.controllers.len() {
        return Err(anyhow::anyhow!(
            "the spec declares {} controllers but {} files were given",
            p.spec.controllers.len(),
            a.controllers.len()
        )
        .into());
    }
    let mut given = Vec::new();
    for path in &a.controllers {
        let c = parse_controller(&read(path)?, &p.m).map_err(Error::from).with_context(|| path.display().to_string())?;
        given.push(c);
    }
    let cs = resolve_controllers(&p.ps, &p.m, &given);
    if !satisfies_struc(&cs, &p.spec.controllers, &p.spec.struc) {
        println!("structural constraints violated");
        println!("verdict: false");
        return Ok(EXIT_NO);
    }
    let res = p.check_controllers(&cs)?;
    for (t, v) in p.formula.terms.iter().zip(&res.term_values) {
        println!("{t} = {v}");
    }
    for (i, ok) in res.cmp_truth.iter().enumerate() {
        println!("{}: {ok}", p.formula.describe_cmp(i));
    }
    println!("verdict: {}", res.holds);
    Ok(if res.holds { EXIT_OK } else { EXIT_NO })
}

fn enumerate(a: EnumArgs) -> Result<u8, Failure> {
    let p = load(&a.inputs, a.memory_bits)?;
    let o = enumerate_oracle(&p, a.mode.into(), a.cap)?;
    println!("members checked: {}", o.stats.family_size);
    print!("{}", report(&p, &o, a.memory_bits));
    write_stats_file(&a.stats_out, &o)?;
    Ok(exit_for(o.verdict))
}

fn gen(a: GenArgs) -> Result<u8, Failure> {
    if !IDS.contains(&a.id.as_str()) {
        return Err(anyhow::anyhow!("unknown generator `{}`; known: {}", a.id, IDS.join(", ")).into());
    }
    let g = generate(&a.id, Params::parse(&a.params)?, a.seed)?;
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    files.insert(format!("{}.model", a.id), write_model(&g.model));
    files.insert(format!("{}.spec", a.id), write_spec(&g.spec));
    for (name, c) in g.spec.controllers.iter().zip(&g.controllers) {
        files.insert(format!("{}.{name}.ctrl", a.id), write_controller(c));
    }
    for (file, text) in &files {
        let path = a.out.join(file);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    let ps = ParameterSpace::from_spec(&g.model, &g.spec)?;
    println!("states: {}", g.model.state_count());
    println!("family size: {}", ps.family_size());
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Synth(a) => synth(a),
        Cmd::Check(a) => check(a),
        Cmd::Enumerate(a) => enumerate(a),
        Cmd::Generate(a) => gen(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
