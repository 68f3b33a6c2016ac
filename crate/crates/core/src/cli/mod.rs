//! Command-line front end: `build`, `verify` and `roundtrip`.
//!
//! Exit codes are 0 when every check passes, 1 when a check fails and 2 on
//! bad input.

pub mod report;
pub mod scenario;
pub mod suites;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coders::{build_boxes, build_composite, build_warmup, end_to_end, Side};
use crate::effective::CeSetSpec;
use crate::model::FiniteStructure;
use crate::sample::random_ce_spec;
use report::{RoundtripReport, RoundtripRun, VerifyReport};
pub use scenario::{BoxesInput, Caps, Scenario, ScenarioKind};
pub use suites::Suite;

/// Format tag of structure artifacts.
pub const ARTIFACT_FORMAT: &str = "catwork.structure/1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("build failed: {0}")]
    Build(String),
}

#[derive(Debug, Parser)]
#[command(name = "catwork", version, about = "Build, check and round-trip coding structures from a scenario file")]
pub struct Cli {
    /// Replace the scenario's seed.
    #[arg(long, global = true, value_name = "SEED")]
    pub seed_override: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the scenario's structures as JSON files.
    Build {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run invariant suites and report per-check results.
    Verify {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the structures `build` wrote to this directory instead of rebuilding them.
        #[arg(long)]
        artifacts: Option<PathBuf>,
    },
    /// Encode random sets into composites and decode them back.
    Roundtrip {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load(path: &Path, seed_override: Option<u64>) -> Result<Scenario, CliError> {
    let mut s = Scenario::load(path)?;
    if let Some(seed) = seed_override {
        s.seed = seed;
    }
    Ok(s)
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Build { scenario, out } => {
            let s = load(&scenario, cli.seed_override)?;
            for path in cmd_build(&s, &out)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Verify { scenario, suite, out, artifacts } => {
            let s = load(&scenario, cli.seed_override)?;
            let report = cmd_verify(&s, suite, artifacts.as_deref())?;
            print!("{}", report.to_text());
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            Ok(report.pass)
        }
        Command::Roundtrip { scenario, trials, out } => {
            let s = load(&scenario, cli.seed_override)?;
            let started = Instant::now();
            let report = cmd_roundtrip(&s, trials)?;
            print!("{}", report.to_text());
            eprintln!("{} trials in {:.2?}", trials, started.elapsed());
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            Ok(report.pass)
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct Provenance<'a> {
    scenario: &'a str,
    kind: ScenarioKind,
    side: &'a str,
    seed: u64,
    caps: &'a Caps,
    generator: &'static str,
}

#[derive(Serialize)]
struct Artifact<'a> {
    format: &'static str,
    provenance: Provenance<'a>,
    structure: &'a FiniteStructure,
}

/// Artifact file names of a scenario, first side then second.
pub fn artifact_names(s: &Scenario) -> [String; 2] {
    let [a, b] = side_names(s.kind());
    [format!("{}.{a}.json", s.name), format!("{}.{b}.json", s.name)]
}

fn side_names(kind: ScenarioKind) -> [&'static str; 2] {
    match kind {
        ScenarioKind::Composite => ["easy", "hard"],
        _ => ["M", "N"],
    }
}

fn build_err(e: impl std::fmt::Display) -> CliError {
    CliError::Build(e.to_string())
}

/// The two structures a scenario describes.
pub fn build_structures(s: &Scenario) -> Result<[FiniteStructure; 2], CliError> {
    match s.kind() {
        ScenarioKind::Warmup => {
            let d = s.spec().expect("warm-up scenarios carry a set");
            let p = build_warmup(d, s.warmup_caps()).map_err(build_err)?;
            Ok([p.m, p.n])
        }
        ScenarioKind::Boxes => {
            let p = build_boxes(&s.approx()?, s.box_caps()).map_err(build_err)?;
            Ok([p.m, p.n])
        }
        ScenarioKind::Composite => {
            let p = build_boxes(&s.approx()?, s.box_caps()).map_err(build_err)?;
            let easy = build_composite(&p, Side::Easy, s.s_omega_caps(), s.seed).map_err(build_err)?;
            let hard = build_composite(&p, Side::Hard, s.s_omega_caps(), s.seed).map_err(build_err)?;
            Ok([easy.structure, hard.structure])
        }
    }
}

/// Writes both structures with provenance headers; returns the paths.
pub fn cmd_build(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let structures = build_structures(s)?;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut paths = Vec::new();
    for ((structure, side), name) in structures.iter().zip(side_names(s.kind())).zip(artifact_names(s)) {
        let artifact = Artifact {
            format: ARTIFACT_FORMAT,
            provenance: Provenance {
                scenario: &s.name,
                kind: s.kind(),
                side,
                seed: s.seed,
                caps: &s.caps,
                generator: concat!("catwork ", env!("CARGO_PKG_VERSION")),
            },
            structure,
        };
        let path = out.join(name);
        write_json(&path, &artifact)?;
        paths.push(path);
    }
    Ok(paths)
}

fn read_artifact(path: &Path) -> Result<FiniteStructure, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    if v.get("format").and_then(|f| f.as_str()) != Some(ARTIFACT_FORMAT) {
        return Err(io_err(path, format!("not a {ARTIFACT_FORMAT} file")));
    }
    let structure = v.get("structure").ok_or_else(|| io_err(path, "no structure field"))?;
    FiniteStructure::from_json(&structure.to_string()).map_err(|e| io_err(path, e))
}

/// Reads what `build` wrote for `s` from `dir`.
pub fn load_artifacts(s: &Scenario, dir: &Path) -> Result<suites::Loaded, CliError> {
    let [a, b] = artifact_names(s);
    Ok(suites::Loaded { kind: s.kind(), first: read_artifact(&dir.join(a))?, second: read_artifact(&dir.join(b))? })
}

pub fn cmd_verify(s: &Scenario, suite: Suite, artifacts: Option<&Path>) -> Result<VerifyReport, CliError> {
    let loaded = artifacts.map(|dir| load_artifacts(s, dir)).transpose()?;
    let ctx = suites::Context { scenario: s, brute_cap: s.brute_cap(), loaded };
    let reports = suite.expand().into_iter().map(|x| suites::run_suite(&ctx, x)).collect();
    Ok(VerifyReport::new(&s.name, s.seed, ctx.brute_cap, reports))
}

/// The set of trial `t`: the scenario's own set first, then sets drawn from
/// the seed with the scenario's sort count and horizon.
fn trial_specs(s: &Scenario, trials: usize) -> Vec<CeSetSpec> {
    let (own, index_cap) = match (s.spec(), &s.boxes) {
        (Some(d), _) => (Some(d.clone()), d.index_cap),
        (None, Some(BoxesInput::Approx(a))) => (None, a.index_cap),
        (None, _) => unreachable!("validated scenarios carry an input"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut out: Vec<CeSetSpec> = own.into_iter().collect();
    while out.len() < trials {
        out.push(random_ce_spec(&mut rng, index_cap, s.caps.horizon));
    }
    out.truncate(trials);
    out
}

pub fn cmd_roundtrip(s: &Scenario, trials: usize) -> Result<RoundtripReport, CliError> {
    let caps = s.pipeline_caps();
    let runs = trial_specs(s, trials)
        .iter()
        .enumerate()
        .map(|(trial, d)| {
            let expected: Vec<u32> = d.members().into_iter().collect();
            match end_to_end(d, caps, s.seed.wrapping_add(trial as u64)) {
                Ok(r) => RoundtripRun {
                    trial,
                    spec: r.spec,
                    expected,
                    recovered: r.recovered.into_iter().collect(),
                    exact: r.exact,
                    modulus: r.modulus,
                    dominator: r.dominator,
                    elements: r.elements,
                    coding_oracle_calls: r.coding_oracle_calls,
                    s_omega_oracle_calls: r.s_omega_oracle_calls,
                    s_omega_components: r.s_omega_components,
                    error: None,
                },
                Err(e) => RoundtripRun {
                    trial,
                    spec: d.to_string(),
                    expected,
                    recovered: Vec::new(),
                    exact: false,
                    modulus: Vec::new(),
                    dominator: Vec::new(),
                    elements: 0,
                    coding_oracle_calls: 0,
                    s_omega_oracle_calls: 0,
                    s_omega_components: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(RoundtripReport::new(&s.name, s.seed, runs))
}
