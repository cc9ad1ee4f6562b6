//! Run directories, artifacts and ensemble aggregation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hjreg_core::rescale::write_cascade_csv;
use hjreg_core::snapshot::write_snapshot;
use hjreg_core::verdict::Outcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::report::{status_of, ChainReport, CheckReport, RunReport, Status, SCHEMA_VERSION};
use crate::scenarios::{run_member, MemberOutput, Scenario};

/// Failure outside the numerical checks.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.into())
    }
}

impl From<hjreg_core::Error> for RunError {
    fn from(e: hjreg_core::Error) -> Self {
        match e {
            hjreg_core::Error::Io(io) => RunError::Io(io),
            other => RunError::Io(std::io::Error::other(other.to_string())),
        }
    }
}

/// First eight hex digits of the SHA-256 of the config, minus its output section.
pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output = Default::default();
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    let d = Sha256::digest(&bytes);
    d.iter().take(4).map(|b| format!("{b:02x}")).collect()
}

pub fn run_dir_name(prefix: &str, cfg: &ExperimentConfig, seed: u64) -> String {
    format!("{prefix}-{}-s{seed}-{}", cfg.scenario.name(), config_digest(cfg))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_member_artifacts(dir: &Path, out: &MemberOutput, snapshots: bool) -> Result<Vec<String>, RunError> {
    let mut artifacts = Vec::new();
    if let Some(chain) = &out.chain {
        write_json(&dir.join("chain.json"), &ChainReport::from(chain.clone()))?;
        artifacts.push("chain.json".to_string());
    }
    if !out.cascades.is_empty() {
        std::fs::create_dir_all(dir.join("cascades"))?;
        for (name, recs) in &out.cascades {
            let rel = format!("cascades/{name}.csv");
            write_cascade_csv(recs, &dir.join(&rel))?;
            artifacts.push(rel);
        }
    }
    if snapshots {
        if let Some(f) = &out.field {
            std::fs::create_dir_all(dir.join("snapshots"))?;
            let last = f.spec().n_slices() - 1;
            write_snapshot(f, &[0, last], &dir.join("snapshots/field.csv"))?;
            artifacts.push("snapshots/field.csv".to_string());
            artifacts.push("snapshots/field.json".to_string());
        }
    }
    artifacts.sort();
    Ok(artifacts)
}

pub struct RunOutcome {
    pub report: RunReport,
    pub dir: PathBuf,
}

/// Evaluates `cfg` once and writes its run directory under `out_root`.
/// Numerical failures become a report with status `error`.
pub fn run(cfg: &ExperimentConfig, out_root: &Path) -> Result<RunOutcome, RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.0))?;
    let start = Instant::now();
    let dir = out_root.join(run_dir_name("run", cfg, cfg.seed));
    std::fs::create_dir_all(&dir)?;
    let result = run_member(cfg, cfg.seed);
    let (checks, chain, extras, mut artifacts, error, mut timings) = match result {
        Ok(out) => {
            let artifacts = write_member_artifacts(&dir, &out, cfg.output.snapshots)?;
            (out.checks, out.chain.map(ChainReport::from), out.extras, artifacts, None, out.timings)
        }
        Err(e) => (vec![], None, Map::new(), vec![], Some(e.to_string()), BTreeMap::new()),
    };
    let status = if error.is_some() { Status::Error } else { status_of(&checks) };
    timings.insert("total_s".into(), start.elapsed().as_secs_f64());
    artifacts.insert(0, "report.json".into());
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.scenario,
        seed: cfg.seed,
        status,
        config: cfg.clone(),
        checks,
        chain,
        extras,
        artifacts,
        error,
        timings,
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok(RunOutcome { report, dir })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub index: usize,
    pub seed: u64,
    pub status: Status,
    pub outcomes: BTreeMap<String, Outcome>,
    /// Hypothesis and conclusion values by `check.name`, plus scenario extras that are numbers.
    pub values: BTreeMap<String, f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: usize,
    pub vacuous: usize,
    pub refuted: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub seed: u64,
    pub count: usize,
    pub status: Status,
    pub counts: Counts,
    /// Per check: members whose hypotheses held, and those among them refuted.
    pub satisfied: BTreeMap<String, usize>,
    pub refutations: BTreeMap<String, usize>,
    pub config: ExperimentConfig,
    pub chain: Option<ChainReport>,
    pub members: Vec<MemberSummary>,
    pub timings: BTreeMap<String, f64>,
}

/// Member seeds drawn from one stream keyed by the ensemble seed.
pub fn member_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen()).collect()
}

fn summarize(index: usize, seed: u64, res: &hjreg_core::Result<MemberOutput>) -> MemberSummary {
    match res {
        Err(e) => MemberSummary {
            index,
            seed,
            status: Status::Error,
            outcomes: BTreeMap::new(),
            values: BTreeMap::new(),
            error: Some(e.to_string()),
        },
        Ok(out) => {
            let mut values = BTreeMap::new();
            for (k, v) in &out.extras {
                if let Some(x) = v.as_f64() {
                    values.insert(k.clone(), x);
                }
            }
            for c in &out.checks {
                if let Some(v) = &c.verdict {
                    for (k, x) in v.hypothesis_values.iter().chain(&v.conclusion_values) {
                        values.insert(format!("{}.{k}", c.name), *x);
                    }
                }
            }
            MemberSummary {
                index,
                seed,
                status: status_of(&out.checks),
                outcomes: out.checks.iter().map(|c: &CheckReport| (c.name.clone(), c.outcome)).collect(),
                values,
                error: None,
            }
        }
    }
}

/// Runs `count` members with derived seeds; members are merged in index
/// order so the report does not depend on scheduling.
pub fn ensemble(cfg: &ExperimentConfig, count: usize, seed: u64, out_root: &Path) -> Result<(EnsembleReport, PathBuf), RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.0))?;
    if count == 0 {
        return Err(RunError::Config("ensemble count must be at least 1".into()));
    }
    let start = Instant::now();
    let seeds = member_seeds(seed, count);
    let results: Vec<_> = seeds.par_iter().map(|&s| run_member(cfg, s)).collect();
    let members: Vec<MemberSummary> = results.iter().enumerate().map(|(i, r)| summarize(i, seeds[i], r)).collect();
    let mut counts = Counts::default();
    let mut satisfied = BTreeMap::new();
    let mut refutations = BTreeMap::new();
    for m in &members {
        match m.status {
            Status::Pass => counts.pass += 1,
            Status::Vacuous => counts.vacuous += 1,
            Status::Refuted => counts.refuted += 1,
            Status::Error => counts.error += 1,
        }
        for (name, o) in &m.outcomes {
            if matches!(o, Outcome::Holds | Outcome::Refuted) {
                *satisfied.entry(name.clone()).or_insert(0) += 1;
            }
            let r = refutations.entry(name.clone()).or_insert(0);
            if o.is_refuted() {
                *r += 1;
            }
        }
    }
    let status = if counts.refuted > 0 {
        Status::Refuted
    } else if counts.error > 0 {
        Status::Error
    } else if counts.pass > 0 {
        Status::Pass
    } else {
        Status::Vacuous
    };
    let chain = results.iter().find_map(|r| r.as_ref().ok().and_then(|o| o.chain.clone())).map(ChainReport::from);
    let dir = out_root.join(run_dir_name("ensemble", cfg, seed));
    std::fs::create_dir_all(&dir)?;
    if let Some(c) = &chain {
        write_json(&dir.join("chain.json"), c)?;
    }
    let mut timings = BTreeMap::new();
    timings.insert("total_s".to_string(), start.elapsed().as_secs_f64());
    let report = EnsembleReport {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.scenario,
        seed,
        count,
        status,
        counts,
        satisfied,
        refutations,
        config: cfg.clone(),
        chain,
        members,
        timings,
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok((report, dir))
}

/// `Value` view of a report file with its timings removed.
pub fn load_without_timings(path: &Path) -> Result<Value, RunError> {
    let text = std::fs::read_to_string(path)?;
    let mut v: Value = serde_json::from_str(&text)?;
    if let Value::Object(m) = &mut v {
        m.remove("timings");
    }
    Ok(v)
}
