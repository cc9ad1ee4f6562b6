//! Experiment configuration: a TOML file with one table per concern.

use std::path::{Path, PathBuf};

use hjreg_core::rescale::{CascadeMode, TheoremOptions};
use hjreg_core::solver::SigmaMode;
use hjreg_core::{CoercivityEnvelope, GridSpec, HamiltonianKind, HamiltonianSpec, InitialData};
use serde::{Deserialize, Serialize};

use crate::scenarios::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Lemma1,
    Lemma2,
    OscAbove,
    OscBelow,
    Cascade,
    Theorem,
}

impl CheckKind {
    /// Checks whose statements need `p < N`.
    pub fn needs_scope(self) -> bool {
        matches!(self, CheckKind::Lemma1 | CheckKind::Lemma2 | CheckKind::OscAbove | CheckKind::OscBelow)
    }

    pub fn needs_chain(self) -> bool {
        !matches!(self, CheckKind::Lemma1 | CheckKind::Lemma2)
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Lemma1 => "lemma1",
            CheckKind::Lemma2 => "lemma2",
            CheckKind::OscAbove => "osc_above",
            CheckKind::OscBelow => "osc_below",
            CheckKind::Cascade => "cascade",
            CheckKind::Theorem => "theorem",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the scenario's own list.
    #[serde(default)]
    pub checks: Option<Vec<CheckKind>>,
    pub grid: GridSpec,
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    /// Defaults to the scenario's own initial data.
    #[serde(default)]
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub cascade: CascadeConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    #[serde(default = "one")]
    pub lambda: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_cfl")]
    pub c_cfl: f64,
    #[serde(default)]
    pub sigma: SigmaMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { c_cfl: default_cfl(), sigma: SigmaMode::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    /// Use `alpha_dg` as given.
    Fixed,
    /// Replace `alpha_dg` by the empirical supremum over the run's own fields
    /// when that is finite.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "one")]
    pub alpha_dg: f64,
    #[serde(default = "fixed")]
    pub mode: ChainMode,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { alpha_dg: 1.0, mode: ChainMode::Fixed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    /// Earliest base time; defaults to `t0 + (t1 - t0) / 4`.
    #[serde(default)]
    pub delta_time: Option<f64>,
    #[serde(default = "default_zooms")]
    pub zooms: u32,
    #[serde(default = "default_lattice")]
    pub lattice: usize,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "one_usize")]
    pub times: usize,
    #[serde(default = "default_alpha_ref")]
    pub alpha_ref: f64,
    #[serde(default)]
    pub mode: CascadeMode,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        let o = TheoremOptions::default();
        Self {
            delta_time: None,
            zooms: o.zooms,
            lattice: o.lattice,
            window: o.window,
            times: o.times,
            alpha_ref: o.alpha_ref,
            mode: o.mode,
        }
    }
}

impl CascadeConfig {
    pub fn options(&self) -> TheoremOptions {
        TheoremOptions {
            zooms: self.zooms,
            lattice: self.lattice,
            window: self.window,
            times: self.times,
            alpha_ref: self.alpha_ref,
            mode: self.mode,
        }
    }

    pub fn delta_for(&self, grid: &GridSpec) -> f64 {
        self.delta_time.unwrap_or(grid.t0 + 0.25 * (grid.t1 - grid.t0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Mass threshold of the first De Giorgi lemma.
    #[serde(default = "default_delta")]
    pub lemma1_delta: f64,
    /// `delta` used by the measure-splitting lemma.
    #[serde(default = "default_delta")]
    pub lemma2_delta: f64,
    /// Multiples of the cell width allowed by the barrier checks.
    #[serde(default = "default_barrier_cells")]
    pub barrier_cells: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { lemma1_delta: default_delta(), lemma2_delta: default_delta(), barrier_cells: default_barrier_cells() }
    }
}

/// Scenario-specific knobs; each scenario reads only its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Coefficient periods for `rough-eta-sweep`.
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    /// Resolutions in the `hopf-lax-validation` refinement study.
    #[serde(default = "default_refinements")]
    pub refinements: usize,
    /// Upper end and iteration count of the amplitude bisection in `lemma1-ensemble`.
    #[serde(default = "default_bisect_hi")]
    pub bisect_hi: f64,
    #[serde(default = "default_bisect_iters")]
    pub bisect_iters: usize,
    /// Trigonometric modes of randomized initial data.
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Ranges the randomized `shift` and `amplitude` are drawn from.
    #[serde(default)]
    pub shift_range: Option<(f64, f64)>,
    #[serde(default)]
    pub amplitude_range: Option<(f64, f64)>,
    /// Coercivity samples per Hamiltonian.
    #[serde(default = "default_samples")]
    pub coercivity_samples: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            etas: default_etas(),
            refinements: default_refinements(),
            bisect_hi: default_bisect_hi(),
            bisect_iters: default_bisect_iters(),
            modes: default_modes(),
            shift_range: None,
            amplitude_range: None,
            coercivity_samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Parent of the run directory; the CLI flag and `HJREG_OUT_DIR` take precedence.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, snapshots: true }
    }
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn fixed() -> ChainMode {
    ChainMode::Fixed
}
fn default_cfl() -> f64 {
    0.45
}
fn default_zooms() -> u32 {
    TheoremOptions::default().zooms
}
fn default_lattice() -> usize {
    TheoremOptions::default().lattice
}
fn default_window() -> f64 {
    TheoremOptions::default().window
}
fn default_alpha_ref() -> f64 {
    TheoremOptions::default().alpha_ref
}
fn default_delta() -> f64 {
    0.125
}
fn default_barrier_cells() -> f64 {
    5.0
}
fn default_etas() -> Vec<f64> {
    vec![0.25, 0.0625, 0.015625]
}
fn default_refinements() -> usize {
    3
}
fn default_bisect_hi() -> f64 {
    8.0
}
fn default_bisect_iters() -> usize {
    24
}
fn default_modes() -> usize {
    3
}
fn default_samples() -> usize {
    2000
}

/// Rejected configuration, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn hamiltonian_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "power-law" => &[],
        "scaled-power-law" => &["scale"],
        "rough-coefficient" => &["lambda", "eta"],
        "tabulated" => &["cell", "t_cell", "side", "time_cells", "coefficients"],
        "rescaled" => &["inner", "value_scale", "time_origin", "time_scale", "space_origin", "space_scale", "gradient_scale"],
        _ => return None,
    })
}

// `HamiltonianSpec` flattens its kind, which serde cannot combine with
// `deny_unknown_fields`, so its keys are checked here.
fn check_hamiltonian_table(doc: &toml::Table) -> Result<(), ConfigError> {
    let Some(toml::Value::Table(h)) = doc.get("hamiltonian") else {
        return Ok(());
    };
    let Some(kind) = h.get("kind").and_then(|k| k.as_str()) else {
        return Ok(());
    };
    let Some(extra) = hamiltonian_keys(kind) else {
        return Ok(());
    };
    for key in h.keys() {
        if !["kind", "p", "offset"].contains(&key.as_str()) && !extra.contains(&key.as_str()) {
            return Err(ConfigError(format!("unknown field `{key}` in [hamiltonian] of kind `{kind}`")));
        }
    }
    Ok(())
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
    check_hamiltonian_table(&doc)?;
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

impl ExperimentConfig {
    pub fn checks(&self) -> Vec<CheckKind> {
        self.checks.clone().unwrap_or_else(|| self.scenario.default_checks())
    }

    pub fn envelope(&self) -> Result<CoercivityEnvelope, ConfigError> {
        CoercivityEnvelope::new(self.envelope.lambda, self.hamiltonian.p).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn initial(&self) -> InitialData {
        self.initial.clone().unwrap_or_else(|| self.scenario.default_initial())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |e: hjreg_core::Error| ConfigError(e.to_string());
        self.grid.validate().map_err(bad)?;
        self.hamiltonian.validate(self.grid.dim).map_err(bad)?;
        self.envelope()?;
        let p = self.hamiltonian.p;
        let n = self.grid.dim;
        for c in self.checks() {
            if c.needs_scope() && p >= n as f64 {
                return Err(ConfigError(format!(
                    "check `{}` needs p < N, but p = {p} and N = {n}",
                    c.name()
                )));
            }
        }
        if !(self.solver.c_cfl > 0.0 && self.solver.c_cfl <= 1.0) {
            return Err(ConfigError(format!("solver.c_cfl must lie in (0, 1], got {}", self.solver.c_cfl)));
        }
        if !(self.chain.alpha_dg > 0.0) {
            return Err(ConfigError(format!("chain.alpha_dg must be positive, got {}", self.chain.alpha_dg)));
        }
        if let InitialData::Trig { modes: 0, .. } = self.initial() {
            return Err(ConfigError("initial.modes must be at least 1".into()));
        }
        if self.scenario == Scenario::RoughEtaSweep {
            if !matches!(self.hamiltonian.kind, HamiltonianKind::RoughCoefficient { .. }) {
                return Err(ConfigError("rough-eta-sweep needs a rough-coefficient hamiltonian".into()));
            }
            if self.params.etas.is_empty() || self.params.etas.iter().any(|e| !(*e > 0.0)) {
                return Err(ConfigError("params.etas must be a nonempty list of positive periods".into()));
            }
        }
        if self.scenario == Scenario::HopfLaxValidation && self.params.refinements < 2 {
            return Err(ConfigError("hopf-lax-validation needs params.refinements >= 2".into()));
        }
        for (name, r) in [("shift_range", self.params.shift_range), ("amplitude_range", self.params.amplitude_range)] {
            if let Some((a, b)) = r {
                if !(a <= b) {
                    return Err(ConfigError(format!("params.{name} must be an ordered pair, got ({a}, {b})")));
                }
            }
        }
        Ok(())
    }
}
