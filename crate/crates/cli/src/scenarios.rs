//! Scenario catalog and the drivers that produce one member's results.

use std::collections::BTreeMap;
use std::time::Instant;

use hjreg_core::degiorgi::{bisect_largest, empirical_alpha_search, lemma_one_check, lemma_two_check};
use hjreg_core::hamiltonian::envelope_samples;
use hjreg_core::oscillation::{
    barrier_psi, build_constant_chain, build_constant_chain_unscoped, comparison_check, oscillation_above_check,
    oscillation_below_check, ConstantChain,
};
use hjreg_core::rescale::{theorem_check, OscillationRecord, TheoremOptions, TheoremReport};
use hjreg_core::solver::{gradient_bound, hopf_lax, residual_supersolution, search_radius};
use hjreg_core::verdict::{Outcome, VerdictBuilder};
use hjreg_core::{
    coercivity_check, solve, Cylinder, Error, HamiltonianKind, HamiltonianSpec, InitialData, Result, ScalarField,
    SolveConfig, MAX_DIM,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{ChainMode, CheckKind, ExperimentConfig};
use crate::report::CheckReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Custom,
    Zero,
    HopfLaxValidation,
    Lemma1Ensemble,
    RoughEtaSweep,
    KinkCascade,
    Barrier,
    PropAbove,
    PropBelow,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Custom,
        Scenario::Zero,
        Scenario::HopfLaxValidation,
        Scenario::Lemma1Ensemble,
        Scenario::RoughEtaSweep,
        Scenario::KinkCascade,
        Scenario::Barrier,
        Scenario::PropAbove,
        Scenario::PropBelow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Custom => "custom",
            Scenario::Zero => "zero",
            Scenario::HopfLaxValidation => "hopf-lax-validation",
            Scenario::Lemma1Ensemble => "lemma1-ensemble",
            Scenario::RoughEtaSweep => "rough-eta-sweep",
            Scenario::KinkCascade => "kink-cascade",
            Scenario::Barrier => "barrier",
            Scenario::PropAbove => "prop-above",
            Scenario::PropBelow => "prop-below",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Custom => "solve the configured problem and run the listed checks",
            Scenario::Zero => "zero initial data; every check holds trivially",
            Scenario::HopfLaxValidation => "refinement study of the solver against the Hopf-Lax formula",
            Scenario::Lemma1Ensemble => "random data scaled so the positive mass meets the lemma1 threshold",
            Scenario::RoughEtaSweep => "Holder estimates for checkerboard coefficients of decreasing period",
            Scenario::KinkCascade => "zoom cascades on kink-forming sine data",
            Scenario::Barrier => "residual of the lower barrier and comparison against a solver run",
            Scenario::PropAbove => "random data for the rescaled subsolution, checked from above",
            Scenario::PropBelow => "random data for the rescaled supersolution, checked from below",
        }
    }

    pub fn default_checks(self) -> Vec<CheckKind> {
        use CheckKind::*;
        match self {
            Scenario::Custom => vec![],
            Scenario::Zero => vec![Lemma1, Lemma2, OscAbove, OscBelow, Cascade],
            Scenario::HopfLaxValidation | Scenario::Barrier | Scenario::RoughEtaSweep => vec![],
            Scenario::Lemma1Ensemble => vec![Lemma1],
            Scenario::KinkCascade => vec![Theorem],
            Scenario::PropAbove => vec![OscAbove],
            Scenario::PropBelow => vec![OscBelow],
        }
    }

    pub fn default_initial(self) -> InitialData {
        match self {
            Scenario::HopfLaxValidation => InitialData::Cone { slope: 1.0, offset: 0.0 },
            Scenario::KinkCascade | Scenario::RoughEtaSweep => {
                InitialData::Sine { amplitude: 1.0, frequency: std::f64::consts::PI, shift: 0.0 }
            }
            Scenario::Lemma1Ensemble => InitialData::Trig {
                seed: 0,
                amplitude: 1.0,
                modes: 3,
                frequency: 1.0,
                shift: -3.0,
                positive_part: true,
                clip: None,
            },
            _ => InitialData::Zero,
        }
    }

    /// Whether the seed changes the result.
    pub fn randomized(self) -> bool {
        matches!(self, Scenario::Lemma1Ensemble | Scenario::PropAbove | Scenario::PropBelow | Scenario::Custom)
    }
}

/// Results of one scenario evaluation.
#[derive(Debug, Default)]
pub struct MemberOutput {
    pub checks: Vec<CheckReport>,
    pub chain: Option<ConstantChain>,
    pub extras: Map<String, Value>,
    pub field: Option<ScalarField>,
    pub cascades: Vec<(String, Vec<OscillationRecord>)>,
    pub timings: BTreeMap<String, f64>,
}

struct Clock(Instant);

impl Clock {
    fn start() -> Self {
        Clock(Instant::now())
    }

    fn lap(&mut self, out: &mut MemberOutput, key: &str) {
        *out.timings.entry(format!("{key}_s")).or_default() += self.0.elapsed().as_secs_f64();
        self.0 = Instant::now();
    }
}

fn chain_for(cfg: &ExperimentConfig, alpha: f64) -> Result<ConstantChain> {
    let (n, p, lam) = (cfg.grid.dim, cfg.hamiltonian.p, cfg.envelope.lambda);
    if p < n as f64 {
        build_constant_chain(n, p, lam, alpha)
    } else {
        build_constant_chain_unscoped(n, p, lam, alpha)
    }
}

fn solve_with(cfg: &ExperimentConfig, h: &HamiltonianSpec, initial: InitialData) -> Result<ScalarField> {
    let sc = SolveConfig {
        grid: cfg.grid.clone(),
        hamiltonian: h.clone(),
        envelope: cfg.envelope().map_err(|e| Error::InvalidArgument(e.0))?,
        initial,
        c_cfl: cfg.solver.c_cfl,
        sigma: cfg.solver.sigma,
    };
    Ok(solve(&sc)?.field)
}

fn reseed(data: InitialData, seed: u64) -> InitialData {
    match data {
        InitialData::Trig { amplitude, modes, frequency, shift, positive_part, clip, .. } => {
            InitialData::Trig { seed, amplitude, modes, frequency, shift, positive_part, clip }
        }
        other => other,
    }
}

fn theorem_details(rep: &TheoremReport) -> Value {
    let points: Vec<Value> = rep
        .points
        .iter()
        .map(|p| {
            json!({
                "t0": p.t0,
                "x0": p.x0,
                "alpha_est": p.estimate.alpha_est,
                "C_est": p.estimate.c_est,
                "fit_residual": p.estimate.fit_residual,
                "points_used": p.estimate.points_used,
                "degenerate": p.estimate.degenerate,
                "value_scale": p.value_scale,
                "max_quotient": p.max_quotient,
                "satisfied": p.all_satisfied,
            })
        })
        .collect();
    json!({
        "delta_time": rep.delta_time,
        "alpha_min": rep.alpha_min,
        "alpha_mean": rep.alpha_mean,
        "alpha_theory": rep.alpha_theory,
        "max_quotient": rep.max_quotient,
        "all_satisfied": rep.all_satisfied,
        "points": points,
    })
}

fn theorem_outcome(rep: &TheoremReport) -> Outcome {
    if rep.all_satisfied {
        Outcome::Holds
    } else {
        Outcome::Refuted
    }
}

/// Runs the configured checks on `field`, solved with `base`.
fn run_checks(
    cfg: &ExperimentConfig,
    field: &ScalarField,
    base: &HamiltonianSpec,
    checks: &[CheckKind],
    out: &mut MemberOutput,
) -> Result<()> {
    let env = cfg.envelope().map_err(|e| Error::InvalidArgument(e.0))?;
    let mut alpha = cfg.chain.alpha_dg;
    if cfg.chain.mode == ChainMode::Empirical && cfg.hamiltonian.p < cfg.grid.dim as f64 {
        let search = empirical_alpha_search(std::slice::from_ref(field), &env, cfg.tolerances.lemma2_delta)?;
        if let Some(a) = search.alpha {
            alpha = a * (1.0 - 1e-9);
        }
        out.extras.insert("alpha_search".into(), serde_json::to_value(&search)?);
    }
    if out.chain.is_none() && checks.iter().any(|c| c.needs_chain()) {
        out.chain = Some(chain_for(cfg, alpha)?);
    }
    for &c in checks {
        let report = match c {
            CheckKind::Lemma1 => {
                CheckReport::from_verdict("lemma1", lemma_one_check(field, &env, cfg.tolerances.lemma1_delta)?)
            }
            CheckKind::Lemma2 => {
                CheckReport::from_verdict("lemma2", lemma_two_check(field, &env, alpha, cfg.tolerances.lemma2_delta)?)
            }
            CheckKind::OscAbove => {
                CheckReport::from_verdict("osc_above", oscillation_above_check(field, out.chain.as_ref().unwrap())?)
            }
            CheckKind::OscBelow => {
                CheckReport::from_verdict("osc_below", oscillation_below_check(field, out.chain.as_ref().unwrap())?)
            }
            CheckKind::Cascade | CheckKind::Theorem => {
                let mut opts = cfg.cascade.options();
                if c == CheckKind::Cascade {
                    opts = TheoremOptions { lattice: 1, times: 1, ..opts };
                }
                let chain = out.chain.as_ref().unwrap();
                let rep = theorem_check(field, base, cfg.cascade.delta_for(&cfg.grid), chain, &opts)?;
                for (k, p) in rep.points.iter().enumerate() {
                    let name = if c == CheckKind::Cascade { "center".to_string() } else { format!("point-{k:03}") };
                    out.cascades.push((name, p.records.clone()));
                }
                CheckReport {
                    name: c.name().into(),
                    outcome: theorem_outcome(&rep),
                    verdict: None,
                    details: Some(theorem_details(&rep)),
                }
            }
        };
        out.checks.push(report);
    }
    Ok(())
}

/// Evaluates the scenario once with the given seed.
pub fn run_member(cfg: &ExperimentConfig, seed: u64) -> Result<MemberOutput> {
    let mut out = MemberOutput::default();
    let mut clock = Clock::start();
    let checks = cfg.checks();
    match cfg.scenario {
        Scenario::Custom | Scenario::Zero | Scenario::KinkCascade => {
            let field = solve_with(cfg, &cfg.hamiltonian, reseed(cfg.initial(), seed))?;
            clock.lap(&mut out, "solve");
            run_checks(cfg, &field, &cfg.hamiltonian, &checks, &mut out)?;
            clock.lap(&mut out, "checks");
            out.field = Some(field);
        }
        Scenario::HopfLaxValidation => {
            let study = refinement_study(cfg)?;
            clock.lap(&mut out, "solve");
            out.extras.insert("refinement".into(), study);
        }
        Scenario::Lemma1Ensemble => {
            let (field, amplitude, mass) = lemma1_member(cfg, seed)?;
            clock.lap(&mut out, "solve");
            out.extras.insert("amplitude".into(), json!(amplitude));
            out.extras.insert("positive_mass".into(), json!(mass));
            run_checks(cfg, &field, &cfg.hamiltonian, &checks, &mut out)?;
            clock.lap(&mut out, "checks");
            out.field = Some(field);
        }
        Scenario::RoughEtaSweep => {
            rough_sweep(cfg, seed, &mut out)?;
            clock.lap(&mut out, "sweep");
        }
        Scenario::Barrier => {
            barrier(cfg, &mut out)?;
            clock.lap(&mut out, "solve");
            let field = out.field.take().unwrap();
            run_checks(cfg, &field, &cfg.hamiltonian, &checks, &mut out)?;
            out.field = Some(field);
        }
        Scenario::PropAbove | Scenario::PropBelow => {
            let field = prop_member(cfg, seed, &mut out)?;
            clock.lap(&mut out, "solve");
            let h = prop_hamiltonian(cfg.scenario, out.chain.as_ref().unwrap());
            run_checks(cfg, &field, &h, &checks, &mut out)?;
            clock.lap(&mut out, "checks");
            out.field = Some(field);
        }
    }
    Ok(out)
}

fn refinement_study(cfg: &ExperimentConfig) -> Result<Value> {
    let p = cfg.hamiltonian.p;
    let initial = cfg.initial();
    let profile = initial.profile(cfg.grid.dim)?;
    let t = cfg.grid.t1 - cfg.grid.t0;
    let mut widths = Vec::new();
    let mut errors = Vec::new();
    for level in 0..cfg.params.refinements {
        let mut grid = cfg.grid.clone();
        grid.cells = cfg.grid.cells << level;
        let sub = ExperimentConfig { grid: grid.clone(), ..cfg.clone() };
        let field = solve_with(&sub, &cfg.hamiltonian, initial.clone())?;
        let last = grid.n_slices() - 1;
        let u0 = initial.sample(&grid)?;
        let lip = match initial {
            InitialData::Cone { slope, .. } => slope.abs(),
            _ => gradient_bound(&grid, &u0),
        };
        let radius = search_radius(lip, t, p);
        let oracle = |x: &[f64]| profile.eval(x);
        let interior = 0.5 * grid.half_width;
        let err = (0..grid.slice_len())
            .into_par_iter()
            .map(|j| {
                let x = grid.center_vec(j);
                if x.iter().any(|v| v.abs() > interior) {
                    return Ok(0.0);
                }
                let exact = hopf_lax(&oracle, t, &x, p, radius)?;
                Ok((field.value(last, j) - exact).abs())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        widths.push(grid.cell_width());
        errors.push(err);
    }
    let orders: Vec<f64> = errors.windows(2).zip(widths.windows(2)).map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()).collect();
    let monotone = errors.windows(2).all(|e| e[1] < e[0]);
    let order_min = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(json!({
        "cell_widths": widths,
        "errors": errors,
        "orders": orders,
        "order_min": order_min,
        "monotone": monotone,
        "final_error": errors.last(),
    }))
}

fn trig_template(cfg: &ExperimentConfig) -> (usize, f64) {
    match cfg.initial() {
        InitialData::Trig { modes, frequency, .. } => (modes, frequency),
        _ => (cfg.params.modes, 1.0),
    }
}

/// Largest amplitude `s` of `-3 + s g_+` whose positive mass on `[0,2] x B(1)`
/// stays within the lemma1 threshold.
fn lemma1_member(cfg: &ExperimentConfig, seed: u64) -> Result<(ScalarField, f64, f64)> {
    let (modes, frequency) = trig_template(cfg);
    let data = |s: f64| InitialData::Trig { seed, amplitude: s, modes, frequency, shift: -3.0, positive_part: true, clip: None };
    let unit = Cylinder::centered(0.0, 2.0, cfg.grid.dim, 1.0)?;
    let delta = cfg.tolerances.lemma1_delta;
    let mass_of = |s: f64| -> Result<f64> { solve_with(cfg, &cfg.hamiltonian, data(s))?.integrate(&unit, |v| v.max(0.0)) };
    let s = bisect_largest(|s| Ok(mass_of(s)? <= delta), 0.0, cfg.params.bisect_hi, cfg.params.bisect_iters)?;
    let field = solve_with(cfg, &cfg.hamiltonian, data(s))?;
    let mass = field.integrate(&unit, |v| v.max(0.0))?;
    Ok((field, s, mass))
}

fn rough_sweep(cfg: &ExperimentConfig, seed: u64, out: &mut MemberOutput) -> Result<()> {
    let HamiltonianKind::RoughCoefficient { lambda, .. } = cfg.hamiltonian.kind else {
        return Err(Error::InvalidArgument("rough-eta-sweep needs a rough-coefficient hamiltonian".into()));
    };
    let env = cfg.envelope().map_err(|e| Error::InvalidArgument(e.0))?;
    let chain = chain_for(cfg, cfg.chain.alpha_dg)?;
    let samples = envelope_samples(
        cfg.grid.dim,
        cfg.params.coercivity_samples,
        (cfg.grid.t0, cfg.grid.t1),
        cfg.grid.half_width,
        10.0,
        seed,
    );
    let opts = cfg.cascade.options();
    let mut rows = Vec::new();
    for &eta in &cfg.params.etas {
        let h = HamiltonianSpec { kind: HamiltonianKind::RoughCoefficient { lambda, eta }, ..cfg.hamiltonian.clone() };
        let coer = coercivity_check(&h, &env, &samples)?;
        let field = solve_with(cfg, &h, cfg.initial())?;
        let rep = theorem_check(&field, &h, cfg.cascade.delta_for(&cfg.grid), &chain, &opts)?;
        rows.push(json!({
            "eta": eta,
            "alpha_min": rep.alpha_min,
            "alpha_mean": rep.alpha_mean,
            "max_quotient": rep.max_quotient,
            "coercivity_violations": coer.violations.len(),
            "coercivity_margin": coer.margin,
        }));
        out.checks.push(CheckReport {
            name: format!("theorem[eta={eta}]"),
            outcome: theorem_outcome(&rep),
            verdict: None,
            details: Some(theorem_details(&rep)),
        });
    }
    let mins: Vec<f64> = rows.iter().map(|r| r["alpha_min"].as_f64().unwrap()).collect();
    let lo = mins.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.extras.insert("sweep".into(), Value::Array(rows));
    out.extras.insert("alpha_min_ratio".into(), json!(hi / lo));
    out.chain = Some(chain);
    Ok(())
}

/// Barrier residual away from its kinks plus a comparison run started from `psi(-2, .)`.
fn barrier(cfg: &ExperimentConfig, out: &mut MemberOutput) -> Result<()> {
    let chain = chain_for(cfg, cfg.chain.alpha_dg)?;
    let a = chain.super_coefficient();
    let p = cfg.hamiltonian.p;
    let h = HamiltonianSpec::scaled(a, p, 0.0);
    let field = solve_with(cfg, &h, InitialData::Barrier { lambda1: chain.lambda1, q: chain.q })?;
    let cw = cfg.grid.cell_width();
    let slack = cfg.tolerances.barrier_cells * cw;
    let psi = ScalarField::from_fn(cfg.grid.clone(), |t, x| barrier_psi(&chain, t, x))?;
    let res = residual_supersolution(&psi, a, p);
    let spec = psi.spec().clone();
    let switch = |t: f64| 1.0 - chain.lambda1 * (1.0 + (t + 2.0) / 8.0) / chain.q;
    let summary = res.summary_where(|i, j| {
        let mut x = [0.0; MAX_DIM];
        spec.center(j, &mut x);
        let r = x[..spec.dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        let near = |t: f64| (r - switch(t)).abs() < 2.0 * cw;
        r >= 2.0 * cw && !near(spec.time(i)) && !near(spec.time((i + 1).min(spec.n_slices() - 1)))
    });
    let cmp = comparison_check(&field, &chain)?;
    let mut b = VerdictBuilder::new("barrier", cw);
    b.hypothesis("initial_margin", 0.0, true);
    b.conclusion("residual_max_abs", summary.max_abs, summary.max_abs <= slack);
    b.conclusion("min_margin", cmp.min_margin, cmp.min_margin >= -slack);
    b.tolerance("slack", slack);
    b.diagnostic("violating_cells", cmp.violating_cells as f64);
    b.diagnostic("residual_cells", summary.cells as f64);
    b.diagnostic("A", a);
    out.checks.push(CheckReport::from_verdict("barrier", b.finish()));
    out.extras.insert("comparison".into(), serde_json::to_value(&cmp)?);
    out.chain = Some(chain);
    out.field = Some(field);
    Ok(())
}

fn prop_hamiltonian(scenario: Scenario, chain: &ConstantChain) -> HamiltonianSpec {
    if scenario == Scenario::PropAbove {
        let (a1, b1) = chain.sub_coefficients();
        HamiltonianSpec::scaled(a1, chain.p, -b1)
    } else {
        HamiltonianSpec::scaled(chain.super_coefficient(), chain.p, 0.0)
    }
}

fn prop_member(cfg: &ExperimentConfig, seed: u64, out: &mut MemberOutput) -> Result<ScalarField> {
    let chain = chain_for(cfg, cfg.chain.alpha_dg)?;
    let above = cfg.scenario == Scenario::PropAbove;
    let (shift_range, amp_range, clip) = if above {
        let b1 = chain.sub_coefficients().1;
        (cfg.params.shift_range.unwrap_or((-1.5, 0.5)), cfg.params.amplitude_range.unwrap_or((0.5, 3.0)), (-8.0, 2.0 - 4.0 * b1))
    } else {
        (cfg.params.shift_range.unwrap_or((-0.2, 1.2)), cfg.params.amplitude_range.unwrap_or((0.2, 1.0)), (-2.0, 2.0))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, (a, b): (f64, f64)| if a == b { a } else { rng.gen_range(a..b) };
    let shift = draw(&mut rng, shift_range);
    let amplitude = draw(&mut rng, amp_range);
    let (modes, frequency) = trig_template(cfg);
    let initial = InitialData::Trig { seed, amplitude, modes, frequency, shift, positive_part: false, clip: Some(clip) };
    let h = prop_hamiltonian(cfg.scenario, &chain);
    let field = solve_with(cfg, &h, initial)?;
    out.extras.insert("shift".into(), json!(shift));
    out.extras.insert("amplitude".into(), json!(amplitude));
    out.chain = Some(chain);
    Ok(field)
}
