//! Zoom cascade: initial rescale, recentring, the affine recurrence
//! `u_{m+1}(t, x) = kappa (u_m(s t, eps1 x) - d_m)` with `s = eps1^{alpha1}`,
//! per-scale oscillation records and Holder exponent estimates.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{oscillation, Cylinder, GridSpec, ScalarField, MAX_DIM};
use crate::hamiltonian::{HamiltonianKind, HamiltonianSpec};
use crate::oscillation::{ConstantChain, POINTWISE_TOL};
use crate::solver::{gradient_bound, solve_from, SigmaMode};

/// Affine change of variables relative to a base solution `u`:
/// `level(t, x) = v_scale * u(t_origin + t_scale t, x_origin + x_scale x) - v_offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t_origin: f64,
    pub t_scale: f64,
    pub x_origin: Vec<f64>,
    pub x_scale: f64,
    pub v_scale: f64,
    pub v_offset: f64,
}

impl Frame {
    pub fn identity(dim: usize) -> Self {
        Self { t_origin: 0.0, t_scale: 1.0, x_origin: vec![0.0; dim], x_scale: 1.0, v_scale: 1.0, v_offset: 0.0 }
    }

    /// Frame of `g(t, x) = v (self(ts t, xs x)) - vo`.
    pub fn compose(&self, ts: f64, xs: f64, v: f64, vo: f64) -> Self {
        Self {
            t_origin: self.t_origin,
            t_scale: self.t_scale * ts,
            x_origin: self.x_origin.clone(),
            x_scale: self.x_scale * xs,
            v_scale: self.v_scale * v,
            v_offset: v * self.v_offset + vo,
        }
    }

    /// Hamiltonian solved by the level field when `u` solves `base`.
    pub fn hamiltonian(&self, base: &HamiltonianSpec) -> HamiltonianSpec {
        HamiltonianSpec {
            kind: HamiltonianKind::Rescaled {
                inner: Box::new(base.clone()),
                value_scale: self.v_scale * self.t_scale,
                time_origin: self.t_origin,
                time_scale: self.t_scale,
                space_origin: self.x_origin.clone(),
                space_scale: self.x_scale,
                gradient_scale: 1.0 / (self.v_scale * self.x_scale),
            },
            p: base.p,
            offset: 0.0,
        }
    }

    /// Maps level coordinates to base coordinates.
    pub fn to_base(&self, t: f64, x: &[f64], out: &mut [f64]) -> f64 {
        for (a, o) in out.iter_mut().enumerate().take(x.len()) {
            *o = self.x_origin[a] + self.x_scale * x[a];
        }
        self.t_origin + self.t_scale * t
    }
}

/// Fills `spec` node by node; the first error aborts.
fn build(spec: GridSpec, mut g: impl FnMut(f64, &[f64]) -> Result<f64>) -> Result<ScalarField> {
    let mut values = Vec::with_capacity(spec.len());
    let mut x = [0.0; MAX_DIM];
    for i in 0..spec.n_slices() {
        let t = spec.time(i);
        for j in 0..spec.slice_len() {
            spec.center(j, &mut x);
            values.push(g(t, &x[..spec.dim])?);
        }
    }
    ScalarField::new(spec, values)
}

/// Resamples `f` onto `spec` by multilinear interpolation; `f` must cover every node.
pub fn resample(f: &ScalarField, spec: GridSpec, to_source: impl Fn(f64, &[f64], &mut [f64]) -> f64) -> Result<ScalarField> {
    let dim = spec.dim;
    let mut y = [0.0; MAX_DIM];
    build(spec, |t, x| {
        let s = to_source(t, x, &mut y[..dim]);
        f.sample(s, &y[..dim]).ok_or_else(|| {
            Error::DomainMismatch(format!("resampling needs f at t = {s}, x = {:?}, outside its lattice", &y[..dim]))
        })
    })
}

/// `u1(t, x) = f(eps^a t, eps x)` on the stretched lattice
/// `[t0 / eps^a, t1 / eps^a] x (box / eps)` with the same node count.
pub fn initial_rescale(f: &ScalarField, chain: &ConstantChain) -> Result<ScalarField> {
    let spec = f.spec();
    if spec.dim != chain.n {
        return Err(Error::DomainMismatch(format!("field dimension {} but chain built for N = {}", spec.dim, chain.n)));
    }
    if spec.t0 > -4.0 + 1e-9 * spec.time_step() || spec.t1 < 0.0 || spec.half_width < 1.0 {
        return Err(Error::DomainMismatch(format!(
            "initial rescale needs f on [-4, 0] x B(1), got [{}, {}] x [-{}, {}]^N",
            spec.t0, spec.t1, spec.half_width, spec.half_width
        )));
    }
    let ts = chain.eps.powf(chain.a_exp);
    let xs = chain.eps;
    let out = GridSpec::new(spec.dim, spec.half_width / xs, spec.cells, spec.t0 / ts, spec.t1 / ts, spec.dt / ts)?;
    resample(f, out, |t, x, y| {
        for (ya, xa) in y.iter_mut().zip(x) {
            *ya = xs * xa;
        }
        ts * t
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recenter {
    pub d: f64,
    /// `max |f - d|` over `[-1, 0] x B(1/2)`.
    pub bound: f64,
    pub min: f64,
    pub max: f64,
}

fn window() -> (f64, f64, f64) {
    (-1.0, 0.0, 0.5)
}

/// Clamped range midpoint over `[-1, 0] x B(1/2)`; fails when no
/// `|d| <= lambda_tilde/2` gives `|f - d| <= 2 - lambda_tilde/2`.
pub fn select_recenter(f: &ScalarField, chain: &ConstantChain) -> Result<Recenter> {
    let (lo, hi, r) = window();
    let (min, max) = f.extrema(&Cylinder::centered(lo, hi, f.spec().dim, r)?)?;
    let half = 0.5 * chain.lambda_tilde;
    let d = (0.5 * (min + max)).clamp(-half, half);
    let bound = (max - d).max(d - min);
    if bound > 2.0 - half + POINTWISE_TOL {
        return Err(Error::Precondition(format!(
            "no admissible recentring: range [{min}, {max}] on [-1,0] x B(1/2) gives |f - d| = {bound} > 2 - lambda_tilde/2 with d = {d}"
        )));
    }
    Ok(Recenter { d, bound, min, max })
}

/// Checks `|f| <= 2` on `[-1/s, 0] x B(1/(2 eps1))` and
/// `|f| <= 2 + q (|x| - 1)_+` everywhere on the lattice.
pub fn check_envelope(f: &ScalarField, chain: &ConstantChain) -> Result<()> {
    let spec = f.spec();
    let t_inner = -1.0 / chain.time_factor();
    let r_inner = 0.5 / chain.eps1;
    let mut x = [0.0; MAX_DIM];
    for i in 0..spec.n_slices() {
        let t = spec.time(i);
        for (j, &v) in f.slice(i).iter().enumerate() {
            spec.center(j, &mut x);
            let r = x[..spec.dim].iter().map(|a| a * a).sum::<f64>().sqrt();
            let mut bound = 2.0 + chain.q * (r - 1.0).max(0.0);
            if t >= t_inner && r < r_inner {
                bound = bound.min(2.0);
            }
            if v.abs() > bound + POINTWISE_TOL {
                return Err(Error::EnvelopeViolated { t, x: x[..spec.dim].to_vec(), value: v.abs(), bound });
            }
        }
    }
    Ok(())
}

/// One zoom by interpolation on the lattice of `f`.
pub fn zoom_step(f: &ScalarField, d: f64, chain: &ConstantChain) -> Result<ScalarField> {
    let s = chain.time_factor();
    let e1 = chain.eps1;
    let lt = chain.lambda_tilde;
    let spec = f.spec().clone();
    let dim = spec.dim;
    let mut y = [0.0; MAX_DIM];
    let out = build(spec, |t, x| {
        for a in 0..dim {
            y[a] = e1 * x[a];
        }
        let v = f.sample_offset(s * t, &y[..dim], d).ok_or_else(|| {
            Error::DomainMismatch(format!("zoom needs f at t = {}, x = {:?}, outside its lattice", s * t, &y[..dim]))
        })?;
        Ok(4.0 * v / (4.0 - lt))
    })?;
    check_envelope(&out, chain)?;
    Ok(out)
}

/// How each zoom level is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CascadeMode {
    /// Interpolate the previous level on a fixed lattice.
    Interpolate,
    /// Re-solve every level over `[-1, 0]` with the rescaled Hamiltonian,
    /// at `cells_per_unit` in level coordinates, so the physical cell width
    /// shrinks like `eps1^m`.
    Resolve { cells_per_unit: usize, slices: usize, c_cfl: f64 },
}

impl Default for CascadeMode {
    fn default() -> Self {
        CascadeMode::Resolve { cells_per_unit: 16, slices: 16, c_cfl: 0.45 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationRecord {
    pub m: u32,
    /// `Q_m = [-eps1^{m alpha1}, 0] x B(eps1^m / 2)` in the coordinates of `u1`.
    pub cylinder: Cylinder,
    pub osc_measured: f64,
    pub osc_bound: f64,
    pub d_m: f64,
    pub satisfied: bool,
}

impl OscillationRecord {
    pub fn radius(&self) -> f64 {
        self.cylinder.radius
    }

    pub fn t_depth(&self) -> f64 {
        -self.cylinder.t_lo
    }
}

/// Records gathered before a cascade step failed.
#[derive(Debug)]
pub struct CascadeFailure {
    pub records: Vec<OscillationRecord>,
    pub error: Error,
}

impl std::fmt::Display for CascadeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cascade aborted after {} records: {}", self.records.len(), self.error)
    }
}

impl std::error::Error for CascadeFailure {}

/// Base problem for re-solving; `frame` maps `u1` to the base solution.
#[derive(Debug, Clone)]
pub struct BaseProblem<'a> {
    pub hamiltonian: &'a HamiltonianSpec,
    pub frame: Frame,
}

const LEVEL0_HALF_WIDTH: f64 = 1.25;
const MAX_LEVEL_HALF_WIDTH: f64 = 8.0;

fn level0_spec(dim: usize, mode: &CascadeMode) -> Result<GridSpec> {
    let per_unit = match mode {
        CascadeMode::Interpolate => 16,
        CascadeMode::Resolve { cells_per_unit, .. } => *cells_per_unit,
    };
    let cells = ((2.0 * LEVEL0_HALF_WIDTH * per_unit as f64).ceil() as usize).max(4);
    GridSpec::with_steps(dim, LEVEL0_HALF_WIDTH, cells, -4.0, 0.0, 4 * per_unit.max(4))
}

fn record(f: &ScalarField, m: u32, chain: &ConstantChain, d: f64) -> Result<OscillationRecord> {
    let (lo, hi, r) = window();
    let dim = f.spec().dim;
    let osc = oscillation(f, &Cylinder::centered(lo, hi, dim, r)?)? / chain.kappa().powi(m as i32);
    let bound = chain.osc_bound(m);
    let depth = chain.time_factor().powi(m as i32);
    let radius = 0.5 * chain.eps1.powi(m as i32);
    Ok(OscillationRecord {
        m,
        cylinder: Cylinder::centered(-depth, 0.0, dim, radius)?,
        osc_measured: osc,
        osc_bound: bound,
        d_m: d,
        satisfied: osc <= bound + POINTWISE_TOL,
    })
}

fn resolve_level(
    prev: &ScalarField,
    d: f64,
    chain: &ConstantChain,
    base: &BaseProblem<'_>,
    frame: &Frame,
    cells_per_unit: usize,
    slices: usize,
    c_cfl: f64,
) -> Result<ScalarField> {
    let s = chain.time_factor();
    let e1 = chain.eps1;
    let kappa = chain.kappa();
    let h = frame.hamiltonian(base.hamiltonian);
    let g_prev = (0..prev.spec().n_slices()).map(|i| gradient_bound(prev.spec(), prev.slice(i))).fold(0.0, f64::max);
    let speed = h.slope_bound(1.5 * kappa * e1 * g_prev);
    let hw = 1.0 / cells_per_unit as f64;
    // domain of dependence of B(1/2) over a unit time, kept inside the lattice
    let r = (0.5 + 1.25 * speed + 3.0 * hw).clamp(LEVEL0_HALF_WIDTH, MAX_LEVEL_HALF_WIDTH);
    let cells = ((2.0 * r * cells_per_unit as f64).ceil() as usize).max(4);
    let spec = GridSpec::with_steps(prev.spec().dim, r, cells, -1.0, 0.0, slices.max(1))?;
    let dim = spec.dim;
    let mut y = [0.0; MAX_DIM];
    let mut x = [0.0; MAX_DIM];
    let mut u0 = Vec::with_capacity(spec.slice_len());
    for j in 0..spec.slice_len() {
        spec.center(j, &mut x);
        for a in 0..dim {
            y[a] = e1 * x[a];
        }
        let v = prev.sample_offset(-s, &y[..dim], d).ok_or_else(|| {
            Error::DomainMismatch(format!("level data needs the previous level at x = {:?}", &y[..dim]))
        })?;
        u0.push(kappa * v);
    }
    let traj = solve_from(&spec, &h, c_cfl, SigmaMode::default(), u0)?;
    check_envelope(&traj.field, chain)?;
    Ok(traj.field)
}

/// Runs `zooms` recentring-plus-zoom steps starting from `u1`, which must
/// cover `[-4, 0] x B(1.25)`. `base` is required in re-solve mode.
pub fn zoom_cascade(
    u1: &ScalarField,
    chain: &ConstantChain,
    zooms: u32,
    mode: CascadeMode,
    base: Option<&BaseProblem<'_>>,
) -> std::result::Result<Vec<OscillationRecord>, CascadeFailure> {
    let mut records = Vec::new();
    macro_rules! tryc {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(error) => return Err(CascadeFailure { records, error }),
            }
        };
    }
    let dim = u1.spec().dim;
    if dim != chain.n {
        tryc!(Err(Error::DomainMismatch(format!("field dimension {dim} but chain built for N = {}", chain.n))));
    }
    let spec0 = tryc!(level0_spec(dim, &mode));
    let mut level = tryc!(resample(u1, spec0, |t, x, y| {
        y.copy_from_slice(x);
        t
    }));
    if let Some(bad) = level.values().iter().find(|v| v.abs() > 2.0 + POINTWISE_TOL) {
        tryc!(Err(Error::Precondition(format!("|u1| <= 2 fails on [-4, 0] x box: found {bad}"))));
    }
    let mut frame = base.map(|b| b.frame.clone());
    for m in 0..=zooms {
        let rc = tryc!(select_recenter(&level, chain));
        records.push(tryc!(record(&level, m, chain, rc.d)));
        if m == zooms {
            break;
        }
        level = match mode {
            CascadeMode::Interpolate => tryc!(zoom_step(&level, rc.d, chain)),
            CascadeMode::Resolve { cells_per_unit, slices, c_cfl } => {
                let Some(b) = base else {
                    tryc!(Err(Error::InvalidArgument("re-solve mode needs the base Hamiltonian".into())))
                };
                let kappa = chain.kappa();
                let next = frame.as_ref().unwrap().compose(chain.time_factor(), chain.eps1, kappa, kappa * rc.d);
                let f = tryc!(resolve_level(&level, rc.d, chain, b, &next, cells_per_unit, slices, c_cfl));
                frame = Some(next);
                f
            }
        };
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub alpha_est: f64,
    #[serde(rename = "C_est")]
    pub c_est: f64,
    pub fit_residual: f64,
    pub radius_min: f64,
    pub radius_max: f64,
    pub points_used: usize,
    pub alpha_theory: f64,
    /// Fewer than three positive oscillations: reported as smooth (`alpha_est = 1`).
    pub degenerate: bool,
}

/// Least-squares slope of `log osc` against `log radius`.
pub fn holder_estimate(records: &[OscillationRecord], chain: &ConstantChain) -> HolderEstimate {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.osc_measured > 0.0 && r.osc_measured.is_finite())
        .map(|r| (r.radius().ln(), r.osc_measured.ln()))
        .collect();
    let radius_min = records.iter().map(|r| r.radius()).fold(f64::INFINITY, f64::min);
    let radius_max = records.iter().map(|r| r.radius()).fold(0.0, f64::max);
    if pts.len() < 3 {
        return HolderEstimate {
            alpha_est: 1.0,
            c_est: 0.0,
            fit_residual: 0.0,
            radius_min,
            radius_max,
            points_used: pts.len(),
            alpha_theory: chain.alpha_h,
            degenerate: true,
        };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    HolderEstimate {
        alpha_est: slope,
        c_est: icpt.exp(),
        fit_residual: (rss / n).sqrt(),
        radius_min,
        radius_max,
        points_used: pts.len(),
        alpha_theory: chain.alpha_h,
        degenerate: false,
    }
}

pub fn write_cascade_csv(records: &[OscillationRecord], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "m,radius,t_depth,osc_measured,osc_bound,d_m,satisfied")?;
    for r in records {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.m,
            r.radius(),
            r.t_depth(),
            r.osc_measured,
            r.osc_bound,
            r.d_m,
            r.satisfied
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremOptions {
    #[serde(default = "default_zooms")]
    pub zooms: u32,
    /// Base points per spatial axis.
    #[serde(default = "default_lattice")]
    pub lattice: usize,
    /// Base points cover `[-w L, w L]^N`.
    #[serde(default = "default_window")]
    pub window: f64,
    /// Number of base times, evenly spaced in `[delta, T]` (only `T` when 1).
    #[serde(default = "default_times")]
    pub times: usize,
    /// Exponent used for the reported Holder quotients.
    #[serde(default = "default_alpha_ref")]
    pub alpha_ref: f64,
    #[serde(default)]
    pub mode: CascadeMode,
}

fn default_zooms() -> u32 {
    6
}
fn default_lattice() -> usize {
    5
}
fn default_window() -> f64 {
    0.5
}
fn default_times() -> usize {
    1
}
fn default_alpha_ref() -> f64 {
    0.5
}

impl Default for TheoremOptions {
    fn default() -> Self {
        Self {
            zooms: default_zooms(),
            lattice: default_lattice(),
            window: default_window(),
            times: default_times(),
            alpha_ref: default_alpha_ref(),
            mode: CascadeMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePointReport {
    pub t0: f64,
    pub x0: Vec<f64>,
    /// Value scale applied so that `|u1| <= 2`.
    pub value_scale: f64,
    pub estimate: HolderEstimate,
    pub max_quotient: f64,
    pub all_satisfied: bool,
    pub records: Vec<OscillationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub delta_time: f64,
    pub alpha_min: f64,
    pub alpha_mean: f64,
    pub alpha_theory: f64,
    pub max_quotient: f64,
    pub all_satisfied: bool,
    pub points: Vec<BasePointReport>,
}

fn base_points(spec: &GridSpec, delta: f64, opts: &TheoremOptions) -> Vec<(f64, Vec<f64>)> {
    let times: Vec<f64> = if opts.times <= 1 {
        vec![spec.t1]
    } else {
        (0..opts.times).map(|k| delta + (spec.t1 - delta) * k as f64 / (opts.times - 1) as f64).collect()
    };
    let w = opts.window * spec.half_width;
    let axis: Vec<f64> = if opts.lattice <= 1 {
        vec![0.0]
    } else {
        (0..opts.lattice).map(|k| -w + 2.0 * w * k as f64 / (opts.lattice - 1) as f64).collect()
    };
    let count = axis.len().pow(spec.dim as u32);
    let mut out = Vec::new();
    for &t in &times {
        for mut k in 0..count {
            let mut x = Vec::with_capacity(spec.dim);
            for _ in 0..spec.dim {
                x.push(axis[k % axis.len()]);
                k /= axis.len();
            }
            out.push((t, x));
        }
    }
    out
}

fn one_point(
    u: &ScalarField,
    base: &HamiltonianSpec,
    chain: &ConstantChain,
    opts: &TheoremOptions,
    t0: f64,
    x0: &[f64],
) -> Result<BasePointReport> {
    let spec = u.spec();
    let p = chain.p;
    let tau = ((t0 - spec.t0) / 4.0).min(1.0);
    let rho = tau.powf(1.0 / p);
    let center = u.sample(t0, x0).ok_or_else(|| Error::DomainMismatch(format!("base point {x0:?} outside the lattice")))?;
    let ts = tau * chain.eps.powf(chain.a_exp);
    let xs = rho * chain.eps;
    let frame = Frame { t_origin: t0, t_scale: ts, x_origin: x0.to_vec(), x_scale: xs, v_scale: 1.0, v_offset: center };
    let spec0 = level0_spec(spec.dim, &opts.mode)?;
    let raw = resample_offset(u, spec0, &frame)?;
    let sup = raw.max_abs();
    let cv = if sup > 2.0 { 2.0 / sup } else { 1.0 };
    let u1 = raw.map(|v| cv * v)?;
    let frame = Frame { v_scale: cv, v_offset: cv * center, ..frame };
    let problem = BaseProblem { hamiltonian: base, frame };
    let records = zoom_cascade(&u1, chain, opts.zooms, opts.mode, Some(&problem)).map_err(|f| f.error)?;
    let estimate = holder_estimate(&records, chain);
    let max_quotient = records
        .iter()
        .map(|r| (r.osc_measured / cv) / (2.0 * r.radius() * xs).powf(opts.alpha_ref))
        .fold(0.0, f64::max);
    let all_satisfied = records.iter().all(|r| r.satisfied);
    Ok(BasePointReport { t0, x0: x0.to_vec(), value_scale: cv, estimate, max_quotient, all_satisfied, records })
}

/// `u(frame(t, x)) - v_offset`, sampled with the offset removed before interpolation.
fn resample_offset(u: &ScalarField, spec: GridSpec, frame: &Frame) -> Result<ScalarField> {
    let dim = spec.dim;
    let mut y = [0.0; MAX_DIM];
    build(spec, |t, x| {
        let s = frame.to_base(t, x, &mut y[..dim]);
        u.sample_offset(s, &y[..dim], frame.v_offset)
            .ok_or_else(|| Error::DomainMismatch(format!("base point window needs u at t = {s}, x = {:?}", &y[..dim])))
    })
}

/// Runs a cascade at every base point `(t0, x0)` with `t0 >= delta_time`,
/// after the shift and parabolic rescale that put `u` in the normalized
/// setting, and aggregates the per-point exponents and Holder quotients.
pub fn theorem_check(
    u: &ScalarField,
    base: &HamiltonianSpec,
    delta_time: f64,
    chain: &ConstantChain,
    opts: &TheoremOptions,
) -> Result<TheoremReport> {
    let spec = u.spec();
    if !(delta_time > spec.t0 && delta_time < spec.t1) {
        return Err(Error::InvalidArgument(format!(
            "delta_time must lie in ({}, {}), got {delta_time}",
            spec.t0, spec.t1
        )));
    }
    if spec.dim != chain.n {
        return Err(Error::DomainMismatch(format!("field dimension {} but chain built for N = {}", spec.dim, chain.n)));
    }
    let pts = base_points(spec, delta_time, opts);
    let points = pts
        .par_iter()
        .map(|(t0, x0)| one_point(u, base, chain, opts, *t0, x0))
        .collect::<Result<Vec<_>>>()?;
    let alpha_min = points.iter().map(|p| p.estimate.alpha_est).fold(f64::INFINITY, f64::min);
    let alpha_mean = points.iter().map(|p| p.estimate.alpha_est).sum::<f64>() / points.len() as f64;
    Ok(TheoremReport {
        delta_time,
        alpha_min,
        alpha_mean,
        alpha_theory: chain.alpha_h,
        max_quotient: points.iter().map(|p| p.max_quotient).fold(0.0, f64::max),
        all_satisfied: points.iter().all(|p| p.all_satisfied),
        points,
    })
}
