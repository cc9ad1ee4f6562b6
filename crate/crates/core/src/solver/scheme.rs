//! Local Lax-Friedrichs stencil and forward-Euler time stepping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, MAX_DIM};
use crate::hamiltonian::{CoercivityEnvelope, HamiltonianSpec};
use crate::solver::initial::InitialData;

/// Slices smaller than this are stepped on the calling thread.
const PAR_THRESHOLD: usize = 4096;

/// Safety factor applied to the largest one-sided gradient when bounding `|dH/dP|`.
pub const SIGMA_INFLATION: f64 = 1.5;

/// `c_cfl * h / (N sigma)`.
pub fn cfl_dt(spec: &GridSpec, sigma: f64, c_cfl: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    Ok(c_cfl * spec.cell_width() / (spec.dim as f64 * sigma))
}

/// How the dissipation coefficient is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SigmaMode {
    /// Re-estimated before every substep from the current slice, never below `floor`.
    Adaptive {
        #[serde(default)]
        floor: f64,
    },
    /// Held fixed; the run aborts once the slice needs more.
    Fixed { sigma: f64 },
}

impl Default for SigmaMode {
    fn default() -> Self {
        SigmaMode::Adaptive { floor: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub grid: GridSpec,
    pub hamiltonian: HamiltonianSpec,
    pub envelope: CoercivityEnvelope,
    pub initial: InitialData,
    pub c_cfl: f64,
    #[serde(default)]
    pub sigma: SigmaMode,
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.hamiltonian.validate(self.grid.dim)?;
        if !(self.c_cfl > 0.0 && self.c_cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!("c_cfl must lie in (0, 1], got {}", self.c_cfl)));
        }
        if let SigmaMode::Fixed { sigma } = self.sigma {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidArgument(format!("fixed sigma must be positive, got {sigma}")));
            }
        }
        Ok(())
    }
}

/// Solver output and per-interval diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub field: ScalarField,
    /// Largest `|u^{n+1} - u^n|` of any substep inside each output interval.
    pub max_update: Vec<f64>,
    /// Smallest `1 - dt N sigma / h` inside each output interval.
    pub cfl_margin: Vec<f64>,
    pub substeps: usize,
    pub sigma_max: f64,
}

fn one_sided(spec: &GridSpec, u: &[f64], j: usize, idx: &[usize; MAX_DIM], a: usize, stride: usize, inv_h: f64) -> (f64, f64) {
    // outflow boundary: the ghost cell copies its neighbor
    let up = if idx[a] + 1 < spec.cells { u[j + stride] } else { u[j] };
    let dn = if idx[a] > 0 { u[j - stride] } else { u[j] };
    ((up - u[j]) * inv_h, (u[j] - dn) * inv_h)
}

/// Largest Euclidean norm over cells of the per-axis maximal one-sided difference.
pub fn gradient_bound(spec: &GridSpec, u: &[f64]) -> f64 {
    let strides = spec.strides();
    let inv_h = 1.0 / spec.cell_width();
    let cell = |j: usize| {
        let idx = spec.unflatten(j);
        let mut s = 0.0;
        for a in 0..spec.dim {
            let (p, m) = one_sided(spec, u, j, &idx, a, strides[a], inv_h);
            let g = p.abs().max(m.abs());
            s += g * g;
        }
        s
    };
    let m = if u.len() >= PAR_THRESHOLD {
        (0..u.len()).into_par_iter().map(cell).reduce(|| 0.0, f64::max)
    } else {
        (0..u.len()).map(cell).fold(0.0, f64::max)
    };
    m.sqrt()
}

/// Dissipation needed for monotonicity on this slice, inflated by [`SIGMA_INFLATION`].
pub fn estimate_sigma(spec: &GridSpec, h: &HamiltonianSpec, u: &[f64]) -> f64 {
    h.slope_bound(SIGMA_INFLATION * gradient_bound(spec, u))
}

/// One forward-Euler step of the local Lax-Friedrichs scheme
/// `u - dt [H(t, x, (D+ + D-)/2) - sigma sum_a (D+_a - D-_a)/2]`.
pub fn step_into(spec: &GridSpec, h: &HamiltonianSpec, t: f64, dt: f64, sigma: f64, u: &[f64], out: &mut [f64]) {
    let strides = spec.strides();
    let inv_h = 1.0 / spec.cell_width();
    let kernel = |(j, o): (usize, &mut f64)| {
        let idx = spec.unflatten(j);
        let mut x = [0.0; MAX_DIM];
        let mut p = [0.0; MAX_DIM];
        let mut diss = 0.0;
        for a in 0..spec.dim {
            x[a] = spec.axis_center(idx[a]);
            let (dp, dm) = one_sided(spec, u, j, &idx, a, strides[a], inv_h);
            p[a] = 0.5 * (dp + dm);
            diss += 0.5 * (dp - dm);
        }
        let hv = h.value(t, &x[..spec.dim], &p[..spec.dim]);
        *o = u[j] - dt * (hv - sigma * diss);
    };
    if u.len() >= PAR_THRESHOLD {
        out.par_iter_mut().enumerate().for_each(kernel);
    } else {
        out.iter_mut().enumerate().for_each(kernel);
    }
}

/// Allocating variant of [`step_into`]; a non-finite result is an error.
pub fn step(spec: &GridSpec, h: &HamiltonianSpec, t: f64, dt: f64, sigma: f64, u: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; u.len()];
    step_into(spec, h, t, dt, sigma, u, &mut out);
    if let Some(j) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::SolverAbort { step: 0, t, reason: format!("non-finite value at cell {j}") });
    }
    Ok(out)
}

/// Solves from the descriptor in `cfg.initial`.
pub fn solve(cfg: &SolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let u0 = cfg.initial.sample(&cfg.grid)?;
    solve_from(&cfg.grid, &cfg.hamiltonian, cfg.c_cfl, cfg.sigma, u0)
}

/// Solves from explicit cell values at `spec.t0`, storing every slice of `spec`.
pub fn solve_from(spec: &GridSpec, h: &HamiltonianSpec, c_cfl: f64, sigma_mode: SigmaMode, u0: Vec<f64>) -> Result<Trajectory> {
    spec.validate()?;
    if u0.len() != spec.slice_len() {
        return Err(Error::ShapeMismatch { expected: spec.slice_len(), got: u0.len() });
    }
    if let Some(j) = u0.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: spec.t0, x: spec.center_vec(j), value: u0[j] });
    }
    let n_dim = spec.dim as f64;
    let cw = spec.cell_width();
    let mut values = Vec::with_capacity(spec.len());
    values.extend_from_slice(&u0);
    let mut cur = u0;
    let mut next = vec![0.0; cur.len()];
    let mut max_update = Vec::with_capacity(spec.steps());
    let mut cfl_margin = Vec::with_capacity(spec.steps());
    let mut substeps = 0usize;
    let mut sigma_max: f64 = 0.0;
    for i in 0..spec.steps() {
        let mut t = spec.time(i);
        let t_next = spec.time(i + 1);
        let mut upd: f64 = 0.0;
        let mut margin = f64::INFINITY;
        while t < t_next {
            let g = gradient_bound(spec, &cur);
            let need = h.slope_bound(g);
            let sigma = match sigma_mode {
                SigmaMode::Adaptive { floor } => h.slope_bound(SIGMA_INFLATION * g).max(floor),
                SigmaMode::Fixed { sigma } => {
                    if sigma < need {
                        return Err(Error::SolverAbort {
                            step: substeps,
                            t,
                            reason: format!("CFL violation: fixed sigma {sigma} below required {need}"),
                        });
                    }
                    sigma
                }
            };
            sigma_max = sigma_max.max(sigma);
            let remaining = t_next - t;
            let dt = if sigma > 0.0 {
                let dt_max = c_cfl * cw / (n_dim * sigma);
                remaining / (remaining / dt_max).ceil().max(1.0)
            } else {
                remaining
            };
            let m = 1.0 - dt * n_dim * sigma / cw;
            if m < 0.0 {
                return Err(Error::SolverAbort { step: substeps, t, reason: format!("negative CFL margin {m}") });
            }
            margin = margin.min(m);
            step_into(spec, h, t, dt, sigma, &cur, &mut next);
            for (a, b) in next.iter().zip(&cur) {
                let d = (a - b).abs();
                if !d.is_finite() {
                    return Err(Error::SolverAbort { step: substeps, t, reason: "non-finite update".into() });
                }
                upd = upd.max(d);
            }
            std::mem::swap(&mut cur, &mut next);
            substeps += 1;
            // snap onto the output time to avoid a sliver step from rounding
            t = if t + dt >= t_next - 1e-12 * (t_next - spec.time(i)) { t_next } else { t + dt };
        }
        max_update.push(upd);
        cfl_margin.push(margin);
        values.extend_from_slice(&cur);
    }
    let field = ScalarField::new(spec.clone(), values)?;
    Ok(Trajectory { field, max_update, cfl_margin, substeps, sigma_max })
}
