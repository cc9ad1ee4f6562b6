//! Discrete residuals of `f_t + A |Df|^p - B` with forward time differences
//! and the solver's central-average gradient.

use serde::{Deserialize, Serialize};

use crate::grid::{ScalarField, MAX_DIM};

/// Per-cell residual on every slice but the last.
#[derive(Debug, Clone)]
pub struct Residual {
    field_slices: usize,
    slice_len: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub max_positive: f64,
    pub min: f64,
    pub max_abs: f64,
    pub cells: usize,
}

impl Residual {
    pub fn slices(&self) -> usize {
        self.field_slices - 1
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        &self.values[i * self.slice_len..(i + 1) * self.slice_len]
    }

    /// Summary over the cells `(i, j)` accepted by `keep(i, j)`.
    pub fn summary_where(&self, keep: impl Fn(usize, usize) -> bool) -> ResidualSummary {
        let mut s = ResidualSummary { max_positive: 0.0, min: f64::INFINITY, max_abs: 0.0, cells: 0 };
        for i in 0..self.slices() {
            for (j, &r) in self.slice(i).iter().enumerate() {
                if keep(i, j) {
                    s.max_positive = s.max_positive.max(r);
                    s.min = s.min.min(r);
                    s.max_abs = s.max_abs.max(r.abs());
                    s.cells += 1;
                }
            }
        }
        if s.cells == 0 {
            s.min = 0.0;
        }
        s
    }

    pub fn summary(&self) -> ResidualSummary {
        self.summary_where(|_, _| true)
    }
}

/// Central-average gradient `(D+ + D-)/2` with outflow ghost cells.
pub fn central_gradient(spec: &crate::grid::GridSpec, u: &[f64], j: usize, out: &mut [f64]) {
    let idx = spec.unflatten(j);
    let strides = spec.strides();
    let inv_h = 1.0 / spec.cell_width();
    for a in 0..spec.dim {
        let up = if idx[a] + 1 < spec.cells { u[j + strides[a]] } else { u[j] };
        let dn = if idx[a] > 0 { u[j - strides[a]] } else { u[j] };
        out[a] = 0.5 * (up - dn) * inv_h;
    }
}

fn residual(f: &ScalarField, a: f64, b: f64, p: f64) -> Residual {
    let spec = f.spec();
    let m = spec.slice_len();
    let mut values = Vec::with_capacity(m * spec.steps());
    let mut g = [0.0; MAX_DIM];
    for i in 0..spec.steps() {
        let dt = spec.time(i + 1) - spec.time(i);
        let (s0, s1) = (f.slice(i), f.slice(i + 1));
        for j in 0..m {
            central_gradient(spec, s0, j, &mut g);
            let n2: f64 = g[..spec.dim].iter().map(|v| v * v).sum();
            let grad_p = if n2 > 0.0 { n2.powf(0.5 * p) } else { 0.0 };
            values.push((s1[j] - s0[j]) / dt + a * grad_p - b);
        }
    }
    Residual { field_slices: spec.n_slices(), slice_len: m, values }
}

/// Residual of `f_t + A |Df|^p <= B`; its positive part measures the violation.
pub fn residual_subsolution(f: &ScalarField, a: f64, b: f64, p: f64) -> Residual {
    residual(f, a, b, p)
}

/// Residual of `f_t + A |Df|^p >= 0`; its negative part measures the violation.
pub fn residual_supersolution(f: &ScalarField, a: f64, p: f64) -> Residual {
    residual(f, a, 0.0, p)
}
