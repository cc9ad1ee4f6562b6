//! Space-time lattices, sampled fields and the measure, oscillation and
//! gradient primitives evaluated on cylinders `[t_lo, t_hi] x B(x0, r)`.
//!
//! The spatial domain is the box `[-L, L]^N` split into `n` cells per axis;
//! values live at cell centers. Time is sampled at `n_t` equally spaced
//! slices from `t0` to `t1` inclusive. Storage is slice-major and, inside a
//! slice, axis 0 varies fastest.

use std::ops::{Bound, Range};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 6;

/// Relative slack used when deciding whether a slice time lies in a window.
const TIME_EPS: f64 = 1e-9;

/// Uniform space-time lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Spatial dimension `N`.
    pub dim: usize,
    /// Half-width `L` of the spatial box `[-L, L]^N`.
    pub half_width: f64,
    /// Cells per axis.
    pub cells: usize,
    pub t0: f64,
    pub t1: f64,
    /// Nominal spacing between stored time slices.
    pub dt: f64,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, cells: usize, t0: f64, t1: f64, dt: f64) -> Result<Self> {
        let spec = Self { dim, half_width, cells, t0, t1, dt };
        spec.validate()?;
        Ok(spec)
    }

    /// Same spatial lattice with `steps` equal time intervals over `[t0, t1]`.
    pub fn with_steps(dim: usize, half_width: f64, cells: usize, t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one time step".into()));
        }
        Self::new(dim, half_width, cells, t0, t1, (t1 - t0) / steps as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {} not in 1..={MAX_DIM}", self.dim)));
        }
        if self.cells < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 cells per axis, got {}", self.cells)));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {}", self.half_width)));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::InvalidGrid(format!("need t1 > t0, got [{}, {}]", self.t0, self.t1)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {}", self.dt)));
        }
        let span = self.t1 - self.t0;
        let steps = (span / self.dt).round();
        if steps < 1.0 || (steps * self.dt - span).abs() > 1e-6 * span {
            return Err(Error::InvalidGrid(format!("dt = {} does not divide [{}, {}]", self.dt, self.t0, self.t1)));
        }
        if self.slice_len_checked().is_none() {
            return Err(Error::InvalidGrid("lattice too large".into()));
        }
        Ok(())
    }

    fn slice_len_checked(&self) -> Option<usize> {
        (0..self.dim).try_fold(1usize, |acc, _| acc.checked_mul(self.cells))
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.dim as i32)
    }

    /// Number of time intervals between the stored slices.
    pub fn steps(&self) -> usize {
        ((self.t1 - self.t0) / self.dt).round() as usize
    }

    pub fn n_slices(&self) -> usize {
        self.steps() + 1
    }

    /// Effective slice spacing, `(t1 - t0) / steps`.
    pub fn time_step(&self) -> f64 {
        (self.t1 - self.t0) / self.steps() as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        let steps = self.steps();
        if i == steps {
            self.t1
        } else {
            self.t0 + (self.t1 - self.t0) * (i as f64 / steps as f64)
        }
    }

    pub fn slice_len(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.slice_len() * self.n_slices()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell-center coordinate along one axis.
    pub fn axis_center(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.cell_width()
    }

    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut s = [0; MAX_DIM];
        let mut acc = 1;
        for st in s.iter_mut().take(self.dim) {
            *st = acc;
            acc *= self.cells;
        }
        s
    }

    /// Per-axis indices of a flat spatial index.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for v in idx.iter_mut().take(self.dim) {
            *v = flat % self.cells;
            flat /= self.cells;
        }
        idx
    }

    /// Writes the cell center of a flat spatial index into `out[..dim]`.
    pub fn center(&self, flat: usize, out: &mut [f64]) {
        let idx = self.unflatten(flat);
        for a in 0..self.dim {
            out[a] = self.axis_center(idx[a]);
        }
    }

    pub fn center_vec(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.center(flat, &mut x);
        x
    }

    /// Indices of the slices whose time lies in `[t_lo, t_hi]`.
    pub fn slices_in(&self, t_lo: f64, t_hi: f64) -> Range<usize> {
        let tol = TIME_EPS * self.time_step();
        let n = self.n_slices();
        let start = (0..n).find(|&i| self.time(i) >= t_lo - tol).unwrap_or(n);
        let end = (start..n).rev().find(|&i| self.time(i) <= t_hi + tol).map_or(start, |i| i + 1);
        start..end.max(start)
    }

    /// Index of the slice at time `t`, if one exists.
    pub fn slice_at(&self, t: f64) -> Option<usize> {
        let r = self.slices_in(t, t);
        (r.len() == 1).then_some(r.start)
    }

    /// Length of the time cell of slice `i` clipped to `[t_lo, t_hi]` and the grid.
    pub fn time_weight(&self, i: usize, t_lo: f64, t_hi: f64) -> f64 {
        let half = 0.5 * self.time_step();
        let ti = self.time(i);
        let lo = (ti - half).max(t_lo).max(self.t0);
        let hi = (ti + half).min(t_hi).min(self.t1);
        (hi - lo).max(0.0)
    }

    /// Flat indices of the cells whose centers lie in the open ball `B(center, r)`.
    pub fn ball_cells(&self, center: &[f64], r: f64) -> Vec<usize> {
        let mut x = [0.0; MAX_DIM];
        let r2 = r * r;
        (0..self.slice_len())
            .filter(|&j| {
                self.center(j, &mut x);
                let d2: f64 = (0..self.dim).map(|a| (x[a] - center[a]).powi(2)).sum();
                d2 < r2
            })
            .collect()
    }

    /// Copy of this lattice over a different time window.
    pub fn with_time(&self, t0: f64, t1: f64, dt: f64) -> Result<Self> {
        Self::new(self.dim, self.half_width, self.cells, t0, t1, dt)
    }
}

/// Space-time cylinder `[t_lo, t_hi] x B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub t_lo: f64,
    pub t_hi: f64,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Cylinder {
    pub fn new(t_lo: f64, t_hi: f64, center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(t_lo < t_hi) {
            return Err(Error::InvalidCylinder(format!("need t_lo < t_hi, got [{t_lo}, {t_hi}]")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidCylinder(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { t_lo, t_hi, center, radius })
    }

    /// Cylinder centered at the spatial origin.
    pub fn centered(t_lo: f64, t_hi: f64, dim: usize, radius: f64) -> Result<Self> {
        Self::new(t_lo, t_hi, vec![0.0; dim], radius)
    }
}

/// Volume of the `N`-dimensional ball of radius `r`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    // V_0 = 1, V_1 = 2, V_n = V_{n-2} * 2 pi / n
    let mut v = [1.0, 2.0];
    for n in 2..=dim {
        v[n % 2] *= 2.0 * std::f64::consts::PI / n as f64;
    }
    v[dim % 2] * r.powi(dim as i32)
}

/// Exact space-time volume of a cylinder in dimension `dim`.
pub fn cylinder_measure(cyl: &Cylinder, dim: usize) -> f64 {
    (cyl.t_hi - cyl.t_lo) * ball_volume(dim, cyl.radius)
}

/// Result of a discrete measure computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    /// Time-weighted measure of the counted cells.
    pub measure: f64,
    /// Number of space-time cells counted.
    pub cells: usize,
    /// Spatial cell width, so callers can choose their own tolerance.
    pub cell_width: f64,
}

/// A sampled space-time function. Immutable once built; all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::ShapeMismatch { expected: spec.len(), got: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = (k / spec.slice_len(), k % spec.slice_len());
            return Err(Error::NonFinite { t: spec.time(i), x: spec.center_vec(j), value: values[k] });
        }
        Ok(Self { spec, values })
    }

    /// Builds a field by evaluating `init(t, x)` at every slice time and cell center.
    pub fn from_fn(spec: GridSpec, init: impl Fn(f64, &[f64]) -> f64) -> Result<Self> {
        spec.validate()?;
        let m = spec.slice_len();
        let mut values = Vec::with_capacity(spec.len());
        let mut x = [0.0; MAX_DIM];
        for i in 0..spec.n_slices() {
            let t = spec.time(i);
            for j in 0..m {
                spec.center(j, &mut x);
                let v = init(t, &x[..spec.dim]);
                if !v.is_finite() {
                    return Err(Error::NonFinite { t, x: x[..spec.dim].to_vec(), value: v });
                }
                values.push(v);
            }
        }
        Ok(Self { spec, values })
    }

    /// Builds a field from per-slice vectors.
    pub fn from_slices(spec: GridSpec, slices: Vec<Vec<f64>>) -> Result<Self> {
        let values = slices.into_iter().flatten().collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        let m = self.spec.slice_len();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.slice_len() + j]
    }

    /// Pointwise transform of the values on the same lattice.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.spec.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise transform with access to `(t, x)`.
    pub fn map_with_coords(&self, f: impl Fn(f64, &[f64], f64) -> f64) -> Result<Self> {
        let m = self.spec.slice_len();
        let mut x = [0.0; MAX_DIM];
        let mut out = Vec::with_capacity(self.values.len());
        for i in 0..self.spec.n_slices() {
            let t = self.spec.time(i);
            for j in 0..m {
                self.spec.center(j, &mut x);
                out.push(f(t, &x[..self.spec.dim], self.values[i * m + j]));
            }
        }
        Self::new(self.spec.clone(), out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation in `(t, x)` between cell centers. Points
    /// between the outermost centers and the box boundary take the boundary
    /// cell value along that axis. Returns `None` outside the lattice.
    pub fn sample(&self, t: f64, x: &[f64]) -> Option<f64> {
        self.sample_offset(t, x, 0.0)
    }

    /// Interpolates `f - offset`, subtracting before weighting so that
    /// small variations around a large constant keep their precision.
    pub fn sample_offset(&self, t: f64, x: &[f64], offset: f64) -> Option<f64> {
        let spec = &self.spec;
        let (i0, wt) = self.time_bracket(t)?;
        let h = spec.cell_width();
        let n = spec.cells;
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for a in 0..spec.dim {
            let xa = x[a];
            if !(xa.abs() <= spec.half_width * (1.0 + 1e-12)) {
                return None;
            }
            let s = ((xa + spec.half_width) / h - 0.5).clamp(0.0, (n - 1) as f64);
            let j = (s.floor() as usize).min(n - 2);
            base[a] = j;
            frac[a] = s - j as f64;
        }
        let strides = spec.strides();
        let m = spec.slice_len();
        let mut acc = 0.0;
        for (slice, w_t) in [(i0, 1.0 - wt), (i0 + 1, wt)] {
            if w_t == 0.0 {
                continue;
            }
            let vals = &self.values[slice * m..(slice + 1) * m];
            for corner in 0..(1usize << spec.dim) {
                let mut w = w_t;
                let mut flat = 0;
                for a in 0..spec.dim {
                    let up = (corner >> a) & 1;
                    w *= if up == 1 { frac[a] } else { 1.0 - frac[a] };
                    flat += (base[a] + up) * strides[a];
                }
                if w != 0.0 {
                    acc += w * (vals[flat] - offset);
                }
            }
        }
        Some(acc)
    }

    fn time_bracket(&self, t: f64) -> Option<(usize, f64)> {
        let spec = &self.spec;
        let tol = TIME_EPS * spec.time_step();
        if t < spec.t0 - tol || t > spec.t1 + tol {
            return None;
        }
        let steps = spec.steps();
        let s = ((t - spec.t0) / spec.time_step()).clamp(0.0, steps as f64);
        let i = (s.floor() as usize).min(steps - 1);
        Some((i, s - i as f64))
    }

    /// Space-time integral of `g(f)` over a cylinder (cell-center quadrature).
    pub fn integrate(&self, cyl: &Cylinder, g: impl Fn(f64) -> f64) -> Result<f64> {
        let cells = self.spec.ball_cells(&cyl.center, cyl.radius);
        let slices = self.spec.slices_in(cyl.t_lo, cyl.t_hi);
        if cells.is_empty() || slices.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let vol = self.spec.cell_volume();
        Ok(slices
            .map(|i| {
                let s = self.slice(i);
                let w = self.spec.time_weight(i, cyl.t_lo, cyl.t_hi);
                w * cells.iter().map(|&j| g(s[j])).sum::<f64>()
            })
            .sum::<f64>()
            * vol)
    }

    /// Spatial integral of `g(f(t_i, .))` over `B(center, r)`.
    pub fn slice_integral(&self, i: usize, cells: &[usize], g: impl Fn(f64) -> f64) -> f64 {
        let s = self.slice(i);
        cells.iter().map(|&j| g(s[j])).sum::<f64>() * self.spec.cell_volume()
    }

    /// Minimum and maximum of the field over the cells of a cylinder.
    pub fn extrema(&self, cyl: &Cylinder) -> Result<(f64, f64)> {
        let cells = self.spec.ball_cells(&cyl.center, cyl.radius);
        let slices = self.spec.slices_in(cyl.t_lo, cyl.t_hi);
        if cells.is_empty() || slices.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in slices {
            let s = self.slice(i);
            for &j in &cells {
                lo = lo.min(s[j]);
                hi = hi.max(s[j]);
            }
        }
        Ok((lo, hi))
    }

    /// Largest difference between adjacent cells (in space, or between
    /// consecutive slices) over a cylinder: the field's oscillation at the
    /// scale of one cell.
    pub fn cell_oscillation(&self, cyl: &Cylinder) -> Result<f64> {
        let cells = self.spec.ball_cells(&cyl.center, cyl.radius);
        let slices = self.spec.slices_in(cyl.t_lo, cyl.t_hi);
        if cells.is_empty() || slices.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let strides = self.spec.strides();
        let n = self.spec.cells;
        let mut worst: f64 = 0.0;
        for i in slices.clone() {
            let s = self.slice(i);
            for &j in &cells {
                let idx = self.spec.unflatten(j);
                for a in 0..self.spec.dim {
                    if idx[a] + 1 < n {
                        worst = worst.max((s[j + strides[a]] - s[j]).abs());
                    }
                    if idx[a] > 0 {
                        worst = worst.max((s[j] - s[j - strides[a]]).abs());
                    }
                }
                if i + 1 < self.spec.n_slices() && i + 1 < slices.end {
                    worst = worst.max((self.value(i + 1, j) - s[j]).abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Builds a field from a pointwise initializer; see [`ScalarField::from_fn`].
pub fn make_field(spec: GridSpec, init: impl Fn(f64, &[f64]) -> f64) -> Result<ScalarField> {
    ScalarField::from_fn(spec, init)
}

fn in_range(v: f64, lo: Bound<f64>, hi: Bound<f64>) -> bool {
    let above = match lo {
        Bound::Included(l) => v >= l,
        Bound::Excluded(l) => v > l,
        Bound::Unbounded => true,
    };
    let below = match hi {
        Bound::Included(h) => v <= h,
        Bound::Excluded(h) => v < h,
        Bound::Unbounded => true,
    };
    above && below
}

/// Measure of `{(t, x) in cyl : f in (lo, hi)}` by cell counting. A cell is
/// counted when its center lies in the ball, its slice lies in the time
/// window, and its value satisfies both bounds; each counted cell
/// contributes its clipped time weight times the spatial cell volume.
pub fn level_set_measure(f: &ScalarField, cyl: &Cylinder, lo: Bound<f64>, hi: Bound<f64>) -> Result<MeasureReport> {
    let spec = f.spec();
    let cells = spec.ball_cells(&cyl.center, cyl.radius);
    let slices = spec.slices_in(cyl.t_lo, cyl.t_hi);
    if cells.is_empty() || slices.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let mut count = 0usize;
    let mut weighted = 0.0;
    for i in slices {
        let s = f.slice(i);
        let c = cells.iter().filter(|&&j| in_range(s[j], lo, hi)).count();
        count += c;
        weighted += c as f64 * spec.time_weight(i, cyl.t_lo, cyl.t_hi);
    }
    Ok(MeasureReport { measure: weighted * spec.cell_volume(), cells: count, cell_width: spec.cell_width() })
}

/// Discrete measure of the whole cylinder, i.e. the level-set measure over `(-inf, inf)`.
pub fn discrete_cylinder_measure(spec: &GridSpec, cyl: &Cylinder) -> Result<MeasureReport> {
    let cells = spec.ball_cells(&cyl.center, cyl.radius);
    let slices = spec.slices_in(cyl.t_lo, cyl.t_hi);
    if cells.is_empty() || slices.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let weight: f64 = slices.clone().map(|i| spec.time_weight(i, cyl.t_lo, cyl.t_hi)).sum();
    Ok(MeasureReport {
        measure: weight * cells.len() as f64 * spec.cell_volume(),
        cells: cells.len() * slices.len(),
        cell_width: spec.cell_width(),
    })
}

/// Forward-difference gradient of one slice: per-axis difference quotients
/// written into `grad[..dim]`. At the last cell of an axis the backward
/// difference is used instead.
pub fn forward_gradient(spec: &GridSpec, slice: &[f64], j: usize, grad: &mut [f64]) {
    let idx = spec.unflatten(j);
    let strides = spec.strides();
    let h = spec.cell_width();
    for a in 0..spec.dim {
        grad[a] = if idx[a] + 1 < spec.cells {
            (slice[j + strides[a]] - slice[j]) / h
        } else {
            (slice[j] - slice[j - strides[a]]) / h
        };
    }
}

/// `sum_j |grad f(t_i, x_j)|^p h^N` over the listed cells.
pub fn gradient_energy(spec: &GridSpec, slice: &[f64], cells: impl IntoIterator<Item = usize>, p: f64) -> f64 {
    let mut g = [0.0; MAX_DIM];
    let mut acc = 0.0;
    for j in cells {
        forward_gradient(spec, slice, j, &mut g);
        let norm2: f64 = g[..spec.dim].iter().map(|v| v * v).sum();
        if norm2 > 0.0 {
            acc += norm2.powf(0.5 * p);
        }
    }
    acc * spec.cell_volume()
}

/// `int |grad f(t_i, .)|^p` over the whole spatial box.
pub fn discrete_gradient_norm_p(f: &ScalarField, slice: usize, p: f64) -> f64 {
    gradient_energy(f.spec(), f.slice(slice), 0..f.spec().slice_len(), p)
}

/// `max - min` of the field over a cylinder.
pub fn oscillation(f: &ScalarField, cyl: &Cylinder) -> Result<f64> {
    let (lo, hi) = f.extrema(cyl)?;
    Ok(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec2(cells: usize, l: f64, t0: f64, t1: f64, dt: f64) -> GridSpec {
        GridSpec::new(2, l, cells, t0, t1, dt).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(2, 1.0, 3, 0.0, 1.0, 0.1).is_err());
        assert!(GridSpec::new(2, 1.0, 8, 1.0, 1.0, 0.1).is_err());
        assert!(GridSpec::new(2, 1.0, 8, 0.0, 1.0, 0.3).is_err());
        assert!(GridSpec::new(2, 1.0, 8, 0.0, 1.0, -0.1).is_err());
        assert!(GridSpec::new(0, 1.0, 8, 0.0, 1.0, 0.1).is_err());
        let s = GridSpec::new(2, 1.0, 8, 0.0, 1.0, 0.1).unwrap();
        assert_eq!(s.n_slices(), 11);
        assert_eq!(s.time(10), 1.0);
    }

    #[test]
    fn make_field_examples() {
        let spec = spec2(4, 1.0, 0.0, 1.0, 0.5);
        let z = make_field(spec.clone(), |_, _| 0.0).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));

        let tf = make_field(spec.clone(), |t, _| t).unwrap();
        for i in 0..spec.n_slices() {
            assert!(tf.slice(i).iter().all(|&v| v == spec.time(i)));
        }

        // cell centers of [-1, 1] with 4 cells
        let xf = make_field(spec.clone(), |_, x| x[0]).unwrap();
        let row = [-0.75, -0.25, 0.25, 0.75];
        for i in 0..spec.n_slices() {
            for (k, chunk) in xf.slice(i).chunks(4).enumerate() {
                assert_eq!(chunk, row, "slice {i} row {k}");
            }
        }
    }

    #[test]
    fn make_field_rejects_non_finite() {
        let spec = spec2(4, 1.0, 0.0, 1.0, 0.5);
        let err = make_field(spec, |t, x| if t > 0.7 && x[0] > 0.5 { f64::NAN } else { 0.0 }).unwrap_err();
        match err {
            Error::NonFinite { t, x, .. } => {
                assert_eq!(t, 1.0);
                assert_eq!(x[0], 0.75);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn cylinder_measure_examples() {
        let c = Cylinder::centered(-2.0, 2.0, 2, 1.0).unwrap();
        assert!((cylinder_measure(&c, 2) - 4.0 * PI).abs() < 1e-12);
        let c = Cylinder::centered(0.0, 1.0, 3, 1.0).unwrap();
        assert!((cylinder_measure(&c, 3) - 4.0 * PI / 3.0).abs() < 1e-12);
        let c = Cylinder::centered(-2.0, 2.0, 1, 1.0).unwrap();
        assert!((cylinder_measure(&c, 1) - 8.0).abs() < 1e-12);
        assert!(Cylinder::centered(1.0, 1.0, 2, 1.0).is_err());
        assert!(Cylinder::centered(0.0, 1.0, 2, 0.0).is_err());
    }

    #[test]
    fn level_set_measure_examples() {
        let spec = spec2(100, 1.25, -2.0, 2.0, 0.05);
        let h = spec.cell_width();
        let cyl = Cylinder::centered(-2.0, 2.0, 2, 1.0).unwrap();
        // one boundary cell layer in space plus half a time cell
        let tol = 2.0 * PI * 2.0 * h * 4.0 + PI * spec.time_step();

        let f = make_field(spec.clone(), |t, _| t).unwrap();
        let m = level_set_measure(&f, &cyl, Bound::Unbounded, Bound::Included(0.0)).unwrap();
        assert!((m.measure - 2.0 * PI).abs() < tol, "{}", m.measure);
        assert_eq!(m.cell_width, h);

        let f = make_field(spec.clone(), |_, _| 5.0).unwrap();
        let m = level_set_measure(&f, &cyl, Bound::Excluded(0.0), Bound::Excluded(1.0)).unwrap();
        assert_eq!(m.measure, 0.0);
        assert_eq!(m.cells, 0);

        let f = make_field(spec.clone(), |_, x| x[0]).unwrap();
        let m = level_set_measure(&f, &cyl, Bound::Unbounded, Bound::Included(0.0)).unwrap();
        assert!((m.measure - 2.0 * PI).abs() < tol, "{}", m.measure);
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let spec = spec2(8, 1.0, 0.0, 1.0, 0.25);
        let f = make_field(spec, |_, _| 0.0).unwrap();
        let far = Cylinder::new(0.0, 1.0, vec![5.0, 5.0], 0.5).unwrap();
        assert!(matches!(level_set_measure(&f, &far, Bound::Unbounded, Bound::Unbounded), Err(Error::EmptyIntersection)));
        let late = Cylinder::centered(3.0, 4.0, 2, 1.0).unwrap();
        assert!(matches!(oscillation(&f, &late), Err(Error::EmptyIntersection)));
    }

    #[test]
    fn gradient_norm_examples() {
        let spec = spec2(64, 1.0, 0.0, 1.0, 0.5);
        let c = make_field(spec.clone(), |_, _| 3.0).unwrap();
        assert_eq!(discrete_gradient_norm_p(&c, 0, 2.0), 0.0);
        let f = make_field(spec, |_, x| x[0]).unwrap();
        assert!((discrete_gradient_norm_p(&f, 0, 2.0) - 4.0).abs() < 1e-9);
        assert!((discrete_gradient_norm_p(&f, 1, 1.5) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn oscillation_examples() {
        let spec = spec2(80, 1.0, -1.0, 0.0, 0.05);
        let h = spec.cell_width();
        let c = make_field(spec.clone(), |_, _| 7.0).unwrap();
        let cyl = Cylinder::centered(-1.0, 0.0, 2, 0.5).unwrap();
        assert_eq!(oscillation(&c, &cyl).unwrap(), 0.0);
        let f = make_field(spec.clone(), |_, x| x[0]).unwrap();
        assert!((oscillation(&f, &cyl).unwrap() - 1.0).abs() <= h * (1.0 + 1e-9));
        let f = make_field(spec.clone(), |t, _| t).unwrap();
        let cyl = Cylinder::centered(-1.0, 0.0, 2, 1.0).unwrap();
        assert!((oscillation(&f, &cyl).unwrap() - 1.0).abs() <= spec.time_step());
    }

    #[test]
    fn sample_reproduces_multilinear_data() {
        let spec = GridSpec::new(2, 1.0, 16, 0.0, 1.0, 0.25).unwrap();
        let f = make_field(spec, |t, x| 2.0 * t - x[0] + 0.5 * x[1]).unwrap();
        let v = f.sample(0.3, &[0.1, -0.37]).unwrap();
        assert!((v - (0.6 - 0.1 - 0.185)).abs() < 1e-12);
        assert!(f.sample(1.5, &[0.0, 0.0]).is_none());
        assert!(f.sample(0.5, &[1.5, 0.0]).is_none());
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(1, 1.0) - 2.0).abs() < 1e-15);
        assert!((ball_volume(2, 2.0) - 4.0 * PI).abs() < 1e-12);
        assert!((ball_volume(3, 1.0) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((ball_volume(4, 1.0) - PI * PI / 2.0).abs() < 1e-12);
    }
}
