//! Hamiltonians `H(t, x, P) = a(t, x) |P|^p + offset`, the coercivity
//! envelope `|P|^p / L - L <= H <= L |P|^p + L`, and the gauge shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// The pair `(Lambda, p)` bounding a Hamiltonian from both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoercivityEnvelope {
    pub lambda: f64,
    pub p: f64,
}

impl CoercivityEnvelope {
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::InvalidEnvelope(format!("Lambda must be >= 1, got {lambda}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidEnvelope(format!("p must be > 1, got {p}")));
        }
        Ok(Self { lambda, p })
    }

    pub fn lower(&self, norm_p: f64) -> f64 {
        norm_p / self.lambda - self.lambda
    }

    pub fn upper(&self, norm_p: f64) -> f64 {
        self.lambda * norm_p + self.lambda
    }
}

/// Coefficient model of a Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianKind {
    /// `a = 1`.
    PowerLaw,
    /// `a = scale`.
    ScaledPowerLaw { scale: f64 },
    /// Checkerboard `a(x) = Lambda` where `sum_i floor(x_i / eta)` is even and `1 / Lambda` where odd.
    RoughCoefficient { lambda: f64, eta: f64 },
    /// Piecewise-constant periodic table in `(t, x)`. `coefficients` is
    /// time-major with `time_cells` blocks of `side^N` entries, axis 0 fastest.
    Tabulated { cell: f64, t_cell: f64, side: usize, time_cells: usize, coefficients: Vec<f64> },
    /// `value_scale * inner(t_o + t_s t, x_o + x_s x, gradient_scale P)`; the
    /// Hamiltonian seen by an affinely rescaled solution.
    Rescaled {
        inner: Box<HamiltonianSpec>,
        value_scale: f64,
        time_origin: f64,
        time_scale: f64,
        space_origin: Vec<f64>,
        space_scale: f64,
        gradient_scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    #[serde(flatten)]
    pub kind: HamiltonianKind,
    pub p: f64,
    /// Constant added to the Hamiltonian.
    #[serde(default)]
    pub offset: f64,
}

fn norm_pow(p_vec: &[f64], p: f64) -> f64 {
    let n2: f64 = p_vec.iter().map(|v| v * v).sum();
    if n2 == 0.0 {
        0.0
    } else if p == 2.0 {
        n2
    } else {
        n2.powf(0.5 * p)
    }
}

impl HamiltonianSpec {
    pub fn power_law(p: f64) -> Self {
        Self { kind: HamiltonianKind::PowerLaw, p, offset: 0.0 }
    }

    pub fn scaled(scale: f64, p: f64, offset: f64) -> Self {
        Self { kind: HamiltonianKind::ScaledPowerLaw { scale }, p, offset }
    }

    pub fn rough(lambda: f64, eta: f64, p: f64) -> Self {
        Self { kind: HamiltonianKind::RoughCoefficient { lambda, eta }, p, offset: 0.0 }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidHamiltonian(format!("p must be > 1, got {}", self.p)));
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidHamiltonian("offset must be finite".into()));
        }
        match &self.kind {
            HamiltonianKind::PowerLaw => {}
            HamiltonianKind::ScaledPowerLaw { scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidHamiltonian(format!("scale must be positive, got {scale}")));
                }
            }
            HamiltonianKind::RoughCoefficient { lambda, eta } => {
                if !(*lambda >= 1.0 && lambda.is_finite()) {
                    return Err(Error::InvalidHamiltonian(format!("lambda must be >= 1, got {lambda}")));
                }
                if !(*eta > 0.0 && eta.is_finite()) {
                    return Err(Error::InvalidHamiltonian(format!("eta must be positive, got {eta}")));
                }
            }
            HamiltonianKind::Tabulated { cell, t_cell, side, time_cells, coefficients } => {
                if !(*cell > 0.0 && *t_cell > 0.0) || *side == 0 || *time_cells == 0 {
                    return Err(Error::InvalidHamiltonian("tabulated cells must be positive".into()));
                }
                let want = side.pow(dim as u32) * time_cells;
                if coefficients.len() != want {
                    return Err(Error::InvalidHamiltonian(format!(
                        "tabulated table has {} entries, expected {want}",
                        coefficients.len()
                    )));
                }
                if coefficients.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
                    return Err(Error::InvalidHamiltonian("tabulated coefficients must be positive".into()));
                }
            }
            HamiltonianKind::Rescaled { inner, value_scale, time_scale, space_origin, space_scale, gradient_scale, .. } => {
                inner.validate(dim)?;
                if inner.p != self.p {
                    return Err(Error::InvalidHamiltonian("rescaled exponent differs from inner".into()));
                }
                if space_origin.len() != dim {
                    return Err(Error::InvalidHamiltonian("space origin has wrong dimension".into()));
                }
                for s in [value_scale, time_scale, space_scale, gradient_scale] {
                    if !(*s > 0.0 && s.is_finite()) {
                        return Err(Error::InvalidHamiltonian("rescaling factors must be positive".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Multiplier `a(t, x)` in front of `|P|^p`.
    pub fn coefficient(&self, t: f64, x: &[f64]) -> f64 {
        match &self.kind {
            HamiltonianKind::PowerLaw => 1.0,
            HamiltonianKind::ScaledPowerLaw { scale } => *scale,
            HamiltonianKind::RoughCoefficient { lambda, eta } => {
                let parity: i64 = x.iter().map(|xa| (xa / eta).floor() as i64).sum();
                if parity.rem_euclid(2) == 0 {
                    *lambda
                } else {
                    1.0 / lambda
                }
            }
            HamiltonianKind::Tabulated { cell, t_cell, side, time_cells, coefficients } => {
                let m = *side as i64;
                let mut idx = ((t / t_cell).floor() as i64).rem_euclid(*time_cells as i64) as usize;
                let mut stride = 1;
                let mut flat = 0;
                for xa in x {
                    flat += ((xa / cell).floor() as i64).rem_euclid(m) as usize * stride;
                    stride *= *side;
                }
                idx = idx * stride + flat;
                coefficients[idx]
            }
            HamiltonianKind::Rescaled { .. } => {
                // not a pure multiple of |P|^p once the inner offset is scaled
                f64::NAN
            }
        }
    }

    /// `H(t, x, P)` without a finiteness check.
    pub fn value(&self, t: f64, x: &[f64], p_vec: &[f64]) -> f64 {
        match &self.kind {
            HamiltonianKind::Rescaled { inner, value_scale, time_origin, time_scale, space_origin, space_scale, gradient_scale } => {
                let mut y = [0.0; crate::grid::MAX_DIM];
                let mut q = [0.0; crate::grid::MAX_DIM];
                let n = x.len();
                for a in 0..n {
                    y[a] = space_origin[a] + space_scale * x[a];
                    q[a] = gradient_scale * p_vec[a];
                }
                value_scale * inner.value(time_origin + time_scale * t, &y[..n], &q[..n]) + self.offset
            }
            _ => self.coefficient(t, x) * norm_pow(p_vec, self.p) + self.offset,
        }
    }

    /// `H(t, x, P)`; a non-finite result is an error naming the inputs.
    pub fn eval(&self, t: f64, x: &[f64], p_vec: &[f64]) -> Result<f64> {
        let v = self.value(t, x, p_vec);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::HamiltonianNonFinite { t, x: x.to_vec(), p: p_vec.to_vec() })
        }
    }

    /// Upper bound for the coefficient `a(t, x)` over all `(t, x)`.
    pub fn coefficient_max(&self) -> f64 {
        match &self.kind {
            HamiltonianKind::PowerLaw => 1.0,
            HamiltonianKind::ScaledPowerLaw { scale } => *scale,
            HamiltonianKind::RoughCoefficient { lambda, .. } => lambda.max(1.0 / lambda),
            HamiltonianKind::Tabulated { coefficients, .. } => coefficients.iter().cloned().fold(0.0, f64::max),
            HamiltonianKind::Rescaled { inner, value_scale, gradient_scale, .. } => {
                value_scale * inner.coefficient_max() * gradient_scale.powf(self.p)
            }
        }
    }

    /// Upper bound for `|dH/dP|` over `|P| <= g`.
    pub fn slope_bound(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        self.coefficient_max() * self.p * g.powf(self.p - 1.0)
    }

    /// `H(t, x, 0)` bound, i.e. the largest `|offset|` seen through any rescaling.
    pub fn zero_gradient_bound(&self) -> f64 {
        match &self.kind {
            HamiltonianKind::Rescaled { inner, value_scale, .. } => {
                value_scale * inner.zero_gradient_bound() + self.offset.abs()
            }
            _ => self.offset.abs(),
        }
    }
}

/// One sample point that violates the envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub t: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub violations: Vec<EnvelopeViolation>,
    /// Smallest two-sided slack over all samples; negative iff some sample violates.
    pub margin: f64,
    pub samples: usize,
}

/// Sample point `(t, x, P)`.
pub type Sample = (f64, Vec<f64>, Vec<f64>);

/// Checks the two-sided envelope at every sample.
pub fn coercivity_check(h: &HamiltonianSpec, env: &CoercivityEnvelope, samples: &[Sample]) -> Result<CoercivityReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("coercivity check needs at least one sample".into()));
    }
    let mut margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (t, x, p_vec) in samples {
        let hv = h.eval(*t, x, p_vec)?;
        let np = norm_pow(p_vec, env.p);
        let m = (hv - env.lower(np)).min(env.upper(np) - hv);
        if m < 0.0 {
            violations.push(EnvelopeViolation { t: *t, x: x.clone(), p: p_vec.clone(), margin: m });
        }
        margin = margin.min(m);
    }
    Ok(CoercivityReport { violations, margin, samples: samples.len() })
}

/// Deterministic samples with `t` in `[t_lo, t_hi]`, `x` in `[-x_max, x_max]^N`
/// and `|P|` spread log-uniformly up to `p_max`, plus `P = 0` at every tenth sample.
pub fn envelope_samples(dim: usize, count: usize, t_range: (f64, f64), x_max: f64, p_max: f64, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let t = rng.gen_range(t_range.0..=t_range.1);
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-x_max..=x_max)).collect();
            let mut dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let mag = if k % 10 == 0 { 0.0 } else { p_max * 10f64.powf(-4.0 * rng.gen::<f64>()) };
            dir.iter_mut().for_each(|v| *v *= mag / n);
            (t, x, dir)
        })
        .collect()
}

/// `(t, x) -> f(t, x) + Lambda t`.
pub fn gauge_shift(f: &ScalarField, env: &CoercivityEnvelope) -> Result<ScalarField> {
    let l = env.lambda;
    f.map_with_coords(|t, _, v| v + l * t)
}

/// `(t, x) -> f(t, x) - Lambda t`.
pub fn gauge_unshift(f: &ScalarField, env: &CoercivityEnvelope) -> Result<ScalarField> {
    let l = env.lambda;
    f.map_with_coords(|t, _, v| v - l * t)
}
