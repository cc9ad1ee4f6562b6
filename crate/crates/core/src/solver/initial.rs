//! Initial-data catalog.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MAX_DIM};

/// Descriptor of `u(t0, .)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    Constant { value: f64 },
    /// `offset + slope |x|`.
    Cone { slope: f64, offset: f64 },
    /// `shift + amplitude prod_i sin(frequency x_i)`.
    Sine { amplitude: f64, frequency: f64, #[serde(default)] shift: f64 },
    /// Seeded band-limited cosine sum `g` with `|g| <= 1`, mapped to
    /// `shift + amplitude g` (or `g_+`), then optionally clipped.
    Trig {
        seed: u64,
        amplitude: f64,
        modes: usize,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default)]
        positive_part: bool,
        #[serde(default)]
        clip: Option<(f64, f64)>,
    },
    /// Barrier profile `min(-2 + lambda1, -2 + q (1 - |x|))`.
    Barrier { lambda1: f64, q: f64 },
}

fn one() -> f64 {
    1.0
}

/// Evaluator built from an [`InitialData`] descriptor.
#[derive(Debug, Clone)]
pub struct InitialProfile {
    data: InitialData,
    // (wave vector, coefficient, phase)
    terms: Vec<([i32; MAX_DIM], f64, f64)>,
    norm: f64,
}

impl InitialData {
    pub fn profile(&self, dim: usize) -> Result<InitialProfile> {
        let mut terms = Vec::new();
        let mut norm = 1.0;
        if let InitialData::Trig { seed, modes, amplitude, frequency, .. } = self {
            if *modes == 0 || !amplitude.is_finite() || !(*frequency > 0.0) {
                return Err(Error::InvalidArgument("trig data needs modes >= 1 and positive frequency".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let m = *modes as i32;
            let side = (2 * m + 1) as usize;
            let count = side.pow(dim as u32);
            for flat in 0..count {
                let mut k = [0i32; MAX_DIM];
                let mut rest = flat;
                for ka in k.iter_mut().take(dim) {
                    *ka = (rest % side) as i32 - m;
                    rest /= side;
                }
                let k2: i32 = k.iter().map(|v| v * v).sum();
                // draw for every vector so the stream does not depend on filtering
                let c: f64 = rng.gen_range(-1.0..1.0);
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                if k2 == 0 || k2 > m * m {
                    continue;
                }
                terms.push((k, c / (1.0 + k2 as f64), phase));
            }
            norm = terms.iter().map(|t| t.1.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        }
        Ok(InitialProfile { data: self.clone(), terms, norm })
    }

    /// Values at the cell centers of `spec`.
    pub fn sample(&self, spec: &GridSpec) -> Result<Vec<f64>> {
        let prof = self.profile(spec.dim)?;
        let mut x = [0.0; MAX_DIM];
        let mut out = Vec::with_capacity(spec.slice_len());
        for j in 0..spec.slice_len() {
            spec.center(j, &mut x);
            let v = prof.eval(&x[..spec.dim]);
            if !v.is_finite() {
                return Err(Error::NonFinite { t: spec.t0, x: x[..spec.dim].to_vec(), value: v });
            }
            out.push(v);
        }
        Ok(out)
    }
}

impl InitialProfile {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = || x.iter().map(|v| v * v).sum::<f64>().sqrt();
        match &self.data {
            InitialData::Zero => 0.0,
            InitialData::Constant { value } => *value,
            InitialData::Cone { slope, offset } => offset + slope * r(),
            InitialData::Sine { amplitude, frequency, shift } => {
                shift + amplitude * x.iter().map(|xa| (frequency * xa).sin()).product::<f64>()
            }
            InitialData::Trig { amplitude, frequency, shift, positive_part, clip, .. } => {
                let mut g = 0.0;
                for (k, c, phase) in &self.terms {
                    let kx: f64 = x.iter().zip(k).map(|(xa, &ka)| xa * ka as f64).sum();
                    g += c * (frequency * kx + phase).cos();
                }
                g /= self.norm;
                if *positive_part {
                    g = g.max(0.0);
                }
                let v = shift + amplitude * g;
                match clip {
                    Some((lo, hi)) => v.clamp(*lo, *hi),
                    None => v,
                }
            }
            InitialData::Barrier { lambda1, q } => (-2.0 + lambda1).min(-2.0 + q * (1.0 - r())),
        }
    }
}
