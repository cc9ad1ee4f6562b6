//! Hopf-Lax formula for `u_t + |Du|^p = 0`:
//! `u(t, x) = min_y u0(y) + t c_p (|x - y| / t)^{p'}`.

use crate::error::{Error, Result};
use crate::grid::MAX_DIM;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const STABLE_TOL: f64 = 1e-6;

/// Legendre constant `c_p = (p - 1) p^{-p/(p-1)}` of `|P|^p`.
pub fn legendre_constant(p: f64) -> f64 {
    (p - 1.0) * p.powf(-p / (p - 1.0))
}

/// Search radius that contains every minimizer when `u0` is `lip`-Lipschitz.
pub fn search_radius(lip: f64, t: f64, p: f64) -> f64 {
    let q = p / (p - 1.0);
    // minimizers satisfy c_p q (r/t)^{q-1} <= lip
    let r = t * (lip / (legendre_constant(p) * q)).powf(1.0 / (q - 1.0));
    1.25 * r + 1e-3
}

fn cost(u0: &dyn Fn(&[f64]) -> f64, x: &[f64], y: &[f64], t: f64, p: f64) -> f64 {
    let q = p / (p - 1.0);
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    u0(y) + t * legendre_constant(p) * (d / t).powf(q)
}

/// Golden-section search of `g` on `[a, b]`.
fn golden_min(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..iters {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - GOLDEN * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + GOLDEN * (b - a);
            gd = g(d);
        }
    }
    if gc < gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

fn lattice_min(u0: &dyn Fn(&[f64]) -> f64, x: &[f64], t: f64, p: f64, radius: f64, m: usize) -> f64 {
    let n = x.len();
    let step = 2.0 * radius / m as f64;
    let total = (m + 1).pow(n as u32);
    let mut best = f64::INFINITY;
    let mut best_y = [0.0; MAX_DIM];
    let mut y = [0.0; MAX_DIM];
    for flat in 0..total {
        let mut rest = flat;
        for a in 0..n {
            y[a] = x[a] - radius + (rest % (m + 1)) as f64 * step;
            rest /= m + 1;
        }
        let v = cost(u0, x, &y[..n], t, p);
        if v < best {
            best = v;
            best_y = y;
        }
    }
    // cyclic coordinate refinement inside one lattice cell of the best node
    for _ in 0..3 {
        for a in 0..n {
            let (ya, v) = golden_min(
                |s| {
                    let mut yy = best_y;
                    yy[a] = s;
                    cost(u0, x, &yy[..n], t, p)
                },
                best_y[a] - step,
                best_y[a] + step,
                60,
            );
            if v < best {
                best = v;
                best_y[a] = ya;
            }
        }
    }
    // pattern search on a shrinking 5^N stencil; handles kinks of u0 where
    // coordinate searches stall
    let mut h = step;
    let stencil = 5usize.pow(n as u32);
    for _ in 0..48 {
        let center = best_y;
        for flat in 0..stencil {
            let mut rest = flat;
            for a in 0..n {
                y[a] = center[a] + ((rest % 5) as f64 - 2.0) * 0.5 * h;
                rest /= 5;
            }
            let v = cost(u0, x, &y[..n], t, p);
            if v < best {
                best = v;
                best_y = y;
            }
        }
        if best_y[..n] == center[..n] {
            h *= 0.5;
        }
    }
    // the point y = x is always a candidate
    best.min(u0(x))
}

/// Hopf-Lax value at `(t, x)` with minimizers searched in the cube of
/// half-width `radius` around `x`. The lattice is doubled until two
/// consecutive values agree to `1e-6`.
pub fn hopf_lax(u0: &dyn Fn(&[f64]) -> f64, t: f64, x: &[f64], p: f64, radius: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("Hopf-Lax needs t > 0, got {t}")));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("Hopf-Lax needs p > 1, got {p}")));
    }
    if x.is_empty() || x.len() > MAX_DIM || !(radius > 0.0) {
        return Err(Error::InvalidArgument("bad Hopf-Lax point or radius".into()));
    }
    let max_nodes = match x.len() {
        1 => 1 << 16,
        2 => 1 << 10,
        _ => 64,
    };
    let mut m = 32;
    let mut prev = lattice_min(u0, x, t, p, radius, m);
    while m < max_nodes {
        m *= 2;
        let v = lattice_min(u0, x, t, p, radius, m);
        if (v - prev).abs() < STABLE_TOL {
            return Ok(v.min(prev));
        }
        prev = v;
    }
    Err(Error::RootFinding(format!("Hopf-Lax minimization did not stabilize at x = {x:?}")))
}
