//! Truncated energies, the superlinear recurrence `U_k <= D U_{k-1}^{1+p/N}`,
//! and checkers for the two De Giorgi lemmas on sampled fields.
//!
//! All quantities are evaluated on the unit ball `B(1)` centered at the
//! origin, with time windows taken from the field's own slices.

use std::ops::Bound;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{gradient_energy, level_set_measure, Cylinder, GridSpec, ScalarField};
use crate::hamiltonian::CoercivityEnvelope;
use crate::verdict::{LemmaVerdict, VerdictBuilder};

/// Truncation level `T_k = 1 - 2^{-k}`; exact in binary.
pub fn level(k: u32) -> f64 {
    1.0 - (-(k as f64)).exp2()
}

/// `v_k = (f - T_k)_+`.
pub fn truncate(f: &ScalarField, k: u32) -> Result<ScalarField> {
    if k == 0 {
        return Err(Error::InvalidArgument("truncation index must be >= 1".into()));
    }
    let c = level(k);
    f.map(|v| (v - c).max(0.0))
}

/// Gate for the De Giorgi diagnostics: `1 < p < N`.
pub fn require_scope(env: &CoercivityEnvelope, dim: usize) -> Result<()> {
    if env.p < dim as f64 {
        Ok(())
    } else {
        Err(Error::OutOfTheoremScope { p: env.p, n: dim })
    }
}

fn covers(spec: &GridSpec, t_lo: f64, t_hi: f64) -> bool {
    let tol = 1e-9 * spec.time_step();
    spec.t0 <= t_lo + tol && spec.t1 >= t_hi - tol
}

fn require_window(spec: &GridSpec, t_lo: f64, t_hi: f64) -> Result<()> {
    if !covers(spec, t_lo, t_hi) {
        return Err(Error::DomainMismatch(format!(
            "field covers [{}, {}], need [{t_lo}, {t_hi}]",
            spec.t0, spec.t1
        )));
    }
    if spec.half_width < 1.0 {
        return Err(Error::DomainMismatch(format!("box half width {} does not contain B(1)", spec.half_width)));
    }
    Ok(())
}

fn unit_cylinder(spec: &GridSpec, t_lo: f64, t_hi: f64) -> Cylinder {
    Cylinder { t_lo, t_hi, center: vec![0.0; spec.dim], radius: 1.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub k: u32,
    #[serde(rename = "T_k")]
    pub t_k: f64,
    #[serde(rename = "U_k")]
    pub u_k: f64,
    /// `sup_t int_{B(1)} v_k`.
    pub sup_mass: f64,
    /// `int_{T_k}^2 int_{B(1)} |grad v_k|^p`.
    pub gradient_energy: f64,
}

/// `(T_k, U_k)` with the sup taken over slices in `[T_k, 2]`.
pub fn truncated_energy(f: &ScalarField, k: u32, env: &CoercivityEnvelope) -> Result<LadderEntry> {
    let spec = f.spec();
    require_scope(env, spec.dim)?;
    if k == 0 {
        return Err(Error::InvalidArgument("truncation index must be >= 1".into()));
    }
    let t_k = level(k);
    require_window(spec, t_k, 2.0)?;
    let ball = spec.ball_cells(&vec![0.0; spec.dim], 1.0);
    let vol = spec.cell_volume();
    let mut v = vec![0.0; spec.slice_len()];
    let mut sup_mass: f64 = 0.0;
    let mut grad = 0.0;
    for i in spec.slices_in(t_k, 2.0) {
        for (vj, &fj) in v.iter_mut().zip(f.slice(i)) {
            *vj = (fj - t_k).max(0.0);
        }
        sup_mass = sup_mass.max(ball.iter().map(|&j| v[j]).sum::<f64>() * vol);
        let w = spec.time_weight(i, t_k, 2.0);
        if w > 0.0 {
            grad += w * gradient_energy(spec, &v, ball.iter().copied(), env.p);
        }
    }
    Ok(LadderEntry { k, t_k, u_k: sup_mass + grad, sup_mass, gradient_energy: grad })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLadder {
    pub entries: Vec<LadderEntry>,
    pub envelope: CoercivityEnvelope,
    pub cylinder: Cylinder,
}

pub fn energy_ladder(f: &ScalarField, k_max: u32, env: &CoercivityEnvelope) -> Result<EnergyLadder> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("ladder needs k_max >= 2".into()));
    }
    let entries = (1..=k_max).map(|k| truncated_energy(f, k, env)).collect::<Result<Vec<_>>>()?;
    Ok(EnergyLadder { entries, envelope: *env, cylinder: unit_cylinder(f.spec(), 0.5, 2.0) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceFit {
    /// Smallest `D` with `U_k <= D U_{k-1}^{1+p/N}` for every fitted `k`.
    pub d_fit: f64,
    /// Fraction of fitted steps satisfied by `d_fit`; 1 whenever any step was fitted.
    pub satisfied_fraction: f64,
    /// `(k, U_k / U_{k-1}^{1+p/N})` for every `k` with `U_{k-1} > 0`.
    pub ratios: Vec<(u32, f64)>,
    /// Set when every `U_k` vanishes.
    pub all_zero: bool,
}

pub fn recurrence_fit(ladder: &EnergyLadder, dim: usize, p: f64) -> Result<RecurrenceFit> {
    if ladder.entries.len() < 3 {
        return Err(Error::InvalidArgument("recurrence fit needs at least 3 ladder entries".into()));
    }
    let expo = 1.0 + p / dim as f64;
    let ratios: Vec<(u32, f64)> = ladder
        .entries
        .windows(2)
        .filter(|w| w[0].u_k > 0.0)
        .map(|w| (w[1].k, w[1].u_k / w[0].u_k.powf(expo)))
        .collect();
    let all_zero = ladder.entries.iter().all(|e| e.u_k == 0.0);
    let d_fit = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let satisfied_fraction = if ratios.is_empty() {
        1.0
    } else {
        ratios.iter().filter(|r| r.1 <= d_fit).count() as f64 / ratios.len() as f64
    };
    Ok(RecurrenceFit { d_fit, satisfied_fraction, ratios, all_zero })
}

/// `eps0 = D^{-1/beta} / 2`: with `b_k = D^{1/beta} a_k` the recurrence becomes
/// `b_k <= b_{k-1}^{1+beta}`, so `b_1 <= 1/2` forces double-exponential decay.
pub fn fast_convergence_threshold(d: f64, beta: f64) -> Result<f64> {
    if !(d > 0.0 && beta > 0.0) {
        return Err(Error::InvalidArgument(format!("need D > 0 and beta > 0, got D = {d}, beta = {beta}")));
    }
    Ok(0.5 * d.powf(-1.0 / beta))
}

/// `a_1 = a1`, `a_k = D a_{k-1}^{1+beta}` for `k = 2..=iters`.
pub fn simulate_recurrence(d: f64, beta: f64, a1: f64, iters: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(iters);
    a.push(a1);
    for _ in 1..iters {
        let prev = *a.last().unwrap();
        a.push(d * prev.powf(1.0 + beta));
    }
    a
}

/// `delta = eps0 / (2 Lambda (1 + Lambda))`.
pub fn delta_constant(eps0: f64, lambda: f64) -> Result<f64> {
    if !(eps0 > 0.0 && eps0 <= 1.0) || !(lambda >= 1.0) {
        return Err(Error::InvalidArgument(format!("need eps0 in (0, 1] and Lambda >= 1, got {eps0}, {lambda}")));
    }
    Ok(eps0 / (2.0 * lambda * (1.0 + lambda)))
}

/// Checks "int_{[0,2] x B(1)} f_+ <= delta implies f <= 1 on [1,2] x B(1)".
/// The conclusion is granted a slack of one cell-scale oscillation of `f`.
pub fn lemma_one_check(f: &ScalarField, env: &CoercivityEnvelope, delta: f64) -> Result<LemmaVerdict> {
    let spec = f.spec();
    require_scope(env, spec.dim)?;
    require_window(spec, 0.0, 2.0)?;
    let mut b = VerdictBuilder::new("lemma1", spec.cell_width());
    let mass = f.integrate(&unit_cylinder(spec, 0.0, 2.0), |v| v.max(0.0))?;
    b.hypothesis("positive_mass", mass, mass <= delta);
    b.tolerance("delta", delta);
    let late = unit_cylinder(spec, 1.0, 2.0);
    let (_, max) = f.extrema(&late)?;
    let tol = f.cell_oscillation(&late)?;
    b.tolerance("conclusion_slack", tol);
    b.conclusion("max_late", max, max <= 1.0 + tol);
    Ok(b.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct APrioriReport {
    /// `int_{[-2,2] x B(1)} |grad f_+|^p`.
    pub gradient_lp: f64,
    /// `Lambda (int_{B(1)} f_+(-2) + 4 Lambda |B(1)|)`.
    pub gradient_bound: f64,
    /// `sum_i int_{B(1)} |f_+(t_{i+1}) - f_+(t_i)|`.
    pub dt_variation: f64,
    /// `4 |B(1)| (1 + 2 Lambda)`.
    pub dt_bound: f64,
    pub gradient_ok: bool,
    pub dt_ok: bool,
}

/// Evaluates the gradient and time-variation quantities of the second lemma's first step.
pub fn a_priori_bounds_check(f: &ScalarField, env: &CoercivityEnvelope) -> Result<APrioriReport> {
    let spec = f.spec();
    require_window(spec, -2.0, 2.0)?;
    let ball = spec.ball_cells(&vec![0.0; spec.dim], 1.0);
    if ball.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let vol = spec.cell_volume();
    let ball_vol = ball.len() as f64 * vol;
    let slices: Vec<usize> = spec.slices_in(-2.0, 2.0).collect();
    let pos = |i: usize| f.slice(i).iter().map(|v| v.max(0.0)).collect::<Vec<_>>();
    let mut gradient_lp = 0.0;
    let mut dt_variation = 0.0;
    let mut prev: Option<Vec<f64>> = None;
    let lam = env.lambda;
    let mut initial_mass = 0.0;
    for &i in &slices {
        let cur = pos(i);
        if prev.is_none() {
            initial_mass = ball.iter().map(|&j| cur[j]).sum::<f64>() * vol;
        }
        gradient_lp += spec.time_weight(i, -2.0, 2.0) * gradient_energy(spec, &cur, ball.iter().copied(), env.p);
        if let Some(pr) = &prev {
            dt_variation += ball.iter().map(|&j| (cur[j] - pr[j]).abs()).sum::<f64>() * vol;
        }
        prev = Some(cur);
    }
    let gradient_bound = lam * (initial_mass + 4.0 * lam * ball_vol);
    let dt_bound = 4.0 * ball_vol * (1.0 + 2.0 * lam);
    Ok(APrioriReport {
        gradient_lp,
        gradient_bound,
        dt_variation,
        dt_bound,
        gradient_ok: gradient_lp <= gradient_bound,
        dt_ok: dt_variation <= dt_bound,
    })
}

/// Checks the measure-splitting lemma: if `f <= 2`, `|{f <= 0}| >= |Q|/2` and
/// `|{0 < f < 1}| <= alpha` on `Q = [-2,2] x B(1)`, then
/// `int_{[0,2] x B(1)} (f - 1)_+ < delta / 2`. `|Q|` is the discrete measure
/// of the cylinder so that both sides are counted on the same cells.
pub fn lemma_two_check(f: &ScalarField, env: &CoercivityEnvelope, alpha_dg: f64, delta: f64) -> Result<LemmaVerdict> {
    let spec = f.spec();
    require_scope(env, spec.dim)?;
    require_window(spec, -2.0, 2.0)?;
    let q = unit_cylinder(spec, -2.0, 2.0);
    let mut b = VerdictBuilder::new("lemma2", spec.cell_width());
    let (_, max) = f.extrema(&q)?;
    b.precondition("max", max, max <= 2.0 + 1e-9);
    let full = crate::grid::discrete_cylinder_measure(spec, &q)?.measure;
    let below = level_set_measure(f, &q, Bound::Unbounded, Bound::Included(0.0))?.measure;
    let middle = level_set_measure(f, &q, Bound::Excluded(0.0), Bound::Excluded(1.0))?.measure;
    b.hypothesis("below_measure", below, below >= 0.5 * full);
    b.hypothesis("middle_measure", middle, middle <= alpha_dg);
    b.tolerance("half_cylinder", 0.5 * full);
    b.tolerance("alpha_dg", alpha_dg);
    b.tolerance("delta", delta);
    let excess = f.integrate(&unit_cylinder(spec, 0.0, 2.0), |v| (v - 1.0).max(0.0))?;
    b.conclusion("excess_mass", excess, excess < 0.5 * delta);
    Ok(b.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceClass {
    Below,
    Above,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceScan {
    pub t: f64,
    pub class: SliceClass,
    pub middle_measure: f64,
    pub below_measure: f64,
    pub above_measure: f64,
}

/// Per-slice split of `B(1)` into `{f <= 0}`, `{0 < f < 1}` and `{f >= 1}`.
/// Slices whose middle part is smaller than one cell are pure: below or
/// above, whichever side is larger.
pub fn isoperimetric_scan(f: &ScalarField, t_lo: f64, t_hi: f64) -> Result<Vec<SliceScan>> {
    let spec = f.spec();
    let ball = spec.ball_cells(&vec![0.0; spec.dim], 1.0);
    let slices = spec.slices_in(t_lo, t_hi);
    if ball.is_empty() || slices.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let vol = spec.cell_volume();
    Ok(slices
        .map(|i| {
            let s = f.slice(i);
            let (mut lo, mut mid, mut hi) = (0usize, 0usize, 0usize);
            for &j in &ball {
                match s[j] {
                    v if v <= 0.0 => lo += 1,
                    v if v < 1.0 => mid += 1,
                    _ => hi += 1,
                }
            }
            let class = if mid > 0 {
                SliceClass::Mixed
            } else if lo >= hi {
                SliceClass::Below
            } else {
                SliceClass::Above
            };
            SliceScan {
                t: spec.time(i),
                class,
                middle_measure: mid as f64 * vol,
                below_measure: lo as f64 * vol,
                above_measure: hi as f64 * vol,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearch {
    /// Supremum of the admissible `alpha_DG`; `None` when no member can refute.
    pub alpha: Option<f64>,
    /// Members satisfying the below-half hypothesis whose conclusion fails.
    pub bad_members: Vec<usize>,
    pub limiting_member: Option<usize>,
}

/// Largest `alpha_DG` for which no member of the ensemble refutes the
/// measure-splitting lemma. A member refutes exactly when its below-half
/// hypothesis holds, its conclusion fails and its middle measure is at most
/// `alpha_DG`, so the answer is the smallest middle measure among such
/// members (exclusive).
pub fn empirical_alpha_search(fields: &[ScalarField], env: &CoercivityEnvelope, delta: f64) -> Result<AlphaSearch> {
    let mut bad = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (idx, f) in fields.iter().enumerate() {
        let v = lemma_two_check(f, env, f64::INFINITY, delta)?;
        if !v.precondition_satisfied || !v.hypothesis_satisfied || v.conclusion_satisfied {
            continue;
        }
        bad.push(idx);
        let mid = v.hypothesis_values["middle_measure"];
        if best.map_or(true, |(_, m)| mid < m) {
            best = Some((idx, mid));
        }
    }
    Ok(AlphaSearch { alpha: best.map(|b| b.1), bad_members: bad, limiting_member: best.map(|b| b.0) })
}

/// Largest `s` in `[lo, hi]` (up to bisection accuracy) with `pred(s)` true,
/// assuming `pred` is true at `lo` and monotone. Returns `lo` when `pred(lo)` fails.
pub fn bisect_largest(mut pred: impl FnMut(f64) -> Result<bool>, lo: f64, hi: f64, iters: usize) -> Result<f64> {
    if !pred(lo)? {
        return Ok(lo);
    }
    if pred(hi)? {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        if pred(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ball_volume, make_field};
    use crate::verdict::Outcome;
    use proptest::prelude::*;

    fn env() -> CoercivityEnvelope {
        CoercivityEnvelope::new(1.0, 1.5).unwrap()
    }

    fn spec(t0: f64, t1: f64) -> GridSpec {
        GridSpec::new(2, 1.25, 40, t0, t1, 0.125).unwrap()
    }

    fn ball_disc(s: &GridSpec) -> f64 {
        s.ball_cells(&[0.0, 0.0], 1.0).len() as f64 * s.cell_volume()
    }

    #[test]
    fn truncate_examples() {
        let s = spec(0.0, 2.0);
        let f = make_field(s.clone(), |_, _| 0.9).unwrap();
        assert!(truncate(&f, 1).unwrap().values().iter().all(|&v| (v - 0.4).abs() < 1e-15));
        assert!(truncate(&f, 2).unwrap().values().iter().all(|&v| (v - 0.15).abs() < 1e-15));
        let g = make_field(s, |_, _| 0.5).unwrap();
        assert!(truncate(&g, 1).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(truncate(&g, 0).is_err());
    }

    #[test]
    fn energy_examples() {
        let s = spec(0.0, 2.0);
        let b = ball_disc(&s);
        let two = make_field(s.clone(), |_, _| 2.0).unwrap();
        let e = truncated_energy(&two, 1, &env()).unwrap();
        assert_eq!(e.t_k, 0.5);
        assert!((e.u_k - 1.5 * b).abs() < 1e-12);
        // continuum value 1.5 pi within the boundary cell layer
        assert!((e.u_k - 1.5 * std::f64::consts::PI).abs() < 1.5 * 2.0 * std::f64::consts::PI * 2.0 * s.cell_width());

        let neg = make_field(s.clone(), |_, x| -x[0].abs()).unwrap();
        assert!(energy_ladder(&neg, 5, &env()).unwrap().entries.iter().all(|e| e.u_k == 0.0));

        let one = make_field(s.clone(), |_, _| 1.0).unwrap();
        for k in 1..6 {
            let e = truncated_energy(&one, k, &env()).unwrap();
            assert!((e.u_k - (-(k as f64)).exp2() * b).abs() < 1e-12);
        }

        let ladder = energy_ladder(&two, 6, &env()).unwrap();
        for e in &ladder.entries {
            assert!((e.u_k - (1.0 + (-(e.k as f64)).exp2()) * b).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_needs_window_and_scope() {
        let short = GridSpec::new(2, 1.25, 20, 0.0, 1.5, 0.125).unwrap();
        let f = make_field(short, |_, _| 0.0).unwrap();
        assert!(matches!(truncated_energy(&f, 1, &env()), Err(Error::DomainMismatch(_))));
        let f = make_field(spec(0.0, 2.0), |_, _| 0.0).unwrap();
        let wide = CoercivityEnvelope::new(1.0, 2.0).unwrap();
        assert!(matches!(truncated_energy(&f, 1, &wide), Err(Error::OutOfTheoremScope { .. })));
    }

    #[test]
    fn recurrence_fit_examples() {
        let (n, p) = (2usize, 1.5);
        let expo = 1.0 + p / n as f64;
        let mk = |us: Vec<f64>| EnergyLadder {
            entries: us
                .iter()
                .enumerate()
                .map(|(i, &u)| LadderEntry { k: i as u32 + 1, t_k: level(i as u32 + 1), u_k: u, sup_mass: u, gradient_energy: 0.0 })
                .collect(),
            envelope: env(),
            cylinder: Cylinder::centered(0.5, 2.0, 2, 1.0).unwrap(),
        };
        // U_k = c r^{expo^k}: every ratio equals c^{1 - expo}
        let c: f64 = 0.3;
        let us: Vec<f64> = (1..=5).map(|k| c * 0.5f64.powf(expo.powi(k))).collect();
        let fit = recurrence_fit(&mk(us), n, p).unwrap();
        for (_, r) in &fit.ratios {
            assert!((r - c.powf(1.0 - expo)).abs() < 1e-9 * r);
        }
        assert_eq!(fit.satisfied_fraction, 1.0);

        let fit = recurrence_fit(&mk(vec![0.0; 4]), n, p).unwrap();
        assert!(fit.all_zero);
        assert_eq!(fit.d_fit, 0.0);

        let b = std::f64::consts::PI;
        let us: Vec<f64> = (1..=5).map(|k| (1.0 + (-(k as f64)).exp2()) * b).collect();
        let fit = recurrence_fit(&mk(us.clone()), n, p).unwrap();
        let want = us.windows(2).map(|w| w[1] / w[0].powf(expo)).fold(0.0, f64::max);
        assert_eq!(fit.d_fit, want);
        assert_eq!(fit.ratios.len(), 4);
        assert!(recurrence_fit(&mk(vec![1.0, 0.5]), n, p).is_err());
    }

    #[test]
    fn threshold_and_delta() {
        assert!((fast_convergence_threshold(10.0, 0.75).unwrap() - 0.5 * 10f64.powf(-4.0 / 3.0)).abs() < 1e-15);
        assert!((fast_convergence_threshold(10.0, 0.75).unwrap() - 0.02321).abs() < 1e-5);
        assert_eq!(fast_convergence_threshold(1.0, 1.0).unwrap(), 0.5);
        assert!(fast_convergence_threshold(0.0, 1.0).is_err());
        let a = simulate_recurrence(10.0, 0.75, fast_convergence_threshold(10.0, 0.75).unwrap(), 60);
        assert!(a[59] < 1e-30);

        assert!((delta_constant(0.02321, 1.0).unwrap() - 0.0058025).abs() < 1e-9);
        assert_eq!(delta_constant(1.0, 1.0).unwrap(), 0.25);
        assert!((delta_constant(0.6, 2.0).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn threshold_matrix_converges_in_forty_steps() {
        for d in [1.0, 10.0, 100.0] {
            for beta in [0.25, 0.75, 2.0] {
                let a = simulate_recurrence(d, beta, fast_convergence_threshold(d, beta).unwrap(), 40);
                assert!(a.iter().any(|&v| v < 1e-12), "D = {d}, beta = {beta}");
            }
        }
    }

    #[test]
    fn lemma_one_examples() {
        let s = spec(0.0, 2.0);
        let zero = make_field(s.clone(), |_, _| 0.0).unwrap();
        let v = lemma_one_check(&zero, &env(), 0.1).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        let two = make_field(s.clone(), |_, _| 2.0).unwrap();
        let v = lemma_one_check(&two, &env(), 0.1).unwrap();
        assert!(!v.hypothesis_satisfied && !v.conclusion_satisfied);
        assert_eq!(v.outcome, Outcome::Vacuous);
        assert!((v.hypothesis_values["positive_mass"] - 4.0 * ball_disc(&s)).abs() < 1e-12);
    }

    #[test]
    fn a_priori_examples() {
        let s = spec(-2.0, 2.0);
        let neg = make_field(s.clone(), |_, _| -0.5).unwrap();
        let r = a_priori_bounds_check(&neg, &env()).unwrap();
        assert_eq!((r.gradient_lp, r.dt_variation), (0.0, 0.0));
        let lam = 2.0;
        let e2 = CoercivityEnvelope::new(lam, 1.5).unwrap();
        let lin = make_field(s.clone(), |t, _| lam * t).unwrap();
        let r = a_priori_bounds_check(&lin, &e2).unwrap();
        assert_eq!(r.gradient_lp, 0.0);
        // f_+ grows from 0 at t = 0 to 2 Lambda at t = 2
        assert!((r.dt_variation - 2.0 * lam * ball_disc(&s)).abs() < 1e-9);
        assert!(r.dt_ok && r.gradient_ok);
    }

    #[test]
    fn lemma_two_examples() {
        let s = spec(-2.0, 2.0);
        let m = make_field(s.clone(), |_, _| -1.0).unwrap();
        let v = lemma_two_check(&m, &env(), 0.5, 0.1).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        let half = make_field(s.clone(), |_, _| 0.5).unwrap();
        let v = lemma_two_check(&half, &env(), 0.5, 0.1).unwrap();
        assert_eq!(v.outcome, Outcome::Vacuous);
        let big = make_field(s.clone(), |_, _| 2.5).unwrap();
        let v = lemma_two_check(&big, &env(), 0.5, 0.1).unwrap();
        assert_eq!(v.outcome, Outcome::PreconditionViolated);

        // step from -1 to 2 around t = 0.5 with a thin transition layer
        let step = make_field(s.clone(), |t, _| if t < 0.5 { -1.0 } else if t > 0.75 { 2.0 } else { -1.0 + 12.0 * (t - 0.5) }).unwrap();
        let v = lemma_two_check(&step, &env(), 0.5, 0.1).unwrap();
        assert!(v.hypothesis_satisfied);
        assert!(v.hypothesis_values["middle_measure"] <= 0.5);
        // this field is not a subsolution, and the conclusion indeed fails
        assert_eq!(v.outcome, Outcome::Refuted);
    }

    #[test]
    fn isoperimetric_examples() {
        let s = GridSpec::new(2, 1.25, 200, 0.0, 1.0, 0.5).unwrap();
        let below = make_field(s.clone(), |_, _| -1.0).unwrap();
        assert!(isoperimetric_scan(&below, 0.0, 1.0).unwrap().iter().all(|c| c.class == SliceClass::Below));
        let above = make_field(s.clone(), |_, _| 2.0).unwrap();
        assert!(isoperimetric_scan(&above, 0.0, 1.0).unwrap().iter().all(|c| c.class == SliceClass::Above));
        let band = make_field(s.clone(), |_, x| x[0] + 0.5).unwrap();
        // area of {|x_1| < 1/2} in the unit disc: 2 (sqrt(3)/4 + pi/6)
        let exact = 2.0 * (3f64.sqrt() / 4.0 + std::f64::consts::PI / 6.0);
        for c in isoperimetric_scan(&band, 0.0, 1.0).unwrap() {
            assert_eq!(c.class, SliceClass::Mixed);
            assert!((c.middle_measure - exact).abs() < 0.02, "{}", c.middle_measure);
        }
        let _ = ball_volume(2, 1.0);
    }

    #[test]
    fn alpha_search_picks_smallest_bad_middle() {
        let s = spec(-2.0, 2.0);
        let good = make_field(s.clone(), |_, _| -1.0).unwrap();
        let step = |w: f64| {
            make_field(s.clone(), move |t, _| if t < 0.5 { -1.0 } else if t > 0.5 + w { 2.0 } else { -1.0 + 3.0 * (t - 0.5) / w }).unwrap()
        };
        let fields = vec![good, step(0.25), step(0.5)];
        let r = empirical_alpha_search(&fields, &env(), 0.1).unwrap();
        assert_eq!(r.bad_members, vec![1, 2]);
        assert_eq!(r.limiting_member, Some(1));
        let r = empirical_alpha_search(&fields[..1], &env(), 0.1).unwrap();
        assert_eq!(r.alpha, None);
    }

    #[test]
    fn bisection_finds_threshold() {
        let s = bisect_largest(|x| Ok(x * x <= 2.0), 0.0, 4.0, 60).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn truncation_is_nested(seed in 0u64..1000, k in 2u32..8) {
            let s = GridSpec::new(2, 1.25, 16, 0.0, 2.0, 0.25).unwrap();
            let d = crate::solver::InitialData::Trig { seed, amplitude: 2.0, modes: 3, frequency: 1.0, shift: 0.5, positive_part: false, clip: None };
            let prof = d.profile(2).unwrap();
            let f = make_field(s, |t, x| prof.eval(x) * (1.0 - 0.2 * t)).unwrap();
            let a = truncate(&f, k).unwrap();
            let b = truncate(&f, k - 1).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!(x <= y);
            }
            let ladder = energy_ladder(&f, 8, &env()).unwrap();
            for w in ladder.entries.windows(2) {
                if w[0].u_k == 0.0 {
                    prop_assert_eq!(w[1].u_k, 0.0);
                }
            }
        }

        #[test]
        fn a_priori_ignores_negative_shifts(seed in 0u64..1000, c in 0.0f64..3.0) {
            let s = GridSpec::new(2, 1.25, 16, -2.0, 2.0, 0.25).unwrap();
            let d = crate::solver::InitialData::Trig { seed, amplitude: 1.0, modes: 2, frequency: 1.0, shift: 0.0, positive_part: false, clip: None };
            let prof = d.profile(2).unwrap();
            let f = make_field(s, |t, x| prof.eval(x) + 0.1 * t).unwrap();
            let g = f.map(|v| if v <= 0.0 { v - c } else { v }).unwrap();
            let (a, b) = (a_priori_bounds_check(&f, &env()).unwrap(), a_priori_bounds_check(&g, &env()).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
