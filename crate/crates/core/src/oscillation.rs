//! Explicit constants of the improved-oscillation step, the dyadic ladder,
//! time reversal, the lower barrier `psi`, and verdicts for the
//! improved-oscillation propositions from above and below.

use std::ops::Bound;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ball_volume, discrete_cylinder_measure, level_set_measure, Cylinder, ScalarField, MAX_DIM};
use crate::solver::{residual_subsolution, residual_supersolution};
use crate::verdict::{LemmaVerdict, VerdictBuilder};

/// Relative tolerance for the equalities re-checked by [`validate_chain`].
pub const CHAIN_REL_TOL: f64 = 1e-12;

/// Slack granted to pointwise bounds in the proposition checks. The monotone
/// scheme obeys discrete maximum and minimum principles exactly, so this only
/// absorbs rounding.
pub const POINTWISE_TOL: f64 = 1e-12;

const MAX_K0: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantChain {
    pub n: usize,
    pub p: f64,
    #[serde(rename = "Lambda")]
    pub lambda_env: f64,
    pub alpha_dg: f64,
    #[serde(rename = "K0")]
    pub k0: u32,
    pub lambda: f64,
    /// `8 Lambda 2^{(p-1)(K0+1)}`.
    pub c: f64,
    pub lambda1_max: f64,
    pub lambda1: f64,
    pub q: f64,
    pub lambda_tilde: f64,
    pub theta: f64,
    pub eps: f64,
    pub a_exp: f64,
    /// `(p - 1) / (p - alpha1)`.
    pub r: f64,
    pub eps1: f64,
    pub alpha1: f64,
    pub alpha_h: f64,
}

/// `ln theta = ln(1 - lambda_tilde / 4)` without cancellation.
fn ln_theta(lambda_tilde: f64) -> f64 {
    (-0.25 * lambda_tilde).ln_1p()
}

fn check3_slack(lambda_tilde: f64, q: f64, eps1: f64) -> f64 {
    let lhs = 4.0 / (4.0 - lambda_tilde) * (2.0 + 0.5 * lambda_tilde);
    let rhs = 2.0 + q * (0.5 / eps1 - 1.0);
    rhs - lhs
}

fn check4_slack(eps1: f64, alpha1: f64) -> f64 {
    eps1.powf(-alpha1) - 4.0
}

/// Both open conditions at `r = (p-1)/(p-alpha1)`.
fn conditions_hold(r: f64, p: f64, lambda_tilde: f64, q: f64) -> bool {
    if r <= 1.0 {
        return false;
    }
    let lt = ln_theta(lambda_tilde);
    let eps1 = (r * lt).exp();
    let alpha1 = p - (p - 1.0) / r;
    // eps1^{-alpha1} = exp(-alpha1 r ln theta)
    check3_slack(lambda_tilde, q, eps1) >= 0.0 && (-(alpha1 * r) * lt).exp() > 4.0
}

/// Builds every constant from `(N, p, Lambda, alpha_DG)`; requires `p < N`.
pub fn build_constant_chain(n: usize, p: f64, lambda_env: f64, alpha_dg: f64) -> Result<ConstantChain> {
    if p > 1.0 && p >= n as f64 {
        return Err(Error::OutOfTheoremScope { p, n });
    }
    build_constant_chain_unscoped(n, p, lambda_env, alpha_dg)
}

/// Same formulas without the `p < N` gate. The chain is well defined for any
/// `p > 1`; only the theorem needs `p < N`. Used for cascade diagnostics on
/// one-dimensional reference problems.
pub fn build_constant_chain_unscoped(n: usize, p: f64, lambda_env: f64, alpha_dg: f64) -> Result<ConstantChain> {
    if !(p > 1.0) || n == 0 || n > MAX_DIM {
        return Err(Error::InvalidArgument(format!("need p > 1 and 1 <= N <= {MAX_DIM}, got p = {p}, N = {n}")));
    }
    if !(lambda_env >= 1.0 && lambda_env.is_finite()) {
        return Err(Error::InvalidArgument(format!("Lambda must be >= 1, got {lambda_env}")));
    }
    if !(alpha_dg > 0.0 && alpha_dg.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha_DG must be positive, got {alpha_dg}")));
    }
    let q_measure = 4.0 * ball_volume(n, 1.0);
    let k0f = (q_measure / alpha_dg).floor() + 1.0;
    if k0f > MAX_K0 {
        return Err(Error::InvalidArgument(format!("alpha_DG = {alpha_dg} gives K0 = {k0f}, beyond the supported range")));
    }
    let k0 = k0f as u32;
    let e = (k0 + 1) as i32;
    let lambda = 2f64.powi(-e);
    let c = 8.0 * lambda_env * ((p - 1.0) * e as f64).exp2();
    // 2 l = (l / c)^{1/p}  <=>  l^{p-1} = 1 / (c 2^p)
    let lambda1_max = (c * p.exp2()).powf(-1.0 / (p - 1.0));
    let lambda1 = 0.5 * lambda.min(lambda1_max);
    let q = (lambda1 / c).powf(1.0 / p);
    let lambda_tilde = 0.5 * lambda1;
    let theta = (4.0 - lambda_tilde) / 4.0;
    let a_exp = 1.0;
    let eps = lambda;

    // smallest r satisfying both conditions, by bracketing then bisection
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    let mut expansions = 0;
    while !conditions_hold(hi, p, lambda_tilde, q) {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return Err(Error::RootFinding(format!("no r in [1, {hi:e}] satisfies both rescaling conditions")));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if conditions_hold(mid, p, lambda_tilde, q) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if !conditions_hold(hi, p, lambda_tilde, q) {
        return Err(Error::RootFinding(format!("bisection ended at [{lo:e}, {hi:e}] without a feasible r")));
    }
    let alpha1 = p - (p - 1.0) / (2.0 * hi);
    // p - alpha1 is exact here, so r and eps1 agree with the stored alpha1
    let r = (p - 1.0) / (p - alpha1);
    let eps1 = (r * ln_theta(lambda_tilde)).exp();
    let alpha_h = (p - alpha1) / (p - 1.0);
    let chain = ConstantChain {
        n,
        p,
        lambda_env,
        alpha_dg,
        k0,
        lambda,
        c,
        lambda1_max,
        lambda1,
        q,
        lambda_tilde,
        theta,
        eps,
        a_exp,
        r,
        eps1,
        alpha1,
        alpha_h,
    };
    let report = validate_chain(&chain);
    if let Some(bad) = report.iter().find(|s| !s.ok) {
        return Err(Error::RootFinding(format!("constructed chain fails {} (slack {:e})", bad.name, bad.slack)));
    }
    Ok(chain)
}

impl ConstantChain {
    /// `2^{(K0+1)(p-1)}`.
    pub fn gradient_gain(&self) -> f64 {
        ((self.p - 1.0) * (self.k0 + 1) as f64).exp2()
    }

    /// Coefficients `(A1, B1)` of the rescaled subsolution inequality.
    pub fn sub_coefficients(&self) -> (f64, f64) {
        (self.gradient_gain() / self.lambda_env, self.lambda_env * self.lambda)
    }

    /// Coefficient `A2` of the rescaled supersolution inequality, also the barrier's.
    pub fn super_coefficient(&self) -> f64 {
        self.gradient_gain() * self.lambda_env
    }

    /// Zoom factor `4 / (4 - lambda_tilde)` applied to values.
    pub fn kappa(&self) -> f64 {
        4.0 / (4.0 - self.lambda_tilde)
    }

    /// Time contraction `eps1^{alpha1}` of one zoom.
    pub fn time_factor(&self) -> f64 {
        (self.alpha1 * self.r * ln_theta(self.lambda_tilde)).exp()
    }

    /// `4 theta^{m+1}`.
    pub fn osc_bound(&self, m: u32) -> f64 {
        4.0 * ((m + 1) as f64 * ln_theta(self.lambda_tilde)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSlack {
    pub name: String,
    pub slack: f64,
    pub ok: bool,
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Re-evaluates every chain relation from the stored values alone.
/// Equalities report `CHAIN_REL_TOL - relative error`; inequalities report
/// their margin. Every slack is nonnegative for a valid chain.
pub fn validate_chain(ch: &ConstantChain) -> Vec<InvariantSlack> {
    let mut out = Vec::new();
    let mut push = |name: &str, slack: f64| out.push(InvariantSlack { name: name.into(), slack, ok: slack >= 0.0 });
    let p = ch.p;
    let e = ch.k0 as f64 + 1.0;

    let k0 = (4.0 * ball_volume(ch.n, 1.0) / ch.alpha_dg).floor() + 1.0;
    push("K0", -(k0 - ch.k0 as f64).abs());

    push("lambda", CHAIN_REL_TOL - rel_err(ch.lambda, (-e).exp2()));

    let c = 8.0 * ch.lambda_env * ((p - 1.0) * e).exp2();
    let qq = (ch.lambda1 / c).powf(1.0 / p);
    push(
        "lambda1",
        (ch.lambda1 / ch.lambda).min(1.0 - ch.lambda1 / ch.lambda).min((qq - 2.0 * ch.lambda1) / qq),
    );

    push("q", CHAIN_REL_TOL - rel_err(ch.q, qq));

    push("lambda_tilde", CHAIN_REL_TOL - rel_err(ch.lambda_tilde, 0.5 * ch.lambda1));

    // eps^{-(p-a)} = 2^{(K0+1)(p-1)} compared in log2 form, and eps^a <= 2^{-(K0+1)}
    let lhs = -(p - ch.a_exp) * ch.eps.log2();
    let eq = CHAIN_REL_TOL - rel_err(lhs, (p - 1.0) * e);
    let ineq = (-e).exp2() * (1.0 + CHAIN_REL_TOL) - ch.eps.powf(ch.a_exp);
    push("eps", eq.min(ineq / (-e).exp2()));

    let lt = (-0.25 * ch.lambda_tilde).ln_1p();
    let eps1 = ((p - 1.0) / (p - ch.alpha1) * lt).exp();
    push(
        "eps1",
        (CHAIN_REL_TOL - rel_err(ch.eps1, eps1)).min(CHAIN_REL_TOL - rel_err(ch.theta, (4.0 - ch.lambda_tilde) / 4.0)),
    );

    let range = (ch.alpha1 - 1.0).min(p - ch.alpha1);
    let c3 = check3_slack(ch.lambda_tilde, ch.q, ch.eps1);
    let c4 = check4_slack(ch.eps1, ch.alpha1);
    push("alpha1", range.min(c3).min(c4));

    let ah = (p - ch.alpha1) / (p - 1.0);
    push("alpha_h", (CHAIN_REL_TOL - rel_err(ch.alpha_h, ah)).min(ch.alpha_h).min(1.0 - ch.alpha_h));
    out
}

/// `u_k = 2^k (f - 2 + 2^{1-k})`.
pub fn dyadic_ladder(f: &ScalarField, k: u32) -> Result<ScalarField> {
    if k == 0 {
        return Err(Error::InvalidArgument("ladder index must be >= 1".into()));
    }
    let s = (k as f64).exp2();
    let shift = 2.0 - (1.0 - k as f64).exp2();
    f.map(|v| s * (v - shift))
}

/// `v(t, x) = -f(-t, x)` on a time interval symmetric about 0.
pub fn time_reverse(f: &ScalarField) -> Result<ScalarField> {
    let spec = f.spec();
    if (spec.t0 + spec.t1).abs() > 1e-12 * spec.t1.abs().max(1.0) {
        return Err(Error::DomainMismatch(format!("time interval [{}, {}] is not symmetric", spec.t0, spec.t1)));
    }
    let n = spec.n_slices();
    let slices = (0..n).map(|i| f.slice(n - 1 - i).iter().map(|v| -v).collect()).collect();
    ScalarField::from_slices(spec.clone(), slices)
}

/// `psi(t, x) = min(-2 + lambda1, -2 - (lambda1/8)(t + 2) + q (1 - |x|))`.
pub fn barrier_psi(chain: &ConstantChain, t: f64, x: &[f64]) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (-2.0 + chain.lambda1).min(-2.0 - chain.lambda1 / 8.0 * (t + 2.0) + chain.q * (1.0 - r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub min_margin: f64,
    pub violating_cells: usize,
    /// `(t, x)` of the smallest margin.
    pub witness_t: f64,
    pub witness_x: Vec<f64>,
}

/// Margin `f - psi` over the whole lattice. The field must start at `t = -2`
/// with `f(-2, .) >= psi(-2, .)`.
pub fn comparison_check(f: &ScalarField, chain: &ConstantChain) -> Result<ComparisonReport> {
    let spec = f.spec();
    if (spec.t0 + 2.0).abs() > 1e-12 {
        return Err(Error::DomainMismatch(format!("comparison needs t0 = -2, got {}", spec.t0)));
    }
    let mut x = [0.0; MAX_DIM];
    for (j, &v) in f.slice(0).iter().enumerate() {
        spec.center(j, &mut x);
        let psi = barrier_psi(chain, -2.0, &x[..spec.dim]);
        if v < psi {
            return Err(Error::Precondition(format!(
                "f(-2, {:?}) = {v} lies below psi = {psi}",
                &x[..spec.dim]
            )));
        }
    }
    let mut rep = ComparisonReport { min_margin: f64::INFINITY, violating_cells: 0, witness_t: spec.t0, witness_x: vec![] };
    for i in 0..spec.n_slices() {
        let t = spec.time(i);
        for (j, &v) in f.slice(i).iter().enumerate() {
            spec.center(j, &mut x);
            let m = v - barrier_psi(chain, t, &x[..spec.dim]);
            if m < 0.0 {
                rep.violating_cells += 1;
            }
            if m < rep.min_margin {
                rep.min_margin = m;
                rep.witness_t = t;
                rep.witness_x = x[..spec.dim].to_vec();
            }
        }
    }
    Ok(rep)
}

fn require_symmetric_window(f: &ScalarField) -> Result<()> {
    let spec = f.spec();
    let tol = 1e-9 * spec.time_step();
    if spec.t0 > -2.0 + tol || spec.t1 < 2.0 - tol || spec.half_width < 1.0 {
        return Err(Error::DomainMismatch(format!(
            "need a field on [-2, 2] x B(1), got [{}, {}] x [-{}, {}]^N",
            spec.t0, spec.t1, spec.half_width, spec.half_width
        )));
    }
    Ok(())
}

fn cells_within(spec: &crate::grid::GridSpec, r: f64) -> impl Fn(usize) -> bool + '_ {
    move |j| spec.center_vec(j).iter().map(|v| v * v).sum::<f64>() < r * r
}

/// Improved oscillation from above: if `f <= 2` and `|{f <= 0}| >= |Q|/2` on
/// `Q = [-2,2] x B(1)`, then `f <= 2 - lambda` on `[1,2] x B(1)`. Also
/// reports the pigeonhole index `j0` (0 when none exists) and the rescaled
/// subsolution residual as diagnostics.
pub fn oscillation_above_check(f: &ScalarField, chain: &ConstantChain) -> Result<LemmaVerdict> {
    require_symmetric_window(f)?;
    let spec = f.spec();
    let q = Cylinder::centered(-2.0, 2.0, spec.dim, 1.0)?;
    let mut b = VerdictBuilder::new("osc_above", spec.cell_width());
    let (_, max) = f.extrema(&q)?;
    b.precondition("max", max, max <= 2.0 + POINTWISE_TOL);
    let full = discrete_cylinder_measure(spec, &q)?.measure;
    let below = level_set_measure(f, &q, Bound::Unbounded, Bound::Included(0.0))?.measure;
    b.hypothesis("below_measure", below, below >= 0.5 * full);
    b.tolerance("half_cylinder", 0.5 * full);
    b.tolerance("pointwise", POINTWISE_TOL);
    let late = Cylinder::centered(1.0, 2.0, spec.dim, 1.0)?;
    let (_, late_max) = f.extrema(&late)?;
    b.conclusion("max_late", late_max, late_max <= 2.0 - chain.lambda + POINTWISE_TOL);
    b.tolerance("lambda", chain.lambda);

    let mut j0 = 0u32;
    for k in 1..=chain.k0 {
        let uk = dyadic_ladder(f, k)?;
        let mid = level_set_measure(&uk, &q, Bound::Excluded(0.0), Bound::Excluded(1.0))?.measure;
        if mid <= chain.alpha_dg {
            j0 = k;
            break;
        }
    }
    b.diagnostic("j0", j0 as f64);
    let (a1, b1) = chain.sub_coefficients();
    let inside = cells_within(spec, 1.0);
    let res = residual_subsolution(f, a1, b1, chain.p).summary_where(|_, j| inside(j));
    b.diagnostic("sub_residual_max", res.max_positive);
    Ok(b.finish())
}

/// Improved oscillation from below: if `f >= -2` on `Q`, `|{f >= 0}| >= |Q|/2`
/// and `f >= -2 - q (|x| - 1)_+` on the whole lattice, then
/// `f >= -2 + lambda_tilde` on `[1,2] x B(1/2)`. The time-reversed
/// intermediate bound on `[-2,-1] x B(1)` and both residuals are diagnostics.
pub fn oscillation_below_check(f: &ScalarField, chain: &ConstantChain) -> Result<LemmaVerdict> {
    require_symmetric_window(f)?;
    let spec = f.spec();
    let q = Cylinder::centered(-2.0, 2.0, spec.dim, 1.0)?;
    let mut b = VerdictBuilder::new("osc_below", spec.cell_width());
    let (min, _) = f.extrema(&q)?;
    b.hypothesis("min", min, min >= -2.0 - POINTWISE_TOL);
    let full = discrete_cylinder_measure(spec, &q)?.measure;
    let above = level_set_measure(f, &q, Bound::Included(0.0), Bound::Unbounded)?.measure;
    b.hypothesis("above_measure", above, above >= 0.5 * full);
    let mut barrier_margin = f64::INFINITY;
    let mut x = [0.0; MAX_DIM];
    for i in spec.slices_in(-2.0, 2.0) {
        for (j, &v) in f.slice(i).iter().enumerate() {
            spec.center(j, &mut x);
            let r = x[..spec.dim].iter().map(|v| v * v).sum::<f64>().sqrt();
            barrier_margin = barrier_margin.min(v - (-2.0 - chain.q * (r - 1.0).max(0.0)));
        }
    }
    b.hypothesis("global_barrier_margin", barrier_margin, barrier_margin >= -POINTWISE_TOL);
    b.tolerance("half_cylinder", 0.5 * full);
    b.tolerance("pointwise", POINTWISE_TOL);
    b.tolerance("lambda_tilde", chain.lambda_tilde);
    let late = Cylinder::centered(1.0, 2.0, spec.dim, 0.5)?;
    let (late_min, _) = f.extrema(&late)?;
    b.conclusion("min_late", late_min, late_min >= -2.0 + chain.lambda_tilde - POINTWISE_TOL);

    let early = Cylinder::centered(-2.0, -1.0, spec.dim, 1.0)?;
    b.diagnostic("min_early", f.extrema(&early)?.0);
    if (spec.t0 + spec.t1).abs() <= 1e-12 {
        let v = time_reverse(f)?;
        let above_v = oscillation_above_check(&v, chain)?;
        b.diagnostic("reversed_max_late", above_v.conclusion_values["max_late"]);
    }
    let (a1, b1) = chain.sub_coefficients();
    let inside = cells_within(spec, 1.0);
    b.diagnostic("sub_residual_max", residual_subsolution(f, a1, b1, chain.p).summary_where(|_, j| inside(j)).max_positive);
    b.diagnostic("super_residual_min", residual_supersolution(f, chain.super_coefficient(), chain.p).summary().min);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_field, GridSpec};
    use crate::verdict::Outcome;
    use proptest::prelude::*;

    fn chain() -> ConstantChain {
        build_constant_chain(2, 1.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn reference_chain_values() {
        let ch = chain();
        assert_eq!(ch.k0, 13);
        assert_eq!(ch.lambda, 2f64.powi(-14));
        assert!((ch.c - 1024.0).abs() < 1e-9);
        assert!((ch.lambda1_max - 1.19e-7).abs() < 0.01e-7, "{}", ch.lambda1_max);
        assert!((ch.lambda1 - 5.96e-8).abs() < 0.01e-8);
        assert!((ch.q - 1.50e-7).abs() < 0.01e-7);
        assert!((ch.lambda_tilde - 2.98e-8).abs() < 0.01e-8);
        assert!(2.0 * ch.lambda1 < ch.q);
        assert_eq!(ch.eps, 2f64.powi(-14));
        assert!(ch.alpha_h > 0.0 && ch.alpha_h < 1e-5);
        assert!(ch.alpha1 > 1.0 && ch.alpha1 < 1.5);
        assert!(validate_chain(&ch).iter().all(|s| s.ok));
        assert_eq!(validate_chain(&ch).len(), 9);
    }

    #[test]
    fn lambda1_max_solves_its_equation() {
        let ch = chain();
        // bisection on 2 l - (l / c)^{1/p}, negative below the root
        let g = |l: f64| 2.0 * l - (l / ch.c).powf(1.0 / ch.p);
        let (mut a, mut b) = (1e-12f64, 1e-3f64);
        for _ in 0..200 {
            let m = (a * b).sqrt();
            if g(m) < 0.0 {
                a = m
            } else {
                b = m
            }
        }
        assert!((a - ch.lambda1_max).abs() < 1e-9 * a);
    }

    #[test]
    fn alpha1_selection_matches_closed_form() {
        let ch = chain();
        let lt = -(-0.25 * ch.lambda_tilde).ln_1p();
        let r3 = (2.0 + 8.0 * ch.lambda_tilde / (ch.q * (4.0 - ch.lambda_tilde))).ln() / lt;
        let r4 = ((4f64).ln() / lt + ch.p - 1.0) / ch.p;
        let r_min = r3.max(r4);
        assert!((ch.r / (2.0 * r_min) - 1.0).abs() < 1e-6, "{} vs {}", ch.r, 2.0 * r_min);
        assert!((ch.eps1 - 0.155).abs() < 0.01, "{}", ch.eps1);
    }

    #[test]
    fn chain_rejects_out_of_scope() {
        assert!(matches!(build_constant_chain(2, 2.0, 1.0, 1.0), Err(Error::OutOfTheoremScope { .. })));
        assert!(build_constant_chain(2, 1.5, 0.5, 1.0).is_err());
        assert!(build_constant_chain(2, 1.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn validator_flags_tampering() {
        let mut ch = chain();
        ch.k0 += 1;
        assert!(!validate_chain(&ch)[0].ok);
        let mut ch = chain();
        ch.alpha1 = 1.2;
        assert!(validate_chain(&ch).iter().any(|s| !s.ok));
        let mut ch = chain();
        ch.q *= 1.0 + 1e-9;
        assert!(!validate_chain(&ch)[3].ok);
    }

    #[test]
    fn osc_bound_ratio_is_theta() {
        let ch = chain();
        for m in 0..6 {
            assert!((ch.osc_bound(m + 1) / ch.osc_bound(m) - ch.theta).abs() < 1e-15);
        }
    }

    #[test]
    fn dyadic_ladder_examples() {
        let spec = GridSpec::new(2, 1.25, 8, -2.0, 2.0, 1.0).unwrap();
        let two = make_field(spec.clone(), |_, _| 2.0).unwrap();
        for k in 1..20 {
            assert!(dyadic_ladder(&two, k).unwrap().values().iter().all(|&v| v == 2.0));
        }
        let one = make_field(spec.clone(), |_, _| 1.0).unwrap();
        assert!(dyadic_ladder(&one, 1).unwrap().values().iter().all(|&v| v == 0.0));
        let zero = make_field(spec, |_, _| 0.0).unwrap();
        assert!(dyadic_ladder(&zero, 2).unwrap().values().iter().all(|&v| v == -6.0));
    }

    #[test]
    fn time_reverse_examples() {
        let spec = GridSpec::new(1, 1.0, 8, -2.0, 2.0, 0.5).unwrap();
        let t = make_field(spec.clone(), |t, _| t).unwrap();
        assert_eq!(time_reverse(&t).unwrap(), t);
        let c = make_field(spec.clone(), |_, _| 0.3).unwrap();
        assert!(time_reverse(&c).unwrap().values().iter().all(|&v| v == -0.3));
        let g = make_field(spec, |t, x| (t * x[0]).sin() + t * t).unwrap();
        assert_eq!(time_reverse(&time_reverse(&g).unwrap()).unwrap(), g);
        let asym = GridSpec::new(1, 1.0, 8, -1.0, 2.0, 0.5).unwrap();
        assert!(time_reverse(&make_field(asym, |_, _| 0.0).unwrap()).is_err());
    }

    #[test]
    fn barrier_examples() {
        let ch = chain();
        assert_eq!(barrier_psi(&ch, -2.0, &[1.0, 0.0]), -2.0);
        assert!((barrier_psi(&ch, 2.0, &[0.0, 1.0]) - (-2.0 - ch.lambda1 / 2.0)).abs() < 1e-15);
        assert_eq!(barrier_psi(&ch, -2.0, &[0.0, 0.0]), -2.0 + ch.lambda1);
    }

    #[test]
    fn comparison_examples() {
        let ch = chain();
        let spec = GridSpec::new(2, 1.25, 16, -2.0, 2.0, 0.5).unwrap();
        let top = make_field(spec.clone(), |_, _| -2.0 + ch.lambda1).unwrap();
        let r = comparison_check(&top, &ch).unwrap();
        assert!(r.min_margin >= 0.0);
        assert_eq!(r.violating_cells, 0);
        let low = make_field(spec, |t, x| barrier_psi(&ch, t, x) - 1e-3).unwrap();
        assert!(matches!(comparison_check(&low, &ch), Err(Error::Precondition(_))));
    }

    #[test]
    fn proposition_examples() {
        let ch = chain();
        let spec = GridSpec::new(2, 1.25, 20, -2.0, 2.0, 0.25).unwrap();
        let m1 = make_field(spec.clone(), |_, _| -1.0).unwrap();
        assert_eq!(oscillation_above_check(&m1, &ch).unwrap().outcome, Outcome::Holds);
        let two = make_field(spec.clone(), |_, _| 2.0).unwrap();
        assert_eq!(oscillation_above_check(&two, &ch).unwrap().outcome, Outcome::Vacuous);
        let zero = make_field(spec.clone(), |_, _| 0.0).unwrap();
        assert_eq!(oscillation_below_check(&zero, &ch).unwrap().outcome, Outcome::Holds);
        let m2 = make_field(spec, |_, _| -2.0).unwrap();
        let v = oscillation_below_check(&m2, &ch).unwrap();
        assert_eq!(v.outcome, Outcome::Vacuous);
        assert_eq!(v.hypothesis_values["above_measure"], 0.0);
    }

    #[test]
    fn pigeonhole_index_exists_for_mixed_fields() {
        let ch = chain();
        let spec = GridSpec::new(2, 1.25, 20, -2.0, 2.0, 0.25).unwrap();
        let f = make_field(spec, |t, x| (x[0] + 0.1 * t).clamp(-1.0, 2.0)).unwrap();
        let v = oscillation_above_check(&f, &ch).unwrap();
        let j0 = v.diagnostics["j0"];
        assert!(j0 >= 1.0 && j0 <= ch.k0 as f64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn ladder_properties(seed in 0u64..1000, k in 1u32..14) {
            let spec = GridSpec::new(2, 1.25, 12, -2.0, 2.0, 0.5).unwrap();
            let d = crate::solver::InitialData::Trig { seed, amplitude: 3.0, modes: 3, frequency: 1.0, shift: 0.0, positive_part: false, clip: Some((-3.0, 2.0)) };
            let prof = d.profile(2).unwrap();
            let f = make_field(spec.clone(), |t, x| (prof.eval(x) - 0.1 * t).min(2.0)).unwrap();
            let uk = dyadic_ladder(&f, k).unwrap();
            prop_assert!(uk.values().iter().all(|&v| v <= 2.0));
            let q = Cylinder::centered(-2.0, 2.0, 2, 1.0).unwrap();
            let a = level_set_measure(&uk, &q, Bound::Unbounded, Bound::Included(0.0)).unwrap();
            let b = level_set_measure(&f, &q, Bound::Unbounded, Bound::Included(0.0)).unwrap();
            prop_assert!(a.cells >= b.cells);
        }

        #[test]
        fn barrier_is_lipschitz(t in -2.0f64..2.0, s in -2.0f64..2.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let ch = chain();
            let dt = (barrier_psi(&ch, t, &[x, 0.0]) - barrier_psi(&ch, s, &[x, 0.0])).abs();
            prop_assert!(dt <= ch.lambda1 / 8.0 * (t - s).abs() * (1.0 + 1e-9) + 1e-15);
            let dx = (barrier_psi(&ch, t, &[x, 0.0]) - barrier_psi(&ch, t, &[y, 0.0])).abs();
            prop_assert!(dx <= ch.q * (x.abs() - y.abs()).abs() * (1.0 + 1e-9) + 1e-15);
        }

        #[test]
        fn chain_invariants_hold(n in 2usize..5, p_frac in 0.05f64..0.95, lam in 1.0f64..4.0, alpha in 0.5f64..20.0) {
            let p = 1.0 + p_frac * (n as f64 - 1.0);
            let ch = build_constant_chain(n, p, lam, alpha).unwrap();
            for s in validate_chain(&ch) {
                prop_assert!(s.ok, "{} slack {}", s.name, s.slack);
            }
        }
    }
}
