use hjreg_core::oscillation::build_constant_chain;
use hjreg_core::rescale::{theorem_check, CascadeMode, TheoremOptions};
use hjreg_core::{solve, CoercivityEnvelope, GridSpec, HamiltonianSpec, InitialData, SigmaMode, SolveConfig};

fn kink_run(h: HamiltonianSpec, lambda: f64) -> hjreg_core::Trajectory {
    let cfg = SolveConfig {
        grid: GridSpec::with_steps(2, 2.0, 64, 0.0, 1.0, 16).unwrap(),
        hamiltonian: h,
        envelope: CoercivityEnvelope::new(lambda, 1.5).unwrap(),
        initial: InitialData::Sine { amplitude: 1.0, frequency: std::f64::consts::PI, shift: 0.0 },
        c_cfl: 0.45,
        sigma: SigmaMode::default(),
    };
    solve(&cfg).unwrap()
}

#[test]
fn kink_cascade_is_lipschitz_or_better() {
    let chain = build_constant_chain(2, 1.5, 1.0, 1.0).unwrap();
    let h = HamiltonianSpec::power_law(1.5);
    let traj = kink_run(h.clone(), 1.0);
    let rep = theorem_check(&traj.field, &h, 0.25, &chain, &TheoremOptions::default()).unwrap();
    assert!(rep.all_satisfied);
    assert!(rep.alpha_min >= 0.5);
    let opts = TheoremOptions { mode: CascadeMode::Interpolate, ..Default::default() };
    let rep = theorem_check(&traj.field, &h, 0.25, &chain, &opts).unwrap();
    assert!(rep.alpha_min >= 0.5);
}

#[test]
fn rough_sweep_exponent_is_stable() {
    let chain = build_constant_chain(2, 1.5, 2.0, 1.0).unwrap();
    let mut mins = vec![];
    for eta in [0.25, 1.0 / 16.0, 1.0 / 64.0] {
        let h = HamiltonianSpec::rough(2.0, eta, 1.5);
        let traj = kink_run(h.clone(), 2.0);
        let rep = theorem_check(&traj.field, &h, 0.25, &chain, &TheoremOptions::default()).unwrap();
        mins.push(rep.alpha_min);
    }
    let (lo, hi) = mins.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi < 2.0 * lo);
}

#[test]
fn hopf_lax_kink_is_lipschitz() {
    use hjreg_core::oscillation::build_constant_chain_unscoped;
    use hjreg_core::solver::{hopf_lax, search_radius};
    let chain = build_constant_chain_unscoped(1, 2.0, 1.0, 1.0).unwrap();
    let spec = GridSpec::with_steps(1, 3.0, 192, 0.0, 1.0, 8).unwrap();
    let u0 = |x: &[f64]| x[0].abs();
    let r = search_radius(1.0, 1.0, 2.0);
    let u = hjreg_core::make_field(spec, |t, x| if t == 0.0 { x[0].abs() } else { hopf_lax(&u0, t, x, 2.0, r).unwrap() }).unwrap();
    let h = HamiltonianSpec::power_law(2.0);
    let opts = TheoremOptions { lattice: 3, ..Default::default() };
    let rep = theorem_check(&u, &h, 0.5, &chain, &opts).unwrap();
    assert!(rep.max_quotient.is_finite());
    assert!(rep.points.iter().all(|p| (p.estimate.alpha_est - 1.0).abs() < 0.35));
}
