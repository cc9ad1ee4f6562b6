//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hjreg_cli::report::without_timings;
use hjreg_cli::runner::load_without_timings;
use hjreg_cli::{ensemble, parse_config, run, ExperimentConfig, Status};
use hjreg_core::degiorgi::{fast_convergence_threshold, simulate_recurrence};
use hjreg_core::solver::{cfl_dt, estimate_sigma, step};
use hjreg_core::{
    build_constant_chain, holder_estimate, validate_chain, Cylinder, GridSpec, HamiltonianKind, HamiltonianSpec,
    InitialData, OscillationRecord,
};
use rayon::prelude::*;
use serde_json::Value;

type Check = Result<String, String>;

fn config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    parse_config(&path).unwrap_or_else(|e| panic!("{e}"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn hopf_lax_agreement(out: &Path) -> Check {
    let o = run(&config("hopf-lax.toml"), out).map_err(|e| e.to_string())?;
    let r = &o.report.extras["refinement"];
    let widths: Vec<f64> = r["cell_widths"].as_array().unwrap().iter().map(f).collect();
    let errors: Vec<f64> = r["errors"].as_array().unwrap().iter().map(f).collect();
    let order_min = f(&r["order_min"]);
    let final_error = f(&r["final_error"]);
    let monotone = r["monotone"].as_bool().unwrap_or(false);
    let msg = format!("widths {widths:?} errors {errors:.4?} order_min {order_min:.3} final {final_error:.4}");
    ensure(
        widths == [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0] && monotone && order_min >= 0.4 && final_error <= 0.02,
        msg,
    )
}

fn comparison_pairs() -> Check {
    let spec = GridSpec::new(2, 1.25, 32, 0.0, 0.5, 0.5).unwrap();
    let results: Vec<Result<f64, String>> = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let h = if k % 2 == 0 {
                HamiltonianSpec::power_law(1.5)
            } else {
                HamiltonianSpec {
                    kind: HamiltonianKind::RoughCoefficient { lambda: 2.0, eta: 0.125 },
                    p: 1.5,
                    offset: 0.0,
                }
            };
            let base = InitialData::Trig {
                seed: 2 * k,
                amplitude: 1.0,
                modes: 3,
                frequency: 2.0,
                shift: 0.0,
                positive_part: false,
                clip: None,
            };
            let bump = InitialData::Trig {
                seed: 2 * k + 1,
                amplitude: 0.5,
                modes: 3,
                frequency: 2.0,
                shift: 0.0,
                positive_part: true,
                clip: None,
            };
            let mut u = base.sample(&spec).map_err(|e| e.to_string())?;
            let w = bump.sample(&spec).map_err(|e| e.to_string())?;
            let mut v: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
            let sigma = estimate_sigma(&spec, &h, &u).max(estimate_sigma(&spec, &h, &v));
            let dt = cfl_dt(&spec, sigma, 0.45).map_err(|e| e.to_string())?;
            let steps = ((spec.t1 - spec.t0) / dt).ceil() as usize;
            let dt = (spec.t1 - spec.t0) / steps as f64;
            let mut worst = 0.0f64;
            for s in 0..steps {
                let t = spec.t0 + s as f64 * dt;
                u = step(&spec, &h, t, dt, sigma, &u).map_err(|e| e.to_string())?;
                v = step(&spec, &h, t, dt, sigma, &v).map_err(|e| e.to_string())?;
                let scale = u.iter().chain(&v).fold(0.0f64, |m, x| m.max(x.abs()));
                let viol = u.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max(a - b));
                worst = worst.max(viol);
                if viol > 1e-12 + 2.0 * f64::EPSILON * scale.max(1.0) {
                    return Err(format!("pair {k} step {s}: violation {viol:e}"));
                }
            }
            Ok(worst)
        })
        .collect();
    let mut worst = 0.0f64;
    for r in results {
        worst = worst.max(r?);
    }
    Ok(format!("50 pairs, worst ordering violation {worst:e}"))
}

fn constant_chain() -> Check {
    let ch = build_constant_chain(2, 1.5, 1.0, 1.0).map_err(|e| e.to_string())?;
    let slacks = validate_chain(&ch);
    let min_slack = slacks.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
    let all_ok = slacks.len() == 9 && slacks.iter().all(|s| s.ok && s.slack >= 0.0);
    ensure(
        ch.k0 == 13 && ch.lambda == 2f64.powi(-14) && all_ok && ch.alpha_h > 0.0 && ch.alpha_h < 1.0,
        format!("K0 {} lambda {:e} slacks {} min {min_slack:e} alpha_H {:e}", ch.k0, ch.lambda, slacks.len(), ch.alpha_h),
    )
}

fn recurrence_cells() -> Check {
    let mut worst = 0usize;
    for d in [1.0, 10.0, 100.0] {
        for beta in [0.25, 0.75, 2.0] {
            let a1 = fast_convergence_threshold(d, beta).map_err(|e| e.to_string())?;
            let seq = simulate_recurrence(d, beta, a1, 40);
            match seq.iter().position(|&a| a < 1e-12) {
                Some(k) => worst = worst.max(k + 1),
                None => return Err(format!("D {d} beta {beta}: a_40 = {:e}", seq[39])),
            }
        }
    }
    Ok(format!("9 cells, slowest reaches 1e-12 at k = {worst}"))
}

fn ensemble_summary(name: &str, count: usize, seed: u64, check: &str, out: &Path) -> Result<(usize, usize, usize, Status), String> {
    let (rep, _) = ensemble(&config(name), count, seed, out).map_err(|e| e.to_string())?;
    let sat = rep.satisfied.get(check).copied().unwrap_or(0);
    let refuted = rep.refutations.get(check).copied().unwrap_or(0);
    Ok((sat, refuted, rep.counts.vacuous + rep.counts.error, rep.status))
}

fn lemma1_ensemble(out: &Path) -> Check {
    let (sat, refuted, other, status) = ensemble_summary("lemma1-ensemble.toml", 20, 2024, "lemma1", out)?;
    ensure(
        sat == 20 && refuted == 0 && status == Status::Pass,
        format!("20 members, hypothesis held {sat}, refutations {refuted}, vacuous or error {other}"),
    )
}

fn barrier(out: &Path) -> Check {
    let o = run(&config("barrier.toml"), out).map_err(|e| e.to_string())?;
    let c = o.report.checks.iter().find(|c| c.name == "barrier").ok_or("no barrier check")?;
    let v = c.verdict.as_ref().ok_or("no verdict")?;
    let cw = v.cell_width;
    let res = v.conclusion_values["residual_max_abs"];
    let margin = v.conclusion_values["min_margin"];
    ensure(
        res <= 5.0 * cw && margin >= -5.0 * cw && o.report.status == Status::Pass,
        format!("residual {res:e} min margin {margin:e} against 5 dx = {}", 5.0 * cw),
    )
}

fn prop_ensembles(out: &Path) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, check) in [("prop-above.toml", "osc_above"), ("prop-below.toml", "osc_below")] {
        let (sat, refuted, other, _) = ensemble_summary(name, 40, 99, check, out)?;
        ok &= sat >= 20 && refuted == 0;
        parts.push(format!("{check}: {sat} satisfied, {refuted} refuted, {other} vacuous"));
    }
    ensure(ok, parts.join("; "))
}

fn synthetic_holder() -> Result<f64, String> {
    let ch = build_constant_chain(2, 1.5, 1.0, 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for alpha in [0.05, 0.3, 0.5, 1.0, 1.7] {
        let records: Vec<OscillationRecord> = (0..7u32)
            .map(|m| {
                let r = 0.5 * 0.6f64.powi(m as i32);
                OscillationRecord {
                    m,
                    cylinder: Cylinder::centered(-r, 0.0, 2, r).unwrap(),
                    osc_measured: 3.0 * r.powf(alpha),
                    osc_bound: 4.0,
                    d_m: 0.0,
                    satisfied: true,
                }
            })
            .collect();
        let est = holder_estimate(&records, &ch);
        worst = worst.max((est.alpha_est - alpha).abs()).max((est.c_est - 3.0).abs());
    }
    Ok(worst)
}

fn kink_cascade(out: &Path) -> Check {
    let cfg = config("kink-cascade.toml");
    let zooms = cfg.cascade.zooms;
    let o = run(&cfg, out).map_err(|e| e.to_string())?;
    let c = o.report.checks.iter().find(|c| c.name == "theorem").ok_or("no theorem check")?;
    let d = c.details.as_ref().ok_or("no details")?;
    let points = d["points"].as_array().unwrap();
    let alpha_min = f(&d["alpha_min"]);
    let satisfied = d["all_satisfied"].as_bool().unwrap_or(false);
    let mut rows_ok = true;
    for k in 0..points.len() {
        let csv = std::fs::read_to_string(o.dir.join(format!("cascades/point-{k:03}.csv"))).map_err(|e| e.to_string())?;
        rows_ok &= csv.lines().count() == zooms as usize + 2;
    }
    let synth = synthetic_holder()?;
    ensure(
        zooms == 6 && points.len() == 25 && rows_ok && satisfied && alpha_min >= 0.5 && synth <= 1e-6,
        format!("{} points, M = {zooms}, records satisfied {satisfied}, alpha_min {alpha_min:.3}, synthetic error {synth:e}", points.len()),
    )
}

fn rough_sweep(out: &Path) -> Check {
    let o = run(&config("rough-eta-sweep.toml"), out).map_err(|e| e.to_string())?;
    let rows = o.report.extras["sweep"].as_array().ok_or("no sweep")?;
    let etas: Vec<f64> = rows.iter().map(|r| f(&r["eta"])).collect();
    let mins: Vec<f64> = rows.iter().map(|r| f(&r["alpha_min"])).collect();
    let violations: u64 = rows.iter().map(|r| r["coercivity_violations"].as_u64().unwrap_or(u64::MAX)).sum();
    let ratio = f(&o.report.extras["alpha_min_ratio"]);
    ensure(
        etas == [0.25, 0.0625, 0.015625] && ratio < 2.0 && violations == 0,
        format!("alpha_min {mins:.3?} ratio {ratio:.3} coercivity violations {violations}"),
    )
}

fn determinism_and_exit_codes(out: &Path) -> Check {
    let bin = env!("CARGO_BIN_EXE_hjreg");
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/prop-below.toml");
    let mut texts = Vec::new();
    for sub in ["a", "b"] {
        let o = Command::new(bin)
            .args(["ensemble", "--config", cfg.to_str().unwrap(), "--count", "6", "--seed", "17", "--out"])
            .arg(out.join(sub))
            .output()
            .map_err(|e| e.to_string())?;
        let line = String::from_utf8_lossy(&o.stdout).trim().to_string();
        let dir = line.split_once(' ').ok_or("no run directory printed")?.1.to_string();
        let text = std::fs::read_to_string(Path::new(&dir).join("report.json")).map_err(|e| e.to_string())?;
        texts.push(without_timings(&text).map_err(|e| e.to_string())?);
    }
    let identical = texts[0] == texts[1];
    let mut codes = Vec::new();
    for name in ["exit0_zero.toml", "exit1_refuted.toml", "exit2_unknown_key.toml", "exit3_solver.toml"] {
        let o = Command::new(bin)
            .args(["run", "--config"])
            .arg(fixture(name))
            .arg("--out")
            .arg(out.join("codes"))
            .env_remove("HJREG_OUT_DIR")
            .output()
            .map_err(|e| e.to_string())?;
        codes.push(o.status.code().unwrap_or(-1));
    }
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(fixture("golden_zero_report.json")).unwrap()).unwrap();
    let zero_dir = std::fs::read_dir(out.join("codes"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("run-zero"))
        .ok_or("no zero run")?;
    let golden_ok = load_without_timings(&zero_dir.join("report.json")).map_err(|e| e.to_string())? == golden;
    ensure(
        identical && codes == [0, 1, 2, 3] && golden_ok,
        format!("ensemble reports identical {identical}, exit codes {codes:?}, golden match {golden_ok}"),
    )
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("tempdir");
    let root = tmp.path();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Check + '_>)> = vec![
        ("AC1 hopf-lax oracle agreement", Duration::from_secs(60), Box::new(|| hopf_lax_agreement(&root.join("ac1")))),
        ("AC2 discrete comparison principle", Duration::from_secs(300), Box::new(comparison_pairs)),
        ("AC3 constant chain", Duration::from_secs(1), Box::new(constant_chain)),
        ("AC4 recurrence simulation", Duration::from_secs(1), Box::new(recurrence_cells)),
        ("AC5 lemma1 ensemble", Duration::from_secs(600), Box::new(|| lemma1_ensemble(&root.join("ac5")))),
        ("AC6 barrier", Duration::from_secs(120), Box::new(|| barrier(&root.join("ac6")))),
        ("AC7 oscillation ensembles", Duration::from_secs(900), Box::new(|| prop_ensembles(&root.join("ac7")))),
        ("AC8 kink cascade", Duration::from_secs(1200), Box::new(|| kink_cascade(&root.join("ac8")))),
        ("AC9 rough eta sweep", Duration::from_secs(1200), Box::new(|| rough_sweep(&root.join("ac9")))),
        ("AC10 determinism and exit codes", Duration::from_secs(120), Box::new(|| determinism_and_exit_codes(&root.join("ac10")))),
    ];
    let mut failed = 0;
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, msg) = match result {
            Ok(m) if elapsed <= *budget => (true, m),
            Ok(m) => (false, format!("{m}; over budget {budget:?}")),
            Err(m) => (false, m),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name}: {msg} ({:.2}s)", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
