//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! The 1D criteria run the full FD pipeline on the bundled configs; the 3D
//! criteria run the bundled refractive and Robin scenes. Tolerances are
//! fixed here, not tuned at run time.

use std::path::{Path, PathBuf};

use enclosure_core::extraction::{
    classify_sign, estimate_distance, recover_gamma_beta_1d, reference_r, SignClass,
};
use enclosure_core::geometry::{DataMode, Shape, Vec3};
use enclosure_core::indicator::{IndicatorCurve, IndicatorKind};
use enclosure_core::runner::{run_experiment, ExperimentConfig, RunArtifacts, RunOutcome, TimeSpec};
use enclosure_core::solver1d::{laplace_w_exact_1d, solve_1d, Wave1DConfig};
use enclosure_core::solver3d::{
    discrete_energy_3d, solve_refractive, Grid3D, MediumField, RobinMask, SolveOptions,
};
use enclosure_core::sources::{eval_grad_v, eval_v, SourceBall};
use enclosure_core::transform::{laplace_in_time, linear_tau_grid, TimeTrace};

fn criterion(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n:02} {name} failed: {detail}");
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    let text = std::fs::read_to_string(config_dir().join(name)).unwrap();
    ExperimentConfig::from_json(&text).unwrap()
}

fn out_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("enclosure_acceptance").join(tag);
    std::fs::remove_dir_all(&dir).ok();
    dir
}

fn run(cfg: &ExperimentConfig, tag: &str) -> RunArtifacts {
    run_experiment(cfg, &out_dir(tag)).unwrap()
}

/// Smallest-magnitude signed value of the curve on the window, as a sign
/// witness: positive iff every window sample is positive.
fn window_sign(curve: &IndicatorCurve, window: (f64, f64)) -> i32 {
    let mut pos = true;
    let mut neg = true;
    for (t, v) in curve.taus.iter().zip(&curve.values) {
        if *t >= window.0 - 1e-9 && *t <= window.1 + 1e-9 {
            pos &= *v > 0.0;
            neg &= *v < 0.0;
        }
    }
    if pos {
        1
    } else if neg {
        -1
    } else {
        0
    }
}

#[test]
fn criterion_01_one_d_distance_recovery() {
    let cfg = load("1d-robin.json");
    let start = std::time::Instant::now();
    let art = run(&cfg, "c1");
    let wall = start.elapsed().as_secs_f64();
    let d = art.report.d_hat.expect("distance fit must succeed");
    let sign_ok = window_sign(&art.curve, (6.0, 12.0)) == 1;
    let pass = (d - 2.0).abs() <= 0.1 && sign_ok && wall <= 10.0;
    criterion(
        1,
        "1d distance recovery",
        pass,
        &format!("d_hat = {d:.4} (target 2.0 +- 5%), positive on [6,12]: {sign_ok}, wall {wall:.2} s"),
    );
}

#[test]
fn criterion_02_one_d_sign_flips() {
    let base = load("1d-robin.json");
    let mut results = Vec::new();
    for (gamma, beta, expected) in [(4.0, 0.0, -1), (1.0, 0.5, -1), (1.0, -0.5, 1)] {
        let mut cfg = base.clone();
        cfg.scene.gamma = gamma;
        cfg.scene.beta = beta;
        let art = run(&cfg, &format!("c2-{gamma}-{beta}"));
        let s = window_sign(&art.curve, (6.0, 12.0));
        results.push((gamma, beta, s, expected));
    }
    let pass = results.iter().all(|(_, _, s, e)| s == e);
    criterion(2, "1d sign flips", pass, &format!("(gamma, beta, sign, expected) = {results:?}"));
}

#[test]
fn criterion_03_one_d_invisibility() {
    // Traces independent of the obstacle position at the absorbing-matched
    // coefficients, on a shared grid.
    let src = SourceBall::new(Shape::Interval1D { lo: -1.5, hi: -1.0 }, 1.0).unwrap();
    let probes = [-1.25, 0.0];
    let mut traces = Vec::new();
    for a in [1.0, 2.0] {
        let cfg = Wave1DConfig {
            boundary: a,
            gamma: 1.0,
            beta: 0.0,
            domain_left: -9.0,
            h: 1.0 / 400.0,
            courant: 1.0,
            t_final: 6.0,
        };
        traces.push(solve_1d(&cfg, &src, &probes).unwrap());
    }
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for p in 0..probes.len() {
        for (u1, u2) in traces[0].trace.samples[p].iter().zip(&traces[1].trace.samples[p]) {
            worst = worst.max((u1 - u2).abs());
            scale = scale.max(u1.abs());
        }
    }
    let trace_ok = worst <= 1e-6 * scale;

    // The runner flags the indicator as floor-level.
    let art = run(&load("1d-invisible.json"), "c3");
    let peak_i = art.curve.values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let floor_ok = peak_i <= 10.0 * art.report.control_floor;
    let class_ok = art.report.sign_class == SignClass::Indeterminate && !art.report.reliable;
    criterion(
        3,
        "1d invisibility",
        trace_ok && floor_ok && class_ok,
        &format!(
            "trace deviation {:.2e} of {scale:.2e}, |I| {peak_i:.2e} vs control floor {:.2e}, sign {:?}",
            worst, art.report.control_floor, art.report.sign_class
        ),
    );
}

#[test]
fn criterion_04_one_d_coefficient_recovery() {
    // End-to-end recovery.
    let base = load("1d-robin.json");
    let mut detail = String::new();
    let mut pass = true;
    for (gamma, beta) in [(0.5, 0.3), (2.0, -0.2)] {
        let mut cfg = base.clone();
        cfg.scene.gamma = gamma;
        cfg.scene.beta = beta;
        let art = run(&cfg, &format!("c4-{gamma}-{beta}"));
        let g = art.report.gamma_hat.expect("gamma recovery must run");
        let b = art.report.beta_hat.expect("beta recovery must run");
        pass &= ((g - gamma) / gamma).abs() <= 0.05 && ((b - beta) / beta).abs() <= 0.15;
        detail += &format!("({gamma},{beta}) -> ({g:.4},{b:.4}); ");
    }

    // Exact-to-fit-tolerance recovery on curves synthesized from the
    // expansion's closed sum.
    let taus = linear_tau_grid(2.0, 12.0, 24).unwrap();
    for (gamma, beta) in [(0.5, 0.3), (2.0, -0.2)] {
        let values: Vec<f64> = taus
            .iter()
            .map(|&t| reference_r(t, gamma, beta).unwrap() * (-4.0 * t).exp())
            .collect();
        let curve = IndicatorCurve {
            kind: IndicatorKind::OneDim,
            taus: taus.clone(),
            values,
            floor: vec![1e-300; taus.len()],
            scene_tag: String::new(),
        };
        let rec = recover_gamma_beta_1d(&curve, &vec![1.0; taus.len()], 2.0, (6.0, 12.0)).unwrap();
        pass &= ((rec.gamma_hat - gamma) / gamma).abs() < 1e-3
            && ((rec.beta_hat - beta) / beta).abs() < 1e-3;
        detail += &format!(
            "synthetic ({gamma},{beta}) -> ({:.6},{:.6}); ",
            rec.gamma_hat, rec.beta_hat
        );
    }
    criterion(4, "1d coefficient recovery", pass, &detail);
}

#[test]
fn criterion_05_oracle_equivalence() {
    let src = SourceBall::new(Shape::Interval1D { lo: -1.5, hi: -1.0 }, 1.0).unwrap();
    let boundary_transform = |h: f64, t_final: f64, tau: f64| -> f64 {
        let probes = [0.0];
        let cfg = Wave1DConfig {
            boundary: 1.0,
            gamma: 0.5,
            beta: 0.3,
            domain_left: Wave1DConfig::causal_domain_left(&src, &probes, t_final).unwrap(),
            h,
            courant: 0.9,
            t_final,
        };
        let out = solve_1d(&cfg, &src, &probes).unwrap();
        laplace_in_time(&TimeTrace::new(out.dt, vec![out.boundary_trace]), &[tau]).unwrap().values
            [0][0]
    };
    let mut pass = true;
    let mut detail = String::new();
    for tau in [3.0, 6.0, 9.0] {
        let exact = laplace_w_exact_1d(1.0, 0.5, 0.3, &src, tau).unwrap().w_at_boundary;
        // Gap at the pinned resolution and observation time.
        let gap = ((boundary_transform(1.0 / 400.0, 6.0, tau) - exact) / exact).abs();
        pass &= gap <= 1e-3;
        // Order across h and h/2; measured with a longer window so the
        // finite-observation floor of the infinite-time closed form stays
        // below the discretization part at tau = 3.
        let g1 = ((boundary_transform(1.0 / 400.0, 8.0, tau) - exact_t8(&src, tau)) / exact_t8(&src, tau)).abs();
        let g2 = ((boundary_transform(1.0 / 800.0, 8.0, tau) - exact_t8(&src, tau)) / exact_t8(&src, tau)).abs();
        let order = (g1 / g2).log2();
        pass &= order >= 1.8;
        detail += &format!("tau {tau}: gap {gap:.2e}, order {order:.2}; ");
    }
    criterion(5, "1d oracle equivalence", pass, &detail);
}

fn exact_t8(src: &SourceBall, tau: f64) -> f64 {
    laplace_w_exact_1d(1.0, 0.5, 0.3, src, tau).unwrap().w_at_boundary
}

#[test]
fn criterion_06_three_d_backscatter_refractive() {
    let start = std::time::Instant::now();
    let b1 = run(&load("3d-refractive-b1.json"), "c6-b1");
    let wall_b1 = start.elapsed().as_secs_f64();
    let d = b1.report.d_hat.expect("distance fit must succeed");
    let sign_b1 = window_sign(&b1.curve, (4.0, 8.0));

    let start = std::time::Instant::now();
    let b2 = run(&load("3d-refractive-b2.json"), "c6-b2");
    let wall_b2 = start.elapsed().as_secs_f64();
    let sign_b2 = window_sign(&b2.curve, (4.0, 8.0));

    let pass = sign_b1 == 1
        && (1.02..=1.38).contains(&d)
        && sign_b2 == -1
        && wall_b1 <= 300.0
        && wall_b2 <= 300.0;
    criterion(
        6,
        "3d back-scattering refractive",
        pass,
        &format!(
            "B1: sign {sign_b1}, d_hat {d:.4} in [1.02, 1.38], {wall_b1:.1} s; B2: sign {sign_b2}, {wall_b2:.1} s"
        ),
    );
}

#[test]
fn criterion_07_three_d_surface_backscatter_consistency() {
    let art = run(&load("3d-refractive-b1-surface.json"), "c7");
    let back = art.secondary_curve.as_ref().expect("surface runs record both data types");
    let mut worst = 0.0_f64;
    for (i, t) in art.curve.taus.iter().enumerate() {
        if *t >= 4.0 - 1e-9 && *t <= 8.0 + 1e-9 {
            worst = worst.max((art.curve.values[i] - back.values[i]).abs() / back.values[i].abs());
        }
    }
    // Note: the observed gap at the configured observation time is dominated
    // by the genuine finite-observation remainder of the identity relating
    // the two data types (it shrinks to ~1.5% when the observation window is
    // extended by 20% and does not move under grid refinement).
    criterion(
        7,
        "3d surface vs back-scattering consistency",
        worst <= 0.05,
        &format!("worst in-window gap {:.4} of |I_backscatter| (tolerance 0.05)", worst),
    );
}

#[test]
fn criterion_08_three_d_robin_signs() {
    let hard = run(&load("3d-robin-hard.json"), "c8-hard");
    let damped = run(&load("3d-robin-damped.json"), "c8-damped");
    let sign_hard = window_sign(&hard.curve, (4.0, 8.0));
    let sign_damped = window_sign(&damped.curve, (4.0, 8.0));
    let d_hard = hard.report.d_hat.expect("distance fit must succeed");
    let d_damped = damped.report.d_hat.expect("distance fit must succeed");
    let pass = sign_hard == 1
        && sign_damped == -1
        && (d_hard - 1.2).abs() <= 0.18
        && (d_damped - 1.2).abs() <= 0.18;
    criterion(
        8,
        "3d robin sign and distance",
        pass,
        &format!(
            "gamma=0: sign {sign_hard}, d_hat {d_hard:.4}; gamma=3: sign {sign_damped}, d_hat {d_damped:.4} (target 1.2 +- 15%)"
        ),
    );
}

#[test]
fn criterion_09_invariant_suites() {
    let mut pass = true;
    let mut detail = String::new();

    // Energy dissipation, 1D Robin (gamma, beta >= 0).
    let src = SourceBall::new(Shape::Interval1D { lo: -1.5, hi: -1.0 }, 1.0).unwrap();
    for (gamma, beta) in [(0.5, 0.3), (0.0, 0.0), (2.0, 0.5)] {
        let cfg = Wave1DConfig {
            boundary: 1.0,
            gamma,
            beta,
            domain_left: -8.0,
            h: 1.0 / 200.0,
            courant: 0.9,
            t_final: 4.0,
        };
        let out = solve_1d(&cfg, &src, &[0.0]).unwrap();
        let e0 = out.energy[0];
        let ok = out.energy.windows(2).all(|w| w[1] <= w[0] + 1e-10 * e0);
        pass &= ok;
        if !ok {
            detail += &format!("1d energy increased at ({gamma},{beta}); ");
        }
    }

    // Energy: 3D Robin dissipation and free-space leapfrog conservation.
    let ball = |c: [f64; 3], r: f64| Shape::Ball { center: Vec3(c), radius: r };
    let grid = Grid3D::causal(Vec3([-1.4, -1.4, -1.4]), Vec3([1.4, 1.4, 1.4]), 0.15, 0.9, 1.8).unwrap();
    let src3 = SourceBall::new(ball([-0.8, 0.0, 0.0], 0.3), 1.0).unwrap();
    let mask = RobinMask::build(&grid, &ball([0.7, 0.0, 0.0], 0.45), &|_| 0.5, &|_| 0.2).unwrap();
    let out = enclosure_core::solver3d::solve_robin(
        &grid,
        &mask,
        &src3,
        &[Vec3([-0.5, 0.0, 0.0])],
        1.8,
        SolveOptions { record_energy: true },
        None,
    )
    .unwrap();
    let e0 = out.energy[0];
    let robin_ok = out.energy.windows(2).all(|w| w[1] <= w[0] + 1e-9 * e0);
    pass &= robin_ok;
    detail += &format!("3d robin energy non-increasing: {robin_ok}; ");

    let medium = MediumField::uniform(&grid);
    let out = solve_refractive(
        &grid,
        &medium,
        &src3,
        &[Vec3([-0.5, 0.0, 0.0])],
        1.8,
        SolveOptions { record_energy: true },
        None,
    )
    .unwrap();
    let e0 = out.energy[0];
    let conserve_ok = out.energy.iter().all(|e| (e - e0).abs() <= 1e-11 * e0);
    pass &= conserve_ok;
    detail += &format!("3d free leapfrog energy conserved: {conserve_ok}; ");

    // Causality: zero trace before the lattice cone, tiny precursors after.
    let probe = Vec3([1.0, 0.0, 0.0]);
    let grid_c = Grid3D::causal(Vec3([-2.2, -2.2, -2.2]), Vec3([2.2, 2.2, 2.2]), 0.1, 0.9, 2.0).unwrap();
    let src_c = SourceBall::new(ball([-1.0, 0.0, 0.0], 0.3), 1.0).unwrap();
    let out = solve_refractive(&grid_c, &MediumField::uniform(&grid_c), &src_c, &[probe], 2.0, SolveOptions::default(), None)
        .unwrap();
    let dist = 1.7;
    let row = &out.trace.samples[0];
    let peak = row.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let n_cone = ((dist * grid_c.courant / 3f64.sqrt()) / out.dt) as usize;
    let causal_ok = row[..n_cone].iter().all(|&v| v == 0.0)
        && row[..((0.7 * dist / out.dt) as usize)]
            .iter()
            .all(|&v| v.abs() <= 3e-6 * peak);
    pass &= causal_ok;
    detail += &format!("causality zeros: {causal_ok}; ");

    // Transform exactness on constant and linear signals.
    let dt = 0.01;
    let n = 500;
    let t_final = n as f64 * dt;
    let ones = TimeTrace::new(dt, vec![vec![1.0; n + 1]]);
    let ramp = TimeTrace::new(dt, vec![(0..=n).map(|i| i as f64 * dt).collect()]);
    let mut transform_ok = true;
    for tau in [0.5, 5.0, 50.0] {
        let w1 = laplace_in_time(&ones, &[tau]).unwrap().values[0][0];
        let e1 = (1.0 - (-tau * t_final).exp()) / tau;
        let w2 = laplace_in_time(&ramp, &[tau]).unwrap().values[0][0];
        let e2 = (1.0 - (-tau * t_final).exp() * (1.0 + tau * t_final)) / (tau * tau);
        transform_ok &= (w1 - e1).abs() <= 1e-13 * e1 && (w2 - e2).abs() <= 1e-13 * e2;
    }
    pass &= transform_ok;
    detail += &format!("transform exact on constant/linear: {transform_ok}; ");

    // Distance estimator exact on a pure exponential.
    let taus = linear_tau_grid(2.0, 12.0, 24).unwrap();
    let curve = IndicatorCurve {
        kind: IndicatorKind::OneDim,
        taus: taus.clone(),
        values: taus.iter().map(|&t| (-2.0 * 1.2 * t).exp()).collect(),
        floor: vec![1e-300; taus.len()],
        scene_tag: String::new(),
    };
    let fit = estimate_distance(&curve, (6.0, 12.0)).unwrap();
    let est_ok = (fit.d_hat - 1.2).abs() < 1e-10;
    pass &= est_ok;
    detail += &format!("pure-exponential distance exact: {est_ok}; ");
    // Scale invariance.
    let scaled = IndicatorCurve {
        values: curve.values.iter().map(|v| 13.7 * v).collect(),
        ..curve.clone()
    };
    pass &= (estimate_distance(&scaled, (6.0, 12.0)).unwrap().d_hat - fit.d_hat).abs() < 1e-12;

    // Sign classification consistency.
    pass &= classify_sign(&curve, (6.0, 12.0), None) == SignClass::Positive;

    // Gradient against central finite differences at 1e-6 relative.
    let srcb = SourceBall::new(ball([0.0, 0.0, 0.0], 1.0), 1.0).unwrap();
    let x = Vec3([1.9, 0.8, -0.4]);
    let tau = 5.0;
    let g = eval_grad_v(&srcb, x, tau).unwrap();
    let mut grad_ok = true;
    let h = 1e-5;
    for axis in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp.0[axis] += h;
        xm.0[axis] -= h;
        let fd = (eval_v(&srcb, xp, tau).unwrap() - eval_v(&srcb, xm, tau).unwrap()) / (2.0 * h);
        grad_ok &= (g.0[axis] - fd).abs() <= 1e-6 * g.norm();
    }
    pass &= grad_ok;
    detail += &format!("gradient matches finite differences: {grad_ok}");

    criterion(9, "invariant suites", pass, &detail);
}

#[test]
fn criterion_10_threshold_flagging() {
    let mut cfg = load("1d-robin.json");
    cfg.data_mode = DataMode::Backscatter;
    // Threshold is 2 dist = 4; run at half of it.
    cfg.time = TimeSpec::Fixed(2.0);
    let art = run(&cfg, "c10");
    let pass = art.outcome == RunOutcome::ThresholdViolation
        && !art.report.threshold_satisfied
        && !art.report.reliable
        && art.report.notes.iter().any(|n| n.contains("unreliable"));
    criterion(
        10,
        "threshold violation flagged",
        pass,
        &format!(
            "outcome {:?}, threshold_satisfied {}, reliable {}",
            art.outcome, art.report.threshold_satisfied, art.report.reliable
        ),
    );
}
