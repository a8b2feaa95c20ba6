//! Grid-refinement behaviour of the 3D solvers, measured on the
//! back-scattering indicator of a compact scene at a fixed decay rate.
//!
//! The transmission solver with cell-averaged coefficients converges at
//! second order once the obstacle is well resolved; the voxelized Robin
//! boundary limits the exterior solver to first order (with voxelization
//! scatter on top), which is what the sign/distance tolerances assume.

use enclosure_core::geometry::{Shape, Vec3};
use enclosure_core::indicator::backscatter_indicator;
use enclosure_core::solver3d::{
    solve_refractive, solve_robin, Grid3D, MediumField, RobinMask, SolveOptions,
};
use enclosure_core::sources::SourceBall;
use enclosure_core::transform::{laplace_in_time, LaplaceField, TimeTrace};

fn scene_indicator(robin: bool, h: f64) -> f64 {
    let obstacle = Shape::Ball { center: Vec3([0.0, 0.0, 0.0]), radius: 0.5 };
    let src = SourceBall::new(
        Shape::Ball { center: Vec3([1.4, 0.0, 0.0]), radius: 0.25 },
        1.0,
    )
    .unwrap();
    let t_final = 1.5;
    let grid = Grid3D::causal(Vec3([-0.5, -0.5, -0.5]), Vec3([1.65, 0.5, 0.5]), h, 0.9, t_final)
        .unwrap();
    let cells = grid.source_cells(&src).unwrap();
    let probes: Vec<Vec3> = cells.iter().map(|(_, p, _)| *p).collect();
    let weights: Vec<f64> = cells.iter().map(|(_, _, f)| f * h * h * h).collect();
    let solve = |with_obstacle: bool| {
        if robin {
            let mask = if with_obstacle {
                RobinMask::build(&grid, &obstacle, &|_| 0.0, &|_| 0.0).unwrap()
            } else {
                RobinMask::empty(&grid)
            };
            solve_robin(&grid, &mask, &src, &probes, t_final, SolveOptions::default(), None)
                .unwrap()
        } else {
            let medium = if with_obstacle {
                MediumField::build(&grid, &obstacle, 0.25).unwrap()
            } else {
                // Control with the same CFL bound so the traces pair up.
                MediumField { alpha: vec![1.0; grid.n_nodes()], alpha_min: 0.25 }
            };
            solve_refractive(&grid, &medium, &src, &probes, t_final, SolveOptions::default(), None)
                .unwrap()
        }
    };
    let with = solve(true);
    let without = solve(false);
    let delta = with.trace.difference(&without.trace).unwrap();
    let wd = laplace_in_time(&TimeTrace::new(with.dt, delta.samples), &[5.0]).unwrap();
    let zero = LaplaceField { taus: vec![5.0], values: vec![vec![0.0]; probes.len()] };
    backscatter_indicator(&wd, &zero, &weights).unwrap().values[0]
}

#[test]
fn refractive_indicator_refines_at_second_order() {
    let vals: Vec<f64> = [0.05, 0.025, 0.0125].iter().map(|&h| scene_indicator(false, h)).collect();
    let order = ((vals[0] - vals[1]).abs() / (vals[1] - vals[2]).abs()).log2();
    assert!(
        order >= 1.8,
        "observed refractive refinement order {order:.2} from {vals:?}"
    );
}

#[test]
fn robin_indicator_refines_at_first_order() {
    let vals: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| scene_indicator(true, h)).collect();
    // Voxelization scatter makes per-step orders noisy; require the error
    // against the finest level to shrink by at least 2^0.8 per halving.
    let finest = vals[3];
    let errs: Vec<f64> = vals[..3].iter().map(|v| (v - finest).abs()).collect();
    for pair in errs.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(
            ratio >= 2f64.powf(0.8),
            "robin refinement ratio {ratio:.2} below first order; errors {errs:?}"
        );
    }
}
