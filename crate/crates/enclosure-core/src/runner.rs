//! Experiment orchestration: parse a scene config, run the
//! solve -> transform -> indicator -> extraction pipeline, and write
//! machine-readable artifacts (curve CSV + report JSON).
//!
//! Measured indicators are background-subtracted: every run is paired with
//! a no-obstacle control solve on the same grid and time step, and the
//! reported curve is the difference of the two indicator evaluations. By
//! discrete causality the two solves agree exactly until the scattered wave
//! reaches a probe, so the common-path discretization error cancels and
//! the curve isolates the scattered contribution; the substitution only
//! changes the indicator at the order of the finite-observation remainder.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{
    classify_sign, estimate_distance, recover_gamma_beta_1d, reference_r, DistanceFit, SignClass,
};
use crate::geometry::{broken_path_length, DataMode, Mode, SceneSpec, Shape, Vec3};
use crate::indicator::{
    backscatter_indicator, consistency_gap, normal_derivative_from_shells, surface_indicator,
    DerivativeStencil, IndicatorCurve, IndicatorKind, SurfaceQuadrature,
};
use crate::solver1d::{indicator_1d, solve_1d, Wave1DConfig};
use crate::solver3d::{
    solve_refractive, solve_robin, Grid3D, MediumField, RobinMask, SolveOptions,
};
use crate::sources::{eval_v_1d, source_moment_1d, SourceBall};
use crate::transform::{laplace_in_time, linear_tau_grid, LaplaceField, TimeTrace};

/// Spatial discretization parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Discretization {
    /// Grid spacing.
    pub h: f64,
    /// Courant ratio in (0, 1].
    #[serde(default = "default_courant")]
    pub courant: f64,
}

fn default_courant() -> f64 {
    0.9
}

/// Tau grid specification; bounds default per dimension.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TauGridSpec {
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
}

/// Observation time: a number, or `"auto"` = 1.25 x the mode's threshold.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Fixed(f64),
    Auto(String),
}

/// Surface-data options (3D surface mode).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceOptions {
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
    #[serde(default = "default_stencil")]
    pub stencil: DerivativeStencil,
}

fn default_n_theta() -> usize {
    32
}

fn default_n_phi() -> usize {
    64
}

fn default_stencil() -> DerivativeStencil {
    DerivativeStencil::Centered4
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions {
            n_theta: default_n_theta(),
            n_phi: default_n_phi(),
            stencil: default_stencil(),
        }
    }
}

/// Full experiment configuration (the JSON schema of `--config`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scene: SceneSpec,
    pub discretization: Discretization,
    #[serde(default)]
    pub tau: TauGridSpec,
    pub time: TimeSpec,
    pub data_mode: DataMode,
    /// Regression window; defaults to [6, 12] (1D) or [4, 8] (3D).
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub surface_options: Option<SurfaceOptions>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn tau_grid(&self) -> Result<Vec<f64>> {
        let (dmin, dmax) = if self.scene.dimension == 1 { (2.0, 12.0) } else { (2.0, 10.0) };
        let min = self.tau.min.unwrap_or(dmin);
        let max = self.tau.max.unwrap_or(dmax);
        let count = self.tau.count.unwrap_or(24);
        linear_tau_grid(min, max, count)
    }

    pub fn window(&self) -> (f64, f64) {
        self.window.unwrap_or(if self.scene.dimension == 1 { (6.0, 12.0) } else { (4.0, 8.0) })
    }

    /// Resolve the observation time and its recovery threshold.
    pub fn resolve_time(&self) -> Result<(f64, f64)> {
        let t_min = self.scene.min_observation_time(self.data_mode)?;
        let t = match &self.time {
            TimeSpec::Fixed(t) => *t,
            TimeSpec::Auto(word) => {
                if word != "auto" {
                    return Err(Error::Config(format!(
                        "time must be a number or \"auto\", got {word:?}"
                    )));
                }
                1.25 * t_min
            }
        };
        if !(t > 0.0) {
            return Err(Error::Config("observation time must be positive".into()));
        }
        Ok((t, t_min))
    }

    /// Deterministic tag of the configuration (FNV-1a over the JSON echo).
    pub fn tag(&self) -> String {
        let text = serde_json::to_string(self).unwrap_or_default();
        let mut hash: u64 = 0xcbf29ce484222325;
        for b in text.bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

/// How a finished run should be reflected in the process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Success,
    /// The observation time does not exceed the recovery threshold.
    ThresholdViolation,
    /// The indicator curve could not be regressed.
    FitFailure,
}

/// Machine-readable summary of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub scene_tag: String,
    /// Crate version that produced the report.
    pub code_version: String,
    pub dimension: u8,
    pub mode: Mode,
    pub data_mode: DataMode,
    pub t_used: f64,
    pub t_min_required: f64,
    pub threshold_satisfied: bool,
    /// Threshold satisfied and the distance fit succeeded.
    pub reliable: bool,
    pub window: (f64, f64),
    pub d_hat: Option<f64>,
    pub d_hat_pointwise: Option<f64>,
    pub d_hat_line: Option<f64>,
    pub fit_residual: Option<f64>,
    pub prefactor_power: Option<f64>,
    pub sign_class: SignClass,
    pub sign_meaning: String,
    pub gamma_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    pub recovery_residual: Option<f64>,
    pub d_refined: Option<f64>,
    /// Raw indicator of the control run at the largest tau (diagnostic
    /// pipeline-noise scale against the analytic free field).
    pub control_floor: f64,
    /// Shortest broken source-obstacle-surface path (3D surface mode).
    pub broken_path: Option<f64>,
    /// Largest in-window gap |I_surface - I_backscatter| relative to
    /// |I_backscatter| (3D surface runs record both data types).
    pub consistency_gap_rel: Option<f64>,
    pub notes: Vec<String>,
}

/// Paths and in-memory results of one run.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub outcome: RunOutcome,
    pub report: RecoveryReport,
    pub curve: IndicatorCurve,
    /// Secondary curve (back-scattering) for 3D surface runs.
    pub secondary_curve: Option<IndicatorCurve>,
    pub curve_path: PathBuf,
    pub report_path: PathBuf,
}

fn sign_meaning(mode: Mode, class: SignClass) -> String {
    match (mode, class) {
        (Mode::Robin, SignClass::Positive) => "positive: dissipation coefficient below 1".into(),
        (Mode::Robin, SignClass::Negative) => "negative: dissipation coefficient above 1".into(),
        (Mode::Refractive, SignClass::Positive) => "positive: refraction coefficient below 1".into(),
        (Mode::Refractive, SignClass::Negative) => "negative: refraction coefficient above 1".into(),
        (_, SignClass::Indeterminate) => "indeterminate: indicator at the noise floor".into(),
        (Mode::Free, _) => "no obstacle configured".into(),
    }
}

struct PipelineResult {
    curve: IndicatorCurve,
    secondary: Option<IndicatorCurve>,
    control_floor: f64,
    moments: Option<Vec<f64>>,
    notes: Vec<String>,
}

/// 1D pipeline: paired obstacle/control solves, transform, indicator.
fn pipeline_1d(cfg: &ExperimentConfig, t_used: f64, taus: &[f64]) -> Result<PipelineResult> {
    let scene = &cfg.scene;
    let src = SourceBall::new(scene.source.clone(), scene.amplitude)?;
    let (lo, hi) = match scene.source {
        Shape::Interval1D { lo, hi } => (lo, hi),
        _ => unreachable!("validated 1D scene"),
    };
    let a = match scene.obstacle {
        Some(Shape::HalfLine1D { start }) => start,
        _ => return Err(Error::Config("1D scenes need a half-line obstacle".into())),
    };
    let h = cfg.discretization.h;

    // Probe set per data mode.
    let mut probes: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    match cfg.data_mode {
        DataMode::Surface => {
            probes.extend_from_slice(&[-h, 0.0, h]);
        }
        DataMode::Backscatter => {
            // Grid nodes covering the source support, on the lattice
            // anchored at the boundary coordinate.
            let m_lo = ((a - (hi + 0.5 * h)) / h).ceil() as i64;
            let m_hi = ((a - (lo - 0.5 * h)) / h).floor() as i64;
            for m in m_lo..=m_hi {
                let x = a - m as f64 * h;
                let cell_lo = (x - 0.5 * h).max(lo);
                let cell_hi = (x + 0.5 * h).min(hi);
                let w = scene.amplitude * (cell_hi - cell_lo).max(0.0);
                if w != 0.0 {
                    probes.push(x);
                    weights.push(w);
                }
            }
            if probes.is_empty() {
                return Err(Error::Config("source support misses the 1D grid".into()));
            }
        }
    }

    let domain_left = Wave1DConfig::causal_domain_left(&src, &probes, t_used)?;
    let solve_cfg = Wave1DConfig {
        boundary: a,
        gamma: scene.gamma,
        beta: scene.beta,
        domain_left,
        h,
        courant: cfg.discretization.courant,
        t_final: t_used,
    };
    // Control: the boundary is pushed beyond causal reach of every probe,
    // on the same lattice (offset by a whole number of cells).
    let ctrl_offset = (t_used / h).ceil() * h;
    let ctrl_cfg = Wave1DConfig { boundary: a + ctrl_offset, ..solve_cfg.clone() };

    let out = solve_1d(&solve_cfg, &src, &probes)?;
    let ctrl = solve_1d(&ctrl_cfg, &src, &probes)?;
    // Subtract the control trace before transforming: the difference is the
    // pure scattered signal, so no precision is lost to cancellation.
    let delta = out.trace.difference(&ctrl.trace)?;
    let wd = laplace_in_time(&delta, taus)?;
    let w_ctrl = laplace_in_time(&ctrl.trace, taus)?;
    let moments: Result<Vec<f64>> = taus.iter().map(|&t| source_moment_1d(&src, t)).collect();

    match cfg.data_mode {
        DataMode::Surface => {
            let mut values = Vec::with_capacity(taus.len());
            let mut floor = Vec::with_capacity(taus.len());
            let mut ctrl_floor = 0.0;
            for (j, &tau) in taus.iter().enumerate() {
                let (v0, dv0) = eval_v_1d(&src, 0.0, tau)?;
                let eval = |f: &LaplaceField| {
                    let w0 = f.values[1][j];
                    let dw0 = (f.values[2][j] - f.values[0][j]) / (2.0 * h);
                    (w0, dw0)
                };
                // Wronskian against the scattered field; linear in the first
                // pair, so this equals the obstacle indicator minus the
                // control indicator.
                let (wd0, dwd0) = eval(&wd);
                let (c0, dc0) = eval(&w_ctrl);
                values.push(indicator_1d(wd0, dwd0, v0, dv0));
                // Noise floor: the scattered transform is a difference of
                // trace sums of the control's magnitude, so it cannot be
                // trusted below epsilon times that cancelled scale.
                floor.push(
                    64.0 * f64::EPSILON
                        * (dv0.abs() * (wd0.abs() + c0.abs())
                            + (dwd0.abs() + dc0.abs()) * v0.abs()),
                );
                // Diagnostic: raw control indicator against the analytic
                // free field at the top of the grid.
                if j + 1 == taus.len() {
                    ctrl_floor = indicator_1d(c0, dc0, v0, dv0).abs();
                }
            }
            let curve = IndicatorCurve {
                kind: IndicatorKind::OneDim,
                taus: taus.to_vec(),
                values,
                floor,
                scene_tag: cfg.tag(),
            };
            Ok(PipelineResult {
                curve,
                secondary: None,
                control_floor: ctrl_floor,
                moments: Some(moments?),
                notes: Vec::new(),
            })
        }
        DataMode::Backscatter => {
            let zero = LaplaceField {
                taus: taus.to_vec(),
                values: vec![vec![0.0; taus.len()]; probes.len()],
            };
            let mut curve = backscatter_indicator(&wd, &zero, &weights)?;
            curve.kind = IndicatorKind::Backscatter;
            curve.scene_tag = cfg.tag();
            // Floor against the cancelled control magnitude (see above).
            for (j, fl) in curve.floor.iter_mut().enumerate() {
                let mut mag = 0.0;
                for (q, w) in weights.iter().enumerate() {
                    mag += w.abs() * w_ctrl.values[q][j].abs();
                }
                *fl += 64.0 * f64::EPSILON * mag;
            }
            // Diagnostic floor: control vs analytic free field on the probes.
            let v_an = analytic_field_1d(&src, &probes, taus)?;
            let raw = backscatter_indicator(&w_ctrl, &v_an, &weights)?;
            Ok(PipelineResult {
                curve,
                secondary: None,
                control_floor: raw.values.last().map_or(0.0, |v| v.abs()),
                moments: Some(moments?),
                notes: Vec::new(),
            })
        }
    }
}

fn analytic_field_1d(src: &SourceBall, probes: &[f64], taus: &[f64]) -> Result<LaplaceField> {
    let mut values = Vec::with_capacity(probes.len());
    for &p in probes {
        let mut row = Vec::with_capacity(taus.len());
        for &tau in taus {
            row.push(eval_v_1d(src, p, tau)?.0);
        }
        values.push(row);
    }
    Ok(LaplaceField { taus: taus.to_vec(), values })
}

/// 3D pipeline: paired solves on a causally sized grid; back-scattering
/// probes always recorded, surface shells added in surface mode.
fn pipeline_3d(cfg: &ExperimentConfig, t_used: f64, taus: &[f64]) -> Result<PipelineResult> {
    let scene = &cfg.scene;
    let src = SourceBall::new(scene.source.clone(), scene.amplitude)?;
    let h = cfg.discretization.h;
    let surface_opts = cfg.surface_options.clone().unwrap_or_default();

    // Surface machinery (surface mode only).
    let (quad, stencil, shell_offsets) = if cfg.data_mode == DataMode::Surface {
        let surface = scene
            .surface
            .as_ref()
            .ok_or_else(|| Error::Config("surface observation requires a surface shape".into()))?;
        let quad = SurfaceQuadrature::for_shape(surface, surface_opts.n_theta, surface_opts.n_phi)?;
        let mut offsets: Vec<i32> = surface_opts.stencil.offsets().to_vec();
        if !offsets.contains(&0) {
            offsets.push(0);
        }
        offsets.sort_unstable();
        (Some(quad), surface_opts.stencil, offsets)
    } else {
        (None, surface_opts.stencil, Vec::new())
    };

    // Hull of everything that must stay causally clean.
    let (mut hull_min, mut hull_max) = src.geometry.bounding_box()?;
    let mut extend = |p: Vec3| {
        for i in 0..3 {
            hull_min.0[i] = hull_min.0[i].min(p.0[i]);
            hull_max.0[i] = hull_max.0[i].max(p.0[i]);
        }
    };
    if let Some(obstacle) = &scene.obstacle {
        let (omin, omax) = obstacle.bounding_box()?;
        extend(omin);
        extend(omax);
    }
    if let Some(q) = &quad {
        for (p, n) in q.points.iter().zip(&q.normals) {
            for &off in &shell_offsets {
                extend(p.add(n.scale(off as f64 * h)));
            }
        }
    }
    let grid = Grid3D::causal(hull_min, hull_max, h, cfg.discretization.courant, t_used)?;

    // Probe list: source-cell nodes first, then shell points per offset.
    let src_cells = grid.source_cells(&src)?;
    let mut probes: Vec<Vec3> = src_cells.iter().map(|(_, p, _)| *p).collect();
    let weights: Vec<f64> = src_cells
        .iter()
        .map(|(_, _, frac)| scene.amplitude * frac * h * h * h)
        .collect();
    let n_source = probes.len();
    if let Some(q) = &quad {
        for &off in &shell_offsets {
            for (p, n) in q.points.iter().zip(&q.normals) {
                probes.push(p.add(n.scale(off as f64 * h)));
            }
        }
    }

    // Paired solves.
    let opts = SolveOptions::default();
    let (out, ctrl) = match scene.mode {
        Mode::Robin => {
            let obstacle = scene.obstacle.as_ref().unwrap();
            let (gamma, beta) = (scene.gamma, scene.beta);
            let mask = RobinMask::build(&grid, obstacle, &|_| gamma, &|_| beta)?;
            if mask.cells.is_empty() {
                return Err(Error::Config("obstacle is unresolved on this grid".into()));
            }
            let out = solve_robin(&grid, &mask, &src, &probes, t_used, opts, None)?;
            let ctrl = solve_robin(&grid, &RobinMask::empty(&grid), &src, &probes, t_used, opts, None)?;
            (out, ctrl)
        }
        Mode::Refractive => {
            let obstacle = scene.obstacle.as_ref().unwrap();
            let medium = MediumField::build(&grid, obstacle, scene.alpha_interior)?;
            // Identical time steps for the pair: the control runs with the
            // same CFL-limiting coefficient bound.
            let uniform = MediumField { alpha: vec![1.0; grid.n_nodes()], alpha_min: medium.alpha_min };
            let out = solve_refractive(&grid, &medium, &src, &probes, t_used, opts, None)?;
            let ctrl = solve_refractive(&grid, &uniform, &src, &probes, t_used, opts, None)?;
            (out, ctrl)
        }
        Mode::Free => {
            return Err(Error::Config("free scenes have nothing to recover".into()));
        }
    };

    // Subtract before transforming: the difference trace is the scattered
    // signal alone (identically zero until it arrives, by discrete
    // causality), which keeps the exponentially small indicators clear of
    // cancellation noise.
    let delta = out.trace.difference(&ctrl.trace)?;
    let wd = laplace_in_time(&delta, taus)?;
    let slice = |f: &LaplaceField, from: usize, len: usize| LaplaceField {
        taus: f.taus.clone(),
        values: f.values[from..from + len].to_vec(),
    };

    // Back-scattering curve (always available). The indicator is linear in
    // its first argument, so evaluating it on the scattered field equals
    // the obstacle indicator minus the control indicator.
    let zero_b = LaplaceField { taus: taus.to_vec(), values: vec![vec![0.0; taus.len()]; n_source] };
    let wd_b = slice(&wd, 0, n_source);
    let mut back = backscatter_indicator(&wd_b, &zero_b, &weights)?;
    back.scene_tag = cfg.tag();
    // Diagnostic: raw control indicator against the analytic free field.
    let ctrl_b_trace = TimeTrace::new(ctrl.dt, ctrl.trace.samples[..n_source].to_vec());
    let wc_b = laplace_in_time(&ctrl_b_trace, taus)?;
    let v_an = crate::indicator::free_laplace_field(&src, &probes[..n_source], taus)?;
    let raw_back = backscatter_indicator(&wc_b, &v_an, &weights)?;
    let control_floor = raw_back.values.last().map_or(0.0, |v| v.abs());

    match cfg.data_mode {
        DataMode::Backscatter => Ok(PipelineResult {
            curve: back,
            secondary: None,
            control_floor,
            moments: None,
            notes: Vec::new(),
        }),
        DataMode::Surface => {
            let quad = quad.unwrap();
            let npts = quad.len();
            let shell_field = |f: &LaplaceField, off: i32| {
                let pos = shell_offsets.iter().position(|&o| o == off).unwrap();
                slice(f, n_source + pos * npts, npts)
            };
            let w0 = shell_field(&wd, 0);
            let per_offset: Vec<LaplaceField> = stencil
                .offsets()
                .iter()
                .map(|&o| shell_field(&wd, o))
                .collect();
            let refs: Vec<&LaplaceField> = per_offset.iter().collect();
            let dw = normal_derivative_from_shells(&refs, h, stencil)?;
            let mut curve = surface_indicator(&w0, &dw, &quad, &src)?;
            curve.scene_tag = cfg.tag();
            Ok(PipelineResult {
                curve,
                secondary: Some(back),
                control_floor,
                moments: None,
                notes: Vec::new(),
            })
        }
    }
}

/// Write the indicator curve as CSV.
fn write_curve_csv(path: &Path, curve: &IndicatorCurve) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "tau,indicator,log_abs_indicator,pointwise_estimate")?;
    for (&tau, &val) in curve.taus.iter().zip(&curve.values) {
        let log_abs = val.abs().ln();
        let pointwise = -log_abs / (2.0 * tau);
        writeln!(f, "{tau},{val},{log_abs},{pointwise}")?;
    }
    Ok(())
}

fn write_consistency_csv(
    path: &Path,
    surface: &IndicatorCurve,
    back: &IndicatorCurve,
    gap: &[f64],
) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "tau,surface,backscatter,gap")?;
    for (i, &tau) in surface.taus.iter().enumerate() {
        writeln!(f, "{},{},{},{}", tau, surface.values[i], back.values[i], gap[i])?;
    }
    Ok(())
}

/// Run the full pipeline for one configuration, writing artifacts into
/// `out_dir`. Returns the artifacts; the outcome encodes the exit status
/// (success / threshold violation / fit failure).
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    cfg.scene.validate()?;
    if cfg.scene.mode == Mode::Free {
        return Err(Error::Config(
            "free scenes are control runs; configure a robin or refractive obstacle".into(),
        ));
    }
    let taus = cfg.tau_grid()?;
    let (t_used, t_min) = cfg.resolve_time()?;
    let threshold_satisfied = t_used > t_min;
    let window = cfg.window();

    let start = std::time::Instant::now();
    let mut result = if cfg.scene.dimension == 1 {
        pipeline_1d(cfg, t_used, &taus)?
    } else {
        pipeline_3d(cfg, t_used, &taus)?
    };
    let wall = start.elapsed().as_secs_f64();

    if !threshold_satisfied {
        result.notes.push(format!(
            "observation time {t_used} does not exceed the required threshold {t_min}; \
             the distance estimate is unreliable"
        ));
    }
    let floor_level = result
        .curve
        .values
        .iter()
        .zip(&result.curve.floor)
        .filter(|(_, f)| **f > 0.0)
        .all(|(v, f)| v.abs() <= 10.0 * f);
    if floor_level {
        result.notes.push(
            "indicator is at the numerical noise floor on the whole grid; \
             no obstacle signature resolved"
                .into(),
        );
    }

    // Extraction.
    let fit: Result<DistanceFit> = estimate_distance(&result.curve, window);
    let sign = classify_sign(&result.curve, window, None);
    let (mut gamma_hat, mut beta_hat, mut rec_residual, mut d_refined) = (None, None, None, None);
    if cfg.scene.dimension == 1 && cfg.data_mode == DataMode::Surface {
        if let (Ok(f), Some(moments)) = (&fit, &result.moments) {
            match recover_gamma_beta_1d(&result.curve, moments, f.d_hat, window) {
                Ok(rec) => {
                    gamma_hat = Some(rec.gamma_hat);
                    beta_hat = Some(rec.beta_hat);
                    rec_residual = Some(rec.residual_rms);
                    d_refined = Some(rec.d_refined);
                }
                Err(e) => result.notes.push(format!("coefficient recovery failed: {e}")),
            }
        }
    }

    // Consistency diagnostic for 3D surface runs.
    let mut gap_rel = None;
    if let Some(back) = &result.secondary {
        let gap = consistency_gap(&result.curve, back)?;
        let mut worst: f64 = 0.0;
        for (i, &tau) in result.curve.taus.iter().enumerate() {
            if tau >= window.0 && tau <= window.1 && back.values[i] != 0.0 {
                worst = worst.max(gap[i] / back.values[i].abs());
            }
        }
        gap_rel = Some(worst);
    }

    // Finite-propagation diagnostic (3D surface mode).
    let mut broken = None;
    if cfg.scene.dimension == 3 && cfg.data_mode == DataMode::Surface {
        if let (Some(d), Some(s)) = (&cfg.scene.obstacle, &cfg.scene.surface) {
            if let Ok(l) = broken_path_length(&cfg.scene.source, d, s, 1000) {
                if t_used <= l {
                    result.notes.push(format!(
                        "observation time {t_used} is below the shortest broken path {l}; \
                         no scattered signal reaches the surface in time"
                    ));
                }
                broken = Some(l);
            }
        }
    }

    let (outcome, mut reliable) = match (&fit, threshold_satisfied) {
        (_, false) => (RunOutcome::ThresholdViolation, false),
        (Ok(_), true) => (RunOutcome::Success, true),
        (Err(_), true) => (RunOutcome::FitFailure, false),
    };
    if floor_level {
        reliable = false;
    }
    let mut notes = std::mem::take(&mut result.notes);
    if let Err(e) = &fit {
        notes.push(format!("distance fit failed: {e}"));
    }
    notes.push(format!("wall time: {wall:.3} s (not part of the deterministic artifacts)"));

    let fit_ok = fit.ok();
    let report = RecoveryReport {
        scene_tag: cfg.tag(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        dimension: cfg.scene.dimension,
        mode: cfg.scene.mode,
        data_mode: cfg.data_mode,
        t_used,
        t_min_required: t_min,
        threshold_satisfied,
        reliable,
        window,
        d_hat: fit_ok.as_ref().map(|f| f.d_hat),
        d_hat_pointwise: fit_ok.as_ref().map(|f| f.d_hat_pointwise),
        d_hat_line: fit_ok.as_ref().map(|f| f.d_hat_line),
        fit_residual: fit_ok.as_ref().map(|f| f.residual_rms),
        prefactor_power: fit_ok.as_ref().map(|f| f.prefactor_power),
        sign_class: sign,
        sign_meaning: sign_meaning(cfg.scene.mode, sign),
        gamma_hat,
        beta_hat,
        recovery_residual: rec_residual,
        d_refined,
        control_floor: result.control_floor,
        broken_path: broken,
        consistency_gap_rel: gap_rel,
        notes,
    };

    std::fs::create_dir_all(out_dir)?;
    // Provenance: the exact configuration, re-serialized (deterministic).
    std::fs::write(out_dir.join("config.json"), serde_json::to_string_pretty(cfg)? + "\n")?;
    let curve_path = out_dir.join("curve.csv");
    write_curve_csv(&curve_path, &result.curve)?;
    if let Some(back) = &result.secondary {
        let gap = consistency_gap(&result.curve, back)?;
        write_consistency_csv(&out_dir.join("consistency.csv"), &result.curve, back, &gap)?;
    }
    let report_path = out_dir.join("report.json");
    let mut report_for_disk = report.clone();
    // Wall time is environment noise; keep the bytes reproducible.
    report_for_disk.notes.retain(|n| !n.starts_with("wall time:"));
    std::fs::write(&report_path, serde_json::to_string_pretty(&report_for_disk)? + "\n")?;

    Ok(RunArtifacts {
        outcome,
        report,
        curve: result.curve,
        secondary_curve: result.secondary,
        curve_path,
        report_path,
    })
}

/// One row of a parameter sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: serde_json::Value,
    pub status: String,
    pub d_hat: Option<f64>,
    pub sign: Option<SignClass>,
    pub gamma_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    pub residual: Option<f64>,
}

/// Set a dotted path (e.g. `scene.gamma`) inside a JSON template.
pub fn set_config_path(
    template: &serde_json::Value,
    path: &str,
    value: &serde_json::Value,
) -> Result<serde_json::Value> {
    let mut root = template.clone();
    let mut cursor = &mut root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        match cursor {
            serde_json::Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value.clone());
                    return Ok(root);
                }
                cursor = map.get_mut(*part).ok_or_else(|| {
                    Error::Config(format!("parameter path {path:?} not found at {part:?}"))
                })?;
            }
            serde_json::Value::Array(arr) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Config(format!("bad array index {part:?} in {path:?}")))?;
                if idx >= arr.len() {
                    return Err(Error::Config(format!("index {idx} out of range in {path:?}")));
                }
                if last {
                    arr[idx] = value.clone();
                    return Ok(root);
                }
                cursor = &mut arr[idx];
            }
            _ => {
                return Err(Error::Config(format!(
                    "parameter path {path:?} passes through a scalar at {part:?}"
                )))
            }
        }
    }
    Err(Error::Config(format!("empty parameter path {path:?}")))
}

/// Run one experiment per value of a swept parameter; failures are recorded
/// per row and the sweep continues. Rows run in parallel across the worker
/// pool.
pub fn sweep(
    template: &serde_json::Value,
    param_path: &str,
    values: &[serde_json::Value],
    out_root: &Path,
    workers: usize,
) -> Result<Vec<SweepRow>> {
    std::fs::create_dir_all(out_root)?;
    let run_one = |(i, value): (usize, &serde_json::Value)| -> SweepRow {
        let dir = out_root.join(format!("run-{i:03}"));
        let attempt = || -> Result<RunArtifacts> {
            let patched = set_config_path(template, param_path, value)?;
            let cfg: ExperimentConfig = serde_json::from_value(patched)?;
            run_experiment(&cfg, &dir)
        };
        match attempt() {
            Ok(art) => SweepRow {
                value: value.clone(),
                status: match art.outcome {
                    RunOutcome::Success => "ok".into(),
                    RunOutcome::ThresholdViolation => "threshold_violation".into(),
                    RunOutcome::FitFailure => "fit_failure".into(),
                },
                d_hat: art.report.d_hat,
                sign: Some(art.report.sign_class),
                gamma_hat: art.report.gamma_hat,
                beta_hat: art.report.beta_hat,
                residual: art.report.fit_residual,
            },
            Err(e) => SweepRow {
                value: value.clone(),
                status: format!("error: {e}"),
                d_hat: None,
                sign: None,
                gamma_hat: None,
                beta_hat: None,
                residual: None,
            },
        }
    };
    let rows: Vec<SweepRow> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| values.par_iter().enumerate().map(run_one).collect())
    } else {
        values.iter().enumerate().map(run_one).collect()
    };

    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out_root.join("sweep.csv"))?);
    writeln!(f, "value,status,d_hat,sign,gamma_hat,beta_hat,residual")?;
    for r in &rows {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.value,
            r.status,
            opt(r.d_hat),
            r.sign
                .map(|s| format!("{s:?}").to_lowercase())
                .unwrap_or_default(),
            opt(r.gamma_hat),
            opt(r.beta_hat),
            opt(r.residual)
        )?;
    }
    Ok(rows)
}

/// Evaluate the closed-form 1D reference curves for a config without any
/// simulation: the leading indicator form and the normalized expansion.
pub fn emit_reference(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    cfg.scene.validate()?;
    if cfg.scene.dimension != 1 {
        return Err(Error::Config(
            "reference curves are only defined for one-dimensional scenes".into(),
        ));
    }
    let src = SourceBall::new(cfg.scene.source.clone(), cfg.scene.amplitude)?;
    let d = cfg.scene.dist_obstacle_source()?;
    let taus = cfg.tau_grid()?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("reference.csv");
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(f, "tau,indicator_reference,normalized_r,moment")?;
    for &tau in &taus {
        let m = source_moment_1d(&src, tau)?;
        let r = reference_r(tau, cfg.scene.gamma, cfg.scene.beta)?;
        let i_ref = crate::solver1d::indicator_1d_reference(tau, cfg.scene.gamma, cfg.scene.beta, d, m)?;
        writeln!(f, "{tau},{i_ref},{r},{m}")?;
    }
    Ok(path)
}
