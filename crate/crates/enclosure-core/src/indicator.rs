//! Indicator functionals built from Laplace-domain field pairs.
//!
//! Surface form: `I(tau) = int_{dOmega} (dv/dnu w - dw/dnu v) dS`,
//! approximated by a quadrature rule on the measurement surface.
//! Back-scattering form: `I(tau) = int_B f (w - v) dx`, a cell sum over the
//! source support.
//!
//! Both operations accept the free-field values as an explicit argument:
//! the analytic field from [`crate::sources`] for idealized inputs, or the
//! transform of a matched no-obstacle control run when the measured field
//! comes from the FD solver (the control run carries the same finite-time
//! and discretization signature, so the common-path error cancels in the
//! difference; the substitution only perturbs the indicator at the order of
//! the finite-observation remainder).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Shape, Vec3};
use crate::sources::{eval_grad_v, eval_v, gauss_legendre, SourceBall};
use crate::transform::LaplaceField;

/// Which functional produced a curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Surface,
    Backscatter,
    OneDim,
}

/// Sampled indicator curve `(tau_j, I(tau_j))` with a rounding-floor
/// estimate per sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndicatorCurve {
    pub kind: IndicatorKind,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    /// Round-off floor: scaled machine-epsilon aggregate of the absolute
    /// summands behind each value. Sign statements are only meaningful for
    /// values well above this floor.
    pub floor: Vec<f64>,
    /// Identifier of the scene that produced the curve (provenance).
    #[serde(default)]
    pub scene_tag: String,
}

/// Floor scaling: generous multiple of f64 epsilon per aggregated term.
const FLOOR_FACTOR: f64 = 64.0 * f64::EPSILON;

impl IndicatorCurve {
    pub fn validate(&self) -> Result<()> {
        if self.taus.len() != self.values.len() || self.taus.len() != self.floor.len() {
            return Err(Error::Mismatch("curve arrays must have equal length".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("indicator values must be finite".into()));
        }
        Ok(())
    }

    /// Pointwise difference `self - other` (same kind and tau grid);
    /// rounding floors add. Used to subtract a no-obstacle control curve.
    pub fn subtract(&self, other: &IndicatorCurve) -> Result<IndicatorCurve> {
        if self.taus != other.taus {
            return Err(Error::Mismatch("curves live on different tau grids".into()));
        }
        if self.kind != other.kind {
            return Err(Error::Mismatch("curves come from different indicators".into()));
        }
        Ok(IndicatorCurve {
            kind: self.kind,
            taus: self.taus.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            floor: self
                .floor
                .iter()
                .zip(&other.floor)
                .map(|(a, b)| a + b)
                .collect(),
            scene_tag: self.scene_tag.clone(),
        })
    }
}

/// Quadrature rule on a closed measurement surface: points, outward unit
/// normals and weights.
#[derive(Clone, Debug)]
pub struct SurfaceQuadrature {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl SurfaceQuadrature {
    /// Build a rule for a ball (Gauss-Legendre in the polar angle times a
    /// uniform azimuthal grid) or an axis box (tensor Gauss per face).
    pub fn for_shape(surface: &Shape, n_theta: usize, n_phi: usize) -> Result<Self> {
        surface.validate()?;
        match surface {
            Shape::Ball { center, radius } => {
                let (mu, wmu) = gauss_legendre(n_theta);
                let mut points = Vec::with_capacity(n_theta * n_phi);
                let mut normals = Vec::with_capacity(n_theta * n_phi);
                let mut weights = Vec::with_capacity(n_theta * n_phi);
                let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
                for (m, wm) in mu.iter().zip(&wmu) {
                    let sin_t = (1.0 - m * m).max(0.0).sqrt();
                    for k in 0..n_phi {
                        let phi = dphi * (k as f64 + 0.5);
                        let n = Vec3([sin_t * phi.cos(), sin_t * phi.sin(), *m]);
                        points.push(center.add(n.scale(*radius)));
                        normals.push(n);
                        weights.push(radius * radius * wm * dphi);
                    }
                }
                Ok(SurfaceQuadrature { points, normals, weights })
            }
            Shape::AxisBox { min, max } => {
                let n = n_theta.max(2);
                let (g, wg) = gauss_legendre(n);
                let mut points = Vec::new();
                let mut normals = Vec::new();
                let mut weights = Vec::new();
                for axis in 0..3 {
                    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                    let (cu, hu) = (0.5 * (min.0[u] + max.0[u]), 0.5 * (max.0[u] - min.0[u]));
                    let (cv, hv) = (0.5 * (min.0[v] + max.0[v]), 0.5 * (max.0[v] - min.0[v]));
                    for (face, sign) in [(min.0[axis], -1.0), (max.0[axis], 1.0)] {
                        for (gu, wu) in g.iter().zip(&wg) {
                            for (gv, wv) in g.iter().zip(&wg) {
                                let mut p = [0.0; 3];
                                p[axis] = face;
                                p[u] = cu + hu * gu;
                                p[v] = cv + hv * gv;
                                let mut nvec = [0.0; 3];
                                nvec[axis] = sign;
                                points.push(Vec3(p));
                                normals.push(Vec3(nvec));
                                weights.push(wu * wv * hu * hv);
                            }
                        }
                    }
                }
                Ok(SurfaceQuadrature { points, normals, weights })
            }
            _ => Err(Error::UnsupportedShapes(
                "surface quadrature expects a ball or an axis box".into(),
            )),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Analytic free field `v` evaluated on a point set, as a [`LaplaceField`].
pub fn free_laplace_field(src: &SourceBall, points: &[Vec3], taus: &[f64]) -> Result<LaplaceField> {
    let values: Result<Vec<Vec<f64>>> = points
        .par_iter()
        .map(|&p| taus.iter().map(|&tau| eval_v(src, p, tau)).collect())
        .collect();
    Ok(LaplaceField { taus: taus.to_vec(), values: values? })
}

/// Analytic normal derivative `dv/dnu` on a point set with unit normals.
pub fn free_normal_derivative_field(
    src: &SourceBall,
    points: &[Vec3],
    normals: &[Vec3],
    taus: &[f64],
) -> Result<LaplaceField> {
    if points.len() != normals.len() {
        return Err(Error::Mismatch("one normal per point required".into()));
    }
    let values: Result<Vec<Vec<f64>>> = points
        .par_iter()
        .zip(normals.par_iter())
        .map(|(&p, &n)| {
            taus.iter()
                .map(|&tau| eval_grad_v(src, p, tau).map(|g| g.dot(n)))
                .collect()
        })
        .collect();
    Ok(LaplaceField { taus: taus.to_vec(), values: values? })
}

/// Finite-difference stencil used for `dw/dnu` on the measurement surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeStencil {
    /// `(w(x + s nu) - w(x)) / s`; shells `{0, +1}`.
    OneSided2,
    /// `(w(x + s nu) - w(x - s nu)) / 2s`; shells `{-1, +1}`.
    Centered2,
    /// Five-point fourth-order formula; shells `{-2, -1, +1, +2}`.
    Centered4,
}

impl DerivativeStencil {
    /// Shell offsets (in units of the stencil spacing) this stencil reads.
    pub fn offsets(&self) -> &'static [i32] {
        match self {
            DerivativeStencil::OneSided2 => &[0, 1],
            DerivativeStencil::Centered2 => &[-1, 1],
            DerivativeStencil::Centered4 => &[-2, -1, 1, 2],
        }
    }

    /// Finite-difference weights matching `offsets`, for unit spacing.
    pub fn coefficients(&self) -> &'static [f64] {
        match self {
            DerivativeStencil::OneSided2 => &[-1.0, 1.0],
            DerivativeStencil::Centered2 => &[-0.5, 0.5],
            DerivativeStencil::Centered4 => &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0],
        }
    }
}

/// Combine per-shell Laplace fields (recorded at `x + k s nu` for shell
/// offsets `k`) into the normal derivative on the surface.
pub fn normal_derivative_from_shells(
    shells: &[&LaplaceField],
    spacing: f64,
    stencil: DerivativeStencil,
) -> Result<LaplaceField> {
    let offs = stencil.offsets();
    if shells.len() != offs.len() {
        return Err(Error::Mismatch(format!(
            "stencil needs {} shells, got {}",
            offs.len(),
            shells.len()
        )));
    }
    let base = shells[0];
    for s in shells.iter().skip(1) {
        if s.taus != base.taus || s.n_probes() != base.n_probes() {
            return Err(Error::Mismatch("shells must share probes and tau grid".into()));
        }
    }
    let coef = stencil.coefficients();
    let mut values = vec![vec![0.0; base.taus.len()]; base.n_probes()];
    for (c, field) in coef.iter().zip(shells) {
        for (row_out, row_in) in values.iter_mut().zip(&field.values) {
            for (o, i) in row_out.iter_mut().zip(row_in) {
                *o += c / spacing * i;
            }
        }
    }
    Ok(LaplaceField { taus: base.taus.clone(), values })
}

/// Surface indicator `sum_q wt_q (dv/dnu w - dw/dnu v)(x_q, tau_j)` with the
/// analytic free field evaluated at the quadrature points.
pub fn surface_indicator(
    w: &LaplaceField,
    dw_dn: &LaplaceField,
    quad: &SurfaceQuadrature,
    src: &SourceBall,
) -> Result<IndicatorCurve> {
    if w.n_probes() != quad.len() || dw_dn.n_probes() != quad.len() {
        return Err(Error::Mismatch(format!(
            "field rows ({} / {}) must match the quadrature points ({})",
            w.n_probes(),
            dw_dn.n_probes(),
            quad.len()
        )));
    }
    if w.taus != dw_dn.taus {
        return Err(Error::Mismatch("w and dw/dnu must share the tau grid".into()));
    }
    let v = free_laplace_field(src, &quad.points, &w.taus)?;
    let dv = free_normal_derivative_field(src, &quad.points, &quad.normals, &w.taus)?;
    surface_indicator_with_reference(w, dw_dn, &v, &dv, quad)
}

/// Surface indicator with the reference field supplied explicitly
/// (analytic, or the transform of a no-obstacle control run).
pub fn surface_indicator_with_reference(
    w: &LaplaceField,
    dw_dn: &LaplaceField,
    v: &LaplaceField,
    dv_dn: &LaplaceField,
    quad: &SurfaceQuadrature,
) -> Result<IndicatorCurve> {
    for f in [w, dw_dn, v, dv_dn] {
        if f.n_probes() != quad.len() {
            return Err(Error::Mismatch("mismatched probe sets on the surface".into()));
        }
        if f.taus != w.taus {
            return Err(Error::Mismatch("mismatched tau grids on the surface".into()));
        }
    }
    let nt = w.taus.len();
    let mut values = vec![0.0; nt];
    let mut floor = vec![0.0; nt];
    for q in 0..quad.len() {
        let wt = quad.weights[q];
        for j in 0..nt {
            let t1 = dv_dn.values[q][j] * w.values[q][j];
            let t2 = dw_dn.values[q][j] * v.values[q][j];
            values[j] += wt * (t1 - t2);
            floor[j] += wt.abs() * (t1.abs() + t2.abs());
        }
    }
    for f in &mut floor {
        *f *= FLOOR_FACTOR;
    }
    Ok(IndicatorCurve {
        kind: IndicatorKind::Surface,
        taus: w.taus.clone(),
        values,
        floor,
        scene_tag: String::new(),
    })
}

/// Back-scattering indicator `sum_q fw_q (w - v)(x_q, tau_j)` where `fw_q`
/// is the profile value times the covered cell volume at probe `q` and `v`
/// is the free-field reference on the same probes.
pub fn backscatter_indicator(
    w: &LaplaceField,
    free: &LaplaceField,
    f_cell_weights: &[f64],
) -> Result<IndicatorCurve> {
    if w.n_probes() != f_cell_weights.len() || free.n_probes() != f_cell_weights.len() {
        return Err(Error::Mismatch(format!(
            "probe set ({} / {}) does not cover the {} weighted source cells",
            w.n_probes(),
            free.n_probes(),
            f_cell_weights.len()
        )));
    }
    if w.taus != free.taus {
        return Err(Error::Mismatch("w and the reference must share the tau grid".into()));
    }
    if f_cell_weights.iter().all(|&x| x == 0.0) {
        return Err(Error::Mismatch("probe set does not cover the source support".into()));
    }
    let nt = w.taus.len();
    let mut values = vec![0.0; nt];
    let mut floor = vec![0.0; nt];
    for ((&fw, w_row), free_row) in f_cell_weights.iter().zip(&w.values).zip(&free.values) {
        if fw == 0.0 {
            continue;
        }
        for j in 0..nt {
            values[j] += fw * (w_row[j] - free_row[j]);
            floor[j] += fw.abs() * (w_row[j].abs() + free_row[j].abs());
        }
    }
    for f in &mut floor {
        *f *= FLOOR_FACTOR;
    }
    Ok(IndicatorCurve {
        kind: IndicatorKind::Backscatter,
        taus: w.taus.clone(),
        values,
        floor,
        scene_tag: String::new(),
    })
}

/// Pointwise gap `|I_surface - I_backscatter|` on a shared tau grid.
/// Diagnostic for the asymptotic agreement of the two data types.
pub fn consistency_gap(surface: &IndicatorCurve, backscatter: &IndicatorCurve) -> Result<Vec<f64>> {
    if surface.taus != backscatter.taus {
        return Err(Error::Mismatch("curves live on different tau grids".into()));
    }
    Ok(surface
        .values
        .iter()
        .zip(&backscatter.values)
        .map(|(a, b)| (a - b).abs())
        .collect())
}
