//! Initial data and analytic free fields.
//!
//! The initial velocity profile is `f = C` on a ball (3D) or an interval
//! (1D) and zero outside, so the support conditions and the single-sign
//! lower bound hold by construction. The free field
//!
//! `v(x, tau) = (1/4pi) int_B exp(-tau |x-y|) / |x-y| f(y) dy`
//!
//! solves `(laplace - tau^2) v + f = 0` and is evaluated here by fixed-order
//! product Gauss-Legendre quadrature over the ball (spherical coordinates
//! about the ball center; for points inside the ball a radial substitution
//! `u = |x-y|` absorbs the kernel singularity). The 1D analogue
//! `v = (1/2tau) int exp(-tau|x-y|) f(y) dy` has a closed form.
//!
//! The constant profile makes the support and single-sign conditions hold
//! by construction. Radial polynomial profiles would reuse the same
//! axisymmetric quadrature (extension point; not implemented).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Shape, Vec3};

/// Default Gauss-Legendre order per quadrature axis.
pub const QUADRATURE_ORDER: usize = 24;

/// Constant-profile initial data supported on a ball or 1D interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourceBall {
    pub geometry: Shape,
    /// Profile value `C` (nonzero, either sign).
    pub amplitude: f64,
}

impl SourceBall {
    pub fn new(geometry: Shape, amplitude: f64) -> Result<Self> {
        geometry.validate()?;
        match geometry {
            Shape::Ball { .. } | Shape::Interval1D { .. } => {}
            _ => {
                return Err(Error::UnsupportedShapes(
                    "source support must be a ball (3D) or an interval (1D)".into(),
                ))
            }
        }
        Ok(SourceBall { geometry, amplitude })
    }

    /// Profile value at a point (3D).
    pub fn profile(&self, p: Vec3) -> f64 {
        match &self.geometry {
            Shape::Ball { center, radius } if p.sub(*center).norm() <= *radius => self.amplitude,
            _ => 0.0,
        }
    }

    fn ball(&self) -> Result<(Vec3, f64)> {
        match &self.geometry {
            Shape::Ball { center, radius } => Ok((*center, *radius)),
            _ => Err(Error::UnsupportedShapes("expected a 3D ball source".into())),
        }
    }

    fn interval(&self) -> Result<(f64, f64)> {
        match &self.geometry {
            Shape::Interval1D { lo, hi } => Ok((*lo, *hi)),
            _ => Err(Error::UnsupportedShapes("expected a 1D interval source".into())),
        }
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre recurrence; deterministic
/// and accurate to machine precision for the orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Free field `v(x, tau)` of a 3D ball source.
pub fn eval_v(src: &SourceBall, x: Vec3, tau: f64) -> Result<f64> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::Domain(format!("decay rate tau must be positive, got {tau}")));
    }
    let (center, radius) = src.ball()?;
    let c = src.amplitude;
    if c == 0.0 {
        return Ok(0.0);
    }
    let s = x.sub(center).norm();
    let (mu_nodes, mu_weights) = gauss_legendre(QUADRATURE_ORDER);
    if s <= radius {
        // Radial substitution about x: the kernel 1/|x-y| cancels against the
        // volume element, leaving a closed-form radial integral per direction.
        let mut acc = 0.0;
        for (mu, wm) in mu_nodes.iter().zip(&mu_weights) {
            let reach = s * mu + (s * s * mu * mu + radius * radius - s * s).sqrt();
            let tm = tau * reach;
            acc += wm * (1.0 - (-tm).exp() * (1.0 + tm));
        }
        Ok(c / (2.0 * tau * tau) * acc)
    } else {
        // Product rule in (rho, mu) about the ball center; the azimuthal
        // integral is exact by symmetry of the constant profile.
        let (rho_nodes, rho_weights) = gauss_legendre(QUADRATURE_ORDER);
        let mut acc = 0.0;
        for (rn, rw) in rho_nodes.iter().zip(&rho_weights) {
            let rho = 0.5 * radius * (rn + 1.0);
            let jac = 0.5 * radius * rw * rho * rho;
            for (mu, wm) in mu_nodes.iter().zip(&mu_weights) {
                let r = (rho * rho + s * s - 2.0 * rho * s * mu).sqrt();
                acc += jac * wm * (-tau * r).exp() / r;
            }
        }
        Ok(0.5 * c * acc)
    }
}

/// Gradient of the free field at a point strictly outside the source ball.
pub fn eval_grad_v(src: &SourceBall, x: Vec3, tau: f64) -> Result<Vec3> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::Domain(format!("decay rate tau must be positive, got {tau}")));
    }
    let (center, radius) = src.ball()?;
    let s = x.sub(center).norm();
    if s <= radius {
        return Err(Error::Domain(
            "gradient of v is only evaluated outside the closed source ball".into(),
        ));
    }
    let c = src.amplitude;
    if c == 0.0 {
        return Ok(Vec3([0.0, 0.0, 0.0]));
    }
    let axis = x.sub(center).scale(1.0 / s);
    let (nodes, weights) = gauss_legendre(QUADRATURE_ORDER);
    let mut acc = 0.0;
    for (rn, rw) in nodes.iter().zip(&weights) {
        let rho = 0.5 * radius * (rn + 1.0);
        let jac = 0.5 * radius * rw * rho * rho;
        for (mu, wm) in nodes.iter().zip(&weights) {
            let r2 = rho * rho + s * s - 2.0 * rho * s * mu;
            let r = r2.sqrt();
            // Component of (x - y) along the symmetry axis; the transverse
            // part integrates to zero.
            let along = s - rho * mu;
            acc += jac * wm * along / r2 * (tau + 1.0 / r) * (-tau * r).exp();
        }
    }
    Ok(axis.scale(-0.5 * c * acc))
}

/// 1D free field: returns `(v(x, tau), v'(x, tau))` in closed form.
pub fn eval_v_1d(src: &SourceBall, x: f64, tau: f64) -> Result<(f64, f64)> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::Domain(format!("decay rate tau must be positive, got {tau}")));
    }
    let (lo, hi) = src.interval()?;
    let c = src.amplitude;
    // int_lo^min(x,hi) exp(-tau (x-y)) dy, mass strictly left of x.
    let left = if x > lo {
        let m = x.min(hi);
        ((-tau * (x - m)).exp() - (-tau * (x - lo)).exp()) / tau
    } else {
        0.0
    };
    // int_max(x,lo)^hi exp(-tau (y-x)) dy, mass strictly right of x.
    let right = if x < hi {
        let m = x.max(lo);
        ((-tau * (m - x)).exp() - (-tau * (hi - x)).exp()) / tau
    } else {
        0.0
    };
    let v = c / (2.0 * tau) * (left + right);
    let dv = -0.5 * c * (left - right);
    Ok((v, dv))
}

/// Exponentially weighted source moment
/// `int_B exp(-tau (hi - y)) f(y) dy = C (1 - exp(-tau eps)) / tau`
/// for the 1D interval `B = [hi - eps, hi]`.
pub fn source_moment_1d(src: &SourceBall, tau: f64) -> Result<f64> {
    if tau <= 0.0 {
        return Err(Error::Domain("decay rate tau must be positive".into()));
    }
    let (lo, hi) = src.interval()?;
    let eps = hi - lo;
    Ok(src.amplitude * (1.0 - (-tau * eps).exp()) / tau)
}

/// The pair `(v, grad v)` at a fixed decay rate, as evaluable functions.
pub struct FreeField<'a> {
    pub src: &'a SourceBall,
    pub tau: f64,
}

impl<'a> FreeField<'a> {
    pub fn new(src: &'a SourceBall, tau: f64) -> Self {
        FreeField { src, tau }
    }

    pub fn value(&self, x: Vec3) -> Result<f64> {
        eval_v(self.src, x, self.tau)
    }

    pub fn gradient(&self, x: Vec3) -> Result<Vec3> {
        eval_grad_v(self.src, x, self.tau)
    }
}
