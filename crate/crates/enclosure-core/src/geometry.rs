//! Shapes, set distances, observation-time thresholds and scene validation.
//!
//! Every recovery statement in this crate is conditional on geometric
//! hypotheses (disjoint closures, containment, a minimum observation time).
//! This module holds the shape vocabulary, the exact set distances for the
//! supported shape pairs, and the scene-level validation that names the
//! violated hypothesis when a configuration is rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or vector in R^3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn add(&self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    pub fn sub(&self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn dot(&self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(*self).sqrt()
    }
}

/// Supported obstacle / source / surface geometries.
///
/// `HalfLine1D { start: a }` models the 1D obstacle `]a, +inf[`; the exterior
/// domain is then `]-inf, a[` with the boundary condition imposed at `x = a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Ball { center: Vec3, radius: f64 },
    AxisBox { min: Vec3, max: Vec3 },
    #[serde(rename = "half_line_1d")]
    HalfLine1D { start: f64 },
    #[serde(rename = "interval_1d")]
    Interval1D { lo: f64, hi: f64 },
}

impl Shape {
    /// Spatial dimension the shape lives in (1 or 3).
    pub fn dimension(&self) -> u8 {
        match self {
            Shape::Ball { .. } | Shape::AxisBox { .. } => 3,
            Shape::HalfLine1D { .. } | Shape::Interval1D { .. } => 1,
        }
    }

    /// Structural invariants: positive radius, ordered corners, ordered
    /// interval endpoints.
    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Ball { radius, .. } => {
                if *radius <= 0.0 || !radius.is_finite() {
                    return Err(Error::InvalidGeometry(format!(
                        "ball radius must be positive and finite, got {radius}"
                    )));
                }
            }
            Shape::AxisBox { min, max } => {
                for i in 0..3 {
                    if !(min.0[i] < max.0[i]) {
                        return Err(Error::InvalidGeometry(format!(
                            "box corners must be ordered component-wise, axis {i}: {} !< {}",
                            min.0[i], max.0[i]
                        )));
                    }
                }
            }
            Shape::HalfLine1D { start } => {
                if !start.is_finite() {
                    return Err(Error::InvalidGeometry("half-line start must be finite".into()));
                }
            }
            Shape::Interval1D { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::InvalidGeometry(format!(
                        "interval must satisfy lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounding box `(min, max)` of a 3D shape.
    pub fn bounding_box(&self) -> Result<(Vec3, Vec3)> {
        match self {
            Shape::Ball { center, radius } => Ok((
                Vec3([center.x() - radius, center.y() - radius, center.z() - radius]),
                Vec3([center.x() + radius, center.y() + radius, center.z() + radius]),
            )),
            Shape::AxisBox { min, max } => Ok((*min, *max)),
            _ => Err(Error::UnsupportedShapes(
                "bounding_box is only defined for 3D shapes".into(),
            )),
        }
    }

    /// Whether a 3D point lies in the closed shape.
    pub fn contains(&self, p: Vec3) -> Result<bool> {
        match self {
            Shape::Ball { center, radius } => Ok(p.sub(*center).norm() <= *radius),
            Shape::AxisBox { min, max } => Ok((0..3)
                .all(|i| min.0[i] <= p.0[i] && p.0[i] <= max.0[i])),
            _ => Err(Error::UnsupportedShapes("contains expects a 3D shape".into())),
        }
    }
}

/// Exact Euclidean distance between the closures of two shapes.
///
/// Supported pairs: ball-ball, ball-box, box-box and all 1D pairs. The
/// result is zero exactly when the closures intersect.
pub fn dist_sets(a: &Shape, b: &Shape) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    if a.dimension() != b.dimension() {
        return Err(Error::UnsupportedShapes(format!(
            "cannot take the distance of shapes with dimensions {} and {}",
            a.dimension(),
            b.dimension()
        )));
    }
    let d = match (a, b) {
        (Shape::Ball { center: c1, radius: r1 }, Shape::Ball { center: c2, radius: r2 }) => {
            (c1.sub(*c2).norm() - r1 - r2).max(0.0)
        }
        (Shape::Ball { center, radius }, Shape::AxisBox { min, max })
        | (Shape::AxisBox { min, max }, Shape::Ball { center, radius }) => {
            (point_box_distance(*center, *min, *max) - radius).max(0.0)
        }
        (Shape::AxisBox { min: min1, max: max1 }, Shape::AxisBox { min: min2, max: max2 }) => {
            let mut sq = 0.0;
            for i in 0..3 {
                let gap = (min1.0[i] - max2.0[i]).max(min2.0[i] - max1.0[i]).max(0.0);
                sq += gap * gap;
            }
            sq.sqrt()
        }
        (Shape::Interval1D { lo: l1, hi: h1 }, Shape::Interval1D { lo: l2, hi: h2 }) => {
            (l1 - h2).max(l2 - h1).max(0.0)
        }
        (Shape::HalfLine1D { start }, Shape::Interval1D { hi, .. })
        | (Shape::Interval1D { hi, .. }, Shape::HalfLine1D { start }) => (start - hi).max(0.0),
        (Shape::HalfLine1D { .. }, Shape::HalfLine1D { .. }) => 0.0,
        _ => {
            return Err(Error::UnsupportedShapes(format!(
                "distance between {a:?} and {b:?} is not implemented"
            )))
        }
    };
    Ok(d)
}

/// Distance from a point to a closed axis box (zero inside).
fn point_box_distance(p: Vec3, min: Vec3, max: Vec3) -> f64 {
    let mut sq = 0.0;
    for i in 0..3 {
        let gap = (min.0[i] - p.0[i]).max(p.0[i] - max.0[i]).max(0.0);
        sq += gap * gap;
    }
    sq.sqrt()
}

/// Distance from a point to the boundary surface of a 3D shape.
fn point_boundary_distance(p: Vec3, shape: &Shape) -> Result<f64> {
    match shape {
        Shape::Ball { center, radius } => Ok((p.sub(*center).norm() - radius).abs()),
        Shape::AxisBox { min, max } => {
            let outside = point_box_distance(p, *min, *max);
            if outside > 0.0 {
                Ok(outside)
            } else {
                // Inside: nearest face.
                let mut best = f64::INFINITY;
                for i in 0..3 {
                    best = best.min(p.0[i] - min.0[i]).min(max.0[i] - p.0[i]);
                }
                Ok(best)
            }
        }
        _ => Err(Error::UnsupportedShapes(
            "boundary distance expects a 3D shape".into(),
        )),
    }
}

/// Deterministic, roughly uniform sample of a shape's boundary surface.
pub fn sample_boundary(shape: &Shape, n: usize) -> Result<Vec<Vec3>> {
    match shape {
        Shape::Ball { center, radius } => {
            // Fibonacci sphere.
            let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
            let mut pts = Vec::with_capacity(n);
            for i in 0..n {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                pts.push(center.add(
                    Vec3([rho * phi.cos(), rho * phi.sin(), z]).scale(*radius),
                ));
            }
            Ok(pts)
        }
        Shape::AxisBox { min, max } => {
            let side = ((n as f64 / 6.0).sqrt().ceil() as usize).max(2);
            let mut pts = Vec::new();
            let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
            for axis in 0..3 {
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                for &face in &[min.0[axis], max.0[axis]] {
                    for iu in 0..side {
                        for iv in 0..side {
                            let tu = (iu as f64 + 0.5) / side as f64;
                            let tv = (iv as f64 + 0.5) / side as f64;
                            let mut p = [0.0; 3];
                            p[axis] = face;
                            p[u] = lerp(min.0[u], max.0[u], tu);
                            p[v] = lerp(min.0[v], max.0[v], tv);
                            pts.push(Vec3(p));
                        }
                    }
                }
            }
            Ok(pts)
        }
        _ => Err(Error::UnsupportedShapes(
            "boundary sampling expects a 3D shape".into(),
        )),
    }
}

/// Shortest broken path `|x - y| + |y - z|` over `x` on the source boundary,
/// `y` on the obstacle boundary and `z` on the measurement surface.
///
/// `x` and `z` are minimized in closed form given `y`; `y` ranges over a
/// deterministic boundary sample of density `samples` (default 1000) plus the
/// axis candidates through the source and surface centers, which makes
/// collinear ball configurations exact. Diagnostic only: used to report
/// whether the observation time exceeds the finite-propagation bound.
pub fn broken_path_length(
    source: &Shape,
    obstacle: &Shape,
    surface: &Shape,
    samples: usize,
) -> Result<f64> {
    let mut candidates = sample_boundary(obstacle, samples.max(8))?;
    if let Shape::Ball { center, radius } = obstacle {
        // Axis candidates: exact for collinear/concentric spheres.
        for other in [source, surface] {
            let target = match other {
                Shape::Ball { center: c, .. } => *c,
                Shape::AxisBox { min, max } => min.add(*max).scale(0.5),
                _ => continue,
            };
            let axis = target.sub(*center);
            let len = axis.norm();
            if len > 0.0 {
                let dir = axis.scale(1.0 / len);
                candidates.push(center.add(dir.scale(*radius)));
                candidates.push(center.sub(dir.scale(*radius)));
            }
        }
    }
    let mut best = f64::INFINITY;
    for y in candidates {
        let leg1 = point_boundary_distance(y, source)?;
        let leg2 = point_boundary_distance(y, surface)?;
        best = best.min(leg1 + leg2);
    }
    Ok(best)
}

/// Obstacle model selected by a scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Dissipative boundary condition `du/dnu - gamma du/dt - beta u = 0` on
    /// the obstacle boundary.
    Robin,
    /// Penetrable obstacle: coefficient `alpha != 1` inside, no boundary
    /// condition.
    Refractive,
    /// No obstacle; used for control runs.
    Free,
}

/// Where the wave field is recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataMode {
    /// Field and normal derivative on a closed surface enclosing the obstacle.
    Surface,
    /// Field on the source ball itself (emitter = receiver).
    Backscatter,
}

/// Geometric and material description of one experiment scene.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneSpec {
    /// 1 or 3.
    pub dimension: u8,
    pub mode: Mode,
    /// Obstacle `D`; `None` only in `Free` mode.
    #[serde(default)]
    pub obstacle: Option<Shape>,
    /// Source support `B` (ball in 3D, interval in 1D).
    pub source: Shape,
    /// Source amplitude `C` of the constant profile `f = C` on `B`.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Measurement surface boundary (3D surface mode). In 1D the measurement
    /// point is fixed at the origin.
    #[serde(default)]
    pub surface: Option<Shape>,
    /// Robin coefficient `gamma >= 0` (constant on the boundary).
    #[serde(default)]
    pub gamma: f64,
    /// Robin coefficient `beta` (constant on the boundary; may be negative).
    #[serde(default)]
    pub beta: f64,
    /// Refractive coefficient inside the obstacle; outside it is 1.
    #[serde(default = "default_alpha")]
    pub alpha_interior: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    1.0
}

impl SceneSpec {
    /// The implicit 1D measurement half-line `]0, +inf[`.
    pub fn measurement_halfline_1d() -> Shape {
        Shape::HalfLine1D { start: 0.0 }
    }

    /// Distance from the obstacle to the source support.
    pub fn dist_obstacle_source(&self) -> Result<f64> {
        let d = self.obstacle.as_ref().ok_or_else(|| {
            Error::Config("scene has no obstacle; distance dist(D, B) is undefined".into())
        })?;
        dist_sets(d, &self.source)
    }

    /// Distance from the measurement surface to the source support.
    pub fn dist_surface_source(&self) -> Result<f64> {
        if self.dimension == 1 {
            return dist_sets(&Self::measurement_halfline_1d(), &self.source);
        }
        let s = self.surface.as_ref().ok_or_else(|| {
            Error::Config("surface observation requested but the scene has no surface".into())
        })?;
        dist_sets(s, &self.source)
    }

    /// Validate all scene hypotheses required by the recovery statements.
    /// Errors name the violated hypothesis.
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 3 {
            return Err(Error::Config(format!(
                "dimension must be 1 or 3, got {}",
                self.dimension
            )));
        }
        self.source.validate()?;
        if self.source.dimension() != self.dimension {
            return Err(Error::Config(
                "source shape dimension does not match the scene dimension".into(),
            ));
        }
        match (self.dimension, &self.source) {
            (3, Shape::Ball { .. }) | (1, Shape::Interval1D { .. }) => {}
            _ => {
                return Err(Error::Config(
                    "source must be a ball (3D) or an interval (1D)".into(),
                ))
            }
        }
        if self.amplitude == 0.0 || !self.amplitude.is_finite() {
            return Err(Error::HypothesisViolated(
                "source amplitude C must be nonzero: the initial data must be bounded away \
                 from zero on its support (single-signed profile)"
                    .into(),
            ));
        }
        if self.mode == Mode::Robin && self.gamma < 0.0 {
            return Err(Error::HypothesisViolated(format!(
                "gamma must be nonnegative on the obstacle boundary (energy dissipation), got {}",
                self.gamma
            )));
        }
        if self.mode == Mode::Refractive && !(self.alpha_interior > 0.0) {
            return Err(Error::HypothesisViolated(format!(
                "alpha must be bounded below by a positive constant, got {}",
                self.alpha_interior
            )));
        }
        if self.mode != Mode::Free {
            let obstacle = self.obstacle.as_ref().ok_or_else(|| {
                Error::Config("robin/refractive scenes require an obstacle".into())
            })?;
            obstacle.validate()?;
            if obstacle.dimension() != self.dimension {
                return Err(Error::Config(
                    "obstacle shape dimension does not match the scene dimension".into(),
                ));
            }
            if dist_sets(obstacle, &self.source)? <= 0.0 {
                return Err(Error::HypothesisViolated(
                    "closure(B) and closure(D) must be disjoint: the source support may \
                     not touch the obstacle"
                        .into(),
                ));
            }
        }
        if self.dimension == 1 {
            if let Shape::Interval1D { hi, .. } = self.source {
                if hi >= 0.0 {
                    return Err(Error::HypothesisViolated(
                        "1D normalization: the source support must lie strictly left of the \
                         measurement point x = 0"
                            .into(),
                    ));
                }
            }
            if let Some(Shape::HalfLine1D { start }) = &self.obstacle {
                if *start <= 0.0 {
                    return Err(Error::HypothesisViolated(
                        "1D normalization: the obstacle ]a, inf[ must lie strictly right of \
                         the measurement point x = 0 (a > 0)"
                            .into(),
                    ));
                }
            } else if self.mode != Mode::Free {
                return Err(Error::Config(
                    "1D scenes model the obstacle as a half-line ]a, inf[".into(),
                ));
            }
            if self.mode == Mode::Refractive {
                return Err(Error::Config(
                    "1D scenes support only the boundary-condition (robin) obstacle".into(),
                ));
            }
        }
        if let Some(surface) = &self.surface {
            surface.validate()?;
            if self.dimension != 3 {
                return Err(Error::Config(
                    "an explicit measurement surface is only used in 3D scenes".into(),
                ));
            }
            if dist_sets(surface, &self.source)? <= 0.0 {
                return Err(Error::HypothesisViolated(
                    "closure(B) and closure(Omega) must be disjoint: the source support may \
                     not touch the measurement surface"
                        .into(),
                ));
            }
            if let Some(obstacle) = &self.obstacle {
                if !surface_strictly_contains(surface, obstacle)? {
                    return Err(Error::HypothesisViolated(
                        "closure(D) must be contained in Omega: the obstacle must lie \
                         strictly inside the measurement surface"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Strict lower bound on the observation time `T` for the requested data
    /// mode: `2 dist(D,B) - dist(Omega,B)` for surface data, `2 dist(D,B)`
    /// for back-scattering data.
    pub fn min_observation_time(&self, data_mode: DataMode) -> Result<f64> {
        let d_db = self.dist_obstacle_source()?;
        match data_mode {
            DataMode::Backscatter => Ok(2.0 * d_db),
            DataMode::Surface => {
                if self.dimension == 3 && self.surface.is_none() {
                    return Err(Error::Config(
                        "surface observation requested but the scene has no surface".into(),
                    ));
                }
                Ok(2.0 * d_db - self.dist_surface_source()?)
            }
        }
    }
}

/// Does the region bounded by `surface` strictly contain `inner`?
fn surface_strictly_contains(surface: &Shape, inner: &Shape) -> Result<bool> {
    match surface {
        Shape::Ball { center, radius } => match inner {
            Shape::Ball { center: ci, radius: ri } => {
                Ok(ci.sub(*center).norm() + ri < *radius)
            }
            Shape::AxisBox { min, max } => {
                let mut worst: f64 = 0.0;
                for ix in 0..2 {
                    for iy in 0..2 {
                        for iz in 0..2 {
                            let corner = Vec3([
                                if ix == 0 { min.x() } else { max.x() },
                                if iy == 0 { min.y() } else { max.y() },
                                if iz == 0 { min.z() } else { max.z() },
                            ]);
                            worst = worst.max(corner.sub(*center).norm());
                        }
                    }
                }
                Ok(worst < *radius)
            }
            _ => Err(Error::UnsupportedShapes("containment expects 3D shapes".into())),
        },
        Shape::AxisBox { min, max } => {
            let (imin, imax) = inner.bounding_box()?;
            Ok((0..3).all(|i| min.0[i] < imin.0[i] && imax.0[i] < max.0[i]))
        }
        _ => Err(Error::UnsupportedShapes(
            "the measurement surface must be a ball or a box".into(),
        )),
    }
}
