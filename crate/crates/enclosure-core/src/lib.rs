//! Wave-based obstacle probing from finite-time data.
//!
//! This crate simulates acoustic waves around an obstacle — either a
//! dissipative (Robin) boundary or a penetrable region with a different
//! refractive index — reduces the recorded traces to the Laplace domain,
//! forms indicator functionals from boundary or back-scattering data, and
//! extracts the distance from the source ball to the obstacle (and, in one
//! dimension, the boundary coefficients) from the indicators' large-decay-rate
//! behaviour.
//!
//! Pipeline: [`solver1d`]/[`solver3d`] produce probe traces, [`transform`]
//! maps them to `w(x, tau)`, [`indicator`] forms the indicator curves,
//! [`extraction`] turns a curve into distances, sign classes and (1D)
//! boundary coefficients. [`runner`] orchestrates full experiments from a
//! JSON config and writes CSV/JSON artifacts.

// Validation guards are written as negated comparisons (`!(x > 0.0)`) on
// purpose: they reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extraction;
pub mod geometry;
pub mod indicator;
pub mod runner;
pub mod solver1d;
pub mod solver3d;
pub mod sources;
pub mod transform;

pub use error::Error;
pub use geometry::{DataMode, Mode, SceneSpec, Shape, Vec3};
pub use sources::SourceBall;
