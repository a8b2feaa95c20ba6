//! Error types shared by the whole pipeline.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A shape or scene failed a structural invariant.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A scene violates a hypothesis required by the recovery theory.
    /// The message names the violated hypothesis.
    #[error("scene hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// An operation was asked for a shape pair it does not support.
    #[error("unsupported shape combination: {0}")]
    UnsupportedShapes(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Solver configuration is unusable (CFL violation, probe placement, ...).
    #[error("solver configuration error: {0}")]
    SolverConfig(String),

    /// The Laplace-domain closed form has a pole at the requested decay rate.
    #[error("pole in closed form: {0}")]
    Pole(String),

    /// Regression window is unusable (too few points, zeros, non-finite values).
    #[error("regression window error: {0}")]
    Window(String),

    /// The indicator does not decay on the window; no distance can be read off.
    #[error("no exponential decay detected: {0}")]
    NoDecay(String),

    /// The coefficient fit left its valid branch.
    #[error("coefficient recovery failed: {0}")]
    Recovery(String),

    /// Experiment configuration is invalid or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Mismatched probe sets or tau grids between paired fields.
    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
