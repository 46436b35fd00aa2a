//! Error types shared across the crate.

use alloc::string::String;
use thiserror::Error;

/// Errors produced by geometry, mesh, solver and training routines.
///
/// `RejectedAction` is not a failure of the library: it signals that a
/// requested deformation produced an invalid shape and the caller (usually the
/// RL environment) should penalize and roll back.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// An argument was outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A least-squares fit had a rank-deficient or non-positive-definite
    /// normal system.
    #[error("fit error: {0}")]
    Fit(String),

    /// A deformation produced a self-intersecting or otherwise unusable
    /// shape; the caller decides the penalty.
    #[error("rejected action: {0}")]
    RejectedAction(String),

    /// Mesh connectivity or orientation is broken.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// A linear solve did not reach its tolerance.
    #[error("linear solver: {0}")]
    LinearSolver(String),

    /// Nonlinear (Newton) iteration failed to converge within its budget.
    #[error("newton: {0}")]
    Newton(String),

    /// A flow state left the physical region (rho <= 0 or p <= 0).
    #[error("nonphysical state: {0}")]
    NonPhysical(String),

    /// Tensor shapes do not line up in the network graph.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A checkpoint or config payload failed validation.
    #[error("invalid data: {0}")]
    InvalidData(String),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, CoreError>;
