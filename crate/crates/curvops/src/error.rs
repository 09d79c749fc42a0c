use alloc::boxed::Box;

use thiserror::Error;

/// Errors reported by the curvature-operator kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Ambient dimension outside the supported range.
    #[error("invalid ambient dimension n = {n}, need n >= 2")]
    InvalidDimension { n: usize },

    /// Two operands live on bivector spaces of different dimension.
    #[error("basis mismatch: n = {left} vs n = {right}")]
    BasisMismatch { left: usize, right: usize },

    /// Matrix shape does not match what the operation requires.
    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    /// A cone oracle is undefined for this dimension (isotropic cones need
    /// four-frames in the extended space).
    #[error("cone {cone} is undefined for ambient dimension n = {n}")]
    ConeUndefined { cone: &'static str, n: usize },

    /// Shift bisection could not bracket a sign change within its budget.
    #[error("min-shift bisection failed to bracket a sign change for {cone}")]
    BracketFailure { cone: &'static str },

    /// The ODE integrator ran out of steps before reaching the horizon; the
    /// states computed so far ride along.
    #[error("integration truncated after {steps} steps at t = {t_reached}")]
    MaxStepsExceeded {
        steps: usize,
        t_reached: f64,
        partial: Box<crate::ode::Trajectory>,
    },

    /// A solver or search configuration value is out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    /// The admissible interval (2/(1−2A), 4) for the pinching coefficient is
    /// empty; requires A < 1/4.
    #[error("empty alpha interval for A = {a}; need A in (0, 1/4)")]
    EmptyAlphaInterval { a: f64 },

    /// Constants search produced values that fail their own certification
    /// grid; indicates an internal inconsistency.
    #[error("pinching constants failed certification: {0}")]
    CertificationFailure(&'static str),
}
