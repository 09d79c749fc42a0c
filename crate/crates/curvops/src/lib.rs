//! Algebra of curvature operators on ℝⁿ.
//!
//! The crate works pointwise: a curvature operator is a symmetric matrix on
//! the bivector space Λ²ℝⁿ that satisfies the first Bianchi identity. On top
//! of that model it provides
//!
//! - the bivector basis, so(n) structure constants and Hamilton's `#` product
//!   ([`basis`], [`operator`]),
//! - membership oracles for the classical nonnegativity cones (nonnegative
//!   curvature operator, 2-nonnegative, isotropic after extension, Ricci,
//!   scalar, sectional) together with minimal-shift computations ([`cones`]),
//! - integration of the reaction ODE Ṙ = 2(R² + R#R) with blow-up guards and
//!   invariance probes ([`ode`]),
//! - construction of pinching constants (α, β, T, K) from a scalar-curvature
//!   window and positivity probes for the associated defect operator
//!   ([`pinching`]).
//!
//! Conventions: basis bivectors e_i∧e_j (i < j, lexicographic) are
//! orthonormal, the curvature operator of the round unit sphere is the
//! identity, and the bivector e_i∧e_j is identified with the skew matrix
//! E_ij − E_ji. Under these choices `R + R#Id = ric∧id` holds exactly and
//! `Id#Id = (n−2)·Id`.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature is
//! on by default and `parallel` enables rayon-backed sample loops in the
//! probe drivers. All randomness flows through the seeded generator in
//! [`rng`], so every probe is reproducible bit-for-bit regardless of the
//! parallel schedule.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod basis;
pub mod cones;
pub mod error;
pub mod mat;
pub mod ode;
pub mod operator;
pub mod pinching;
pub mod rng;
mod scalar;

mod parallel;

pub use basis::{BivectorBasis, StructureConstants};
pub use cones::{ConeId, MembershipReport, OracleKind, SearchBudget, Witness};
pub use error::Error;
pub use mat::Mat;
pub use ode::{Method, SolverConfig, Trajectory};
pub use operator::{CurvatureOperator, RicciData};
pub use pinching::{DefectInputs, PinchingConstants};

/// Default relative tolerance for identity residuals.
pub const DEFAULT_TOL: f64 = 1e-10;
