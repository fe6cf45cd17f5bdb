//! Numerical machinery for renormalizing Möbius actions near fixed points of
//! Kleinian groups and for turning the resulting near-identity sequences into
//! one-parameter flows.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; file formats, scenarios and the command line live in
//! the `kleinflow` companion crate.
//!
//! Layout:
//! - [`conformal`]: boundary points, Lorentz-matrix Möbius maps, classification,
//!   derivatives and the based normalizer `S` with `S(0) = ε`, `S(∞) = M`, `DS(0) = I`.
//! - [`groups`]: Coxeter and Schottky groups, word enumeration, pole search,
//!   cocompact normalization and length-spectrum commensurability.
//! - [`renormalization`]: zoom-in limits, dilation schedules, almost-affine and
//!   commutator expansions, sector zooms and eccentric sequences.
//! - [`report`]: convergence reports shared by the zoom and flow engines.
//! - [`affine`]: `aff(ℝⁿ)` / `Aff(ℝⁿ)`, exp/log, the Euler limit and flow checks.
//! - [`tangent`]: the tangent-to-identity field `Φ` and its ingredients.
//! - [`experiments`]: nonlinearity and distinctness certificates, pattern/flow demo.

#![no_std]
// `!(x < tol)` is how NaN fails a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod affine;
pub mod conformal;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod groups;
pub mod linalg;
pub mod numdiff;
pub mod renormalization;
pub mod report;
pub mod tangent;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
