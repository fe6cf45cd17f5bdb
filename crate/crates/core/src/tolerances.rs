//! Numerical tolerances shared across the crate.
//!
//! All values assume `f64` arithmetic and products of at most 64 generators.

/// Max-abs entry of `MᵀJM − J` accepted for a Lorentz matrix.
pub const LORENTZ: f64 = 1e-9;
/// Agreement of `apply(f∘g, x)` with `apply(f, apply(g, x))`.
pub const COMPOSE: f64 = 1e-9;
/// Relative accuracy of conformal derivatives against finite differences.
pub const DERIVATIVE: f64 = 1e-6;
/// Displacement accepted for a fixed point.
pub const FIXED_POINT: f64 = 1e-8;
/// Translation lengths below this classify as non-loxodromic.
pub const LOXODROMIC: f64 = 1e-6;
/// Below this translation length the spectral gap is too small to trust the
/// eigenvalues alone; pole separation is checked as well.
pub const LOXODROMIC_AMBIGUOUS: f64 = 1e-3;
/// Max-abs entry of `OᵀO − I` accepted for an orthogonal matrix.
pub const ORTHOGONAL: f64 = 1e-9;
/// Relative cross-ratio drift accepted under Möbius action.
pub const CROSS_RATIO: f64 = 1e-8;
/// Entry rounding used for fingerprint deduplication of group elements.
pub const FINGERPRINT: f64 = 1e-7;
/// Compositions between polar re-projections onto `O(N,1)`.
pub const REPROJECT_EVERY: u32 = 8;
/// Flow-law tolerance.
pub const FLOW: f64 = 1e-8;
/// Threshold for declaring two maps distinct on probe points.
pub const DISTINCT: f64 = 1e-8;
/// Second-difference threshold for declaring a map linear.
pub const LINEARITY: f64 = 1e-8;
/// Finite-difference step for closures.
pub const FD_STEP: f64 = 1e-5;
/// Clustering radius for normalized logarithm directions.
pub const DIRECTION_CLUSTER: f64 = 1e-3;
/// Escape radius for iteration, as a multiple of the grid radius.
pub const ESCAPE_FACTOR: f64 = 1e3;
/// Step of the second-difference nonlinearity certificate. Rounding puts a
/// floor of about `ε‖f‖/δ²` under the certificate, `~1e-11` at this step.
pub const CERTIFICATE_STEP: f64 = 1e-2;
