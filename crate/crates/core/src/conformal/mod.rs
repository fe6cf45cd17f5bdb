//! Möbius transformations of `∂ℍᴺ = ℝᴺ⁻¹ ∪ {∞}`.
//!
//! Maps are stored as Lorentz matrices in `O⁺(N,1)` acting on null rays of
//! `ℝᴺ'¹`, with the boundary chart given by stereographic projection. A point
//! `x ∈ ℝⁿ` (`n = N − 1`) corresponds to the null ray through
//! `(2x, 1 − |x|², 1 + |x|²)` and `∞` to the ray through `(0, −1, 1)`.
//!
//! Lorentz matrices lose precision when poles are extreme, so based linear
//! maps and normalizers also carry a closed-form chart evaluator
//! ([`BasedFrame`]) that never passes through the matrix.

mod classify;
mod frame;
mod moebius;
mod point;

pub use classify::{classify, Classification, LoxodromicData};
pub use frame::{based_normalizer, realize_based_linear, BasedFrame, BasedLinearMap, BasedLinearRealization};
pub use moebius::{ConformalDerivative, MoebiusMap};
pub use point::{cross_ratio, BoundaryPoint, Chart};
