//! The degree-zero field `Φ` produced by pairing a linear pole-preserving map
//! `A` with a loxodromic `g₂` and a conformal linear `g₁''`, together with the
//! direct composition it approximates near `∞`.
//!
//! Notation: `Õ = A⁻¹OA`, `b = (I − λO)ε`, `ι(x) = x/|x|²`,
//! `σ(v,w) = ⟨v,w⟩/|w|² − ⟨Õv,Õw⟩/|Õw|²`.

use alloc::vec::Vec;

use crate::grid::unit_directions;
use crate::linalg::{condition_number, orthogonality_defect, Matrix, Vector};
use crate::tolerances;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TangentIdentityParams {
    lambda: f64,
    o: Matrix,
    a_mat: Matrix,
    eps: Vector,
    a: Vector,
    a_inv: Matrix,
    o_tilde: Matrix,
    o_tilde_inv: Matrix,
}

fn inversion(x: &Vector) -> Vector {
    x / x.norm_squared()
}

impl TangentIdentityParams {
    /// `a_mat` is the linear map `A`, `a` the finite pole of `g₁'`.
    pub fn new(lambda: f64, o: Matrix, a_mat: Matrix, eps: Vector, a: Vector) -> Result<Self> {
        let n = eps.len();
        for (rows, cols) in [(o.nrows(), o.ncols()), (a_mat.nrows(), a_mat.ncols())] {
            if rows != n || cols != n {
                return Err(Error::DimensionMismatch { expected: n, found: rows });
            }
        }
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.len() });
        }
        let defect = orthogonality_defect(&o);
        if defect > tolerances::ORTHOGONAL {
            return Err(Error::NonOrthogonal { defect });
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidInput("λ must lie in (0, 1)".into()));
        }
        if !(eps.norm() > 0.0) {
            return Err(Error::InvalidInput("ε must be nonzero".into()));
        }
        if !(condition_number(&a_mat) < 1e12) {
            return Err(Error::NonInvertible);
        }
        let a_inv = a_mat.clone().try_inverse().ok_or(Error::NonInvertible)?;
        let o_tilde = &a_inv * &o * &a_mat;
        let o_tilde_inv = o_tilde.clone().try_inverse().ok_or(Error::NonInvertible)?;
        Ok(Self { lambda, o, a_mat, eps, a, a_inv, o_tilde, o_tilde_inv })
    }

    /// Same data with a different `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.o.clone(), self.a_mat.clone(), self.eps.clone(), self.a.clone())
    }

    pub fn dim(&self) -> usize {
        self.eps.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rotation(&self) -> &Matrix {
        &self.o
    }

    pub fn linear_map(&self) -> &Matrix {
        &self.a_mat
    }

    pub fn eps(&self) -> &Vector {
        &self.eps
    }

    pub fn pole(&self) -> &Vector {
        &self.a
    }

    pub fn o_tilde(&self) -> &Matrix {
        &self.o_tilde
    }

    /// `b = (I − λO)ε`.
    pub fn b(&self) -> Vector {
        &self.eps - &self.o * &self.eps * self.lambda
    }

    /// Below this radius the `O(1/|w|)` bookkeeping is meaningless.
    pub fn validity_radius(&self) -> f64 {
        10.0 * self.a.norm().max(self.eps.norm()).max(1.0)
    }

    fn check_w(&self, w: &Vector) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: w.len() });
        }
        if !(w.norm() > 0.0) {
            return Err(Error::ZeroW);
        }
        Ok(())
    }

    fn sigma_unchecked(&self, v: &Vector, w: &Vector) -> f64 {
        let ow = &self.o_tilde * w;
        v.dot(w) / w.norm_squared() - (&self.o_tilde * v).dot(&ow) / ow.norm_squared()
    }

    pub fn sigma(&self, v: &Vector, w: &Vector) -> Result<f64> {
        self.check_w(w)?;
        Ok(self.sigma_unchecked(v, w))
    }

    fn psi_unchecked(&self, w: &Vector) -> Vector {
        let ow = &self.o_tilde * w;
        let b = self.b();
        let aib = &self.a_inv * &b;
        let r2 = w.norm_squared();
        let aw2 = (&self.a_mat * w).norm_squared();
        &ow * (2.0 * (&self.a_mat * &ow).dot(&b) / r2)
            + (&aib - &ow * (2.0 * ow.dot(&aib) / ow.norm_squared())) * (aw2 / r2)
    }

    /// `ψ(w) = 2⟨AÕw,b⟩Õw/|w|² + (A⁻¹b − 2⟨Õw,A⁻¹b⟩Õw/|Õw|²)|Aw|²/|w|²`.
    pub fn psi(&self, w: &Vector) -> Result<Vector> {
        self.check_w(w)?;
        Ok(self.psi_unchecked(w))
    }

    fn small_phi_unchecked(&self, w: &Vector) -> Vector {
        let ow = &self.o_tilde * w;
        let s = self.sigma_unchecked(&self.a, w);
        let ratio = ow.norm_squared() / w.norm_squared();
        &ow * (2.0 * s * self.lambda) + &self.o_tilde * &self.a * self.lambda - &self.a * ratio
    }

    /// `φ(w) = 2σ(a,w)λÕw + (λÕ − |Õw|²/|w|²)a`, the first-order effect of
    /// the shift by `a`.
    pub fn small_phi(&self, w: &Vector) -> Result<Vector> {
        self.check_w(w)?;
        Ok(self.small_phi_unchecked(w))
    }

    fn eta_unchecked(&self, w: &Vector) -> Vector {
        &self.o_tilde_inv * (self.small_phi_unchecked(w) + self.psi_unchecked(w)) / self.lambda
    }

    /// `η(w) = λ⁻¹Õ⁻¹(φ(w) + ψ(w))`, homogeneous of degree 0.
    pub fn eta(&self, w: &Vector) -> Result<Vector> {
        self.check_w(w)?;
        Ok(self.eta_unchecked(w))
    }

    fn phi_unchecked(&self, w: &Vector) -> Vector {
        let e = self.eta_unchecked(w);
        let s = self.sigma_unchecked(&e, w);
        &e - w * (2.0 * s)
    }

    /// `Φ(w) = η(w) − 2σ(η(w), w)w`.
    pub fn phi(&self, w: &Vector) -> Result<Vector> {
        self.check_w(w)?;
        Ok(self.phi_unchecked(w))
    }

    /// Approximation of `η(w₀)` at `w₀ = Õ⁻¹A⁻¹b` keeping only the `1/λ`
    /// terms.
    pub fn eta_dominant(&self) -> Vector {
        let aib = &self.a_inv * self.b();
        let w0 = &self.o_tilde_inv * &aib;
        let b2 = self.b().norm_squared();
        let coef = aib.norm_squared() / (self.lambda * w0.norm_squared());
        &self.o_tilde_inv * (&aib * (b2 / aib.norm_squared()) - &self.a) * coef
    }

    /// `g₂'''(w) = g₂''(w + a) − a` by composing the concrete pieces:
    /// `g₂ = ι ∘ (λO(·) + b) ∘ ι`, `g₂' = A⁻¹g₂A`, `g₂'' = ιg₂'ι`.
    pub fn g2_triple_prime_direct(&self, w: &Vector) -> Vector {
        let x = inversion(&(w + &self.a));
        let x = inversion(&(&self.a_mat * x));
        let x = inversion(&(&self.o * x * self.lambda + self.b()));
        inversion(&(&self.a_inv * x)) - &self.a
    }

    /// `(λÕw + φ(w) + ψ(w))|w|²/|Õw|²`.
    pub fn g2_triple_prime_expansion(&self, w: &Vector) -> Vector {
        let ow = &self.o_tilde * w;
        (&ow * self.lambda + self.small_phi_unchecked(w) + self.psi_unchecked(w))
            * (w.norm_squared() / ow.norm_squared())
    }

    /// Both evaluations, for `|w|` at least the validity radius.
    pub fn g2_triple_prime(&self, w: &Vector) -> Result<(Vector, Vector)> {
        self.check_w(w)?;
        let radius = self.validity_radius();
        if w.norm() < radius {
            return Err(Error::BelowValidityRadius { norm: w.norm(), radius });
        }
        Ok((self.g2_triple_prime_direct(w), self.g2_triple_prime_expansion(w)))
    }

    /// `ĝ₂⁻¹(w) = λ⁻¹Õ⁻¹w|w|²/|Õ⁻¹w|²`.
    pub fn g_hat_inverse(&self, w: &Vector) -> Vector {
        let v = &self.o_tilde_inv * w;
        &v * (w.norm_squared() / (self.lambda * v.norm_squared()))
    }

    /// `f = ĝ₂⁻¹ ∘ g₂'''`, which is `w + Φ(w) + O(1/|w|)`.
    pub fn tangent_map(&self, w: &Vector) -> Vector {
        self.g_hat_inverse(&self.g2_triple_prime_direct(w))
    }

    /// Fitted `K` in `|Φ(w+v) − Φ(w)| ≤ K|v|/|w|`, sampled with `|v| = 1`
    /// at radius `r` along the given directions.
    pub fn quasi_translation_constant(&self, directions: &[Vector], r: f64) -> f64 {
        let mut k = 0.0f64;
        for (i, d) in directions.iter().enumerate() {
            let v = &directions[(i + 1) % directions.len()];
            let w = d * r;
            let shifted = &w + v;
            if shifted.norm() == 0.0 {
                continue;
            }
            let diff = (self.phi_unchecked(&shifted) - self.phi_unchecked(&w)).norm();
            k = k.max(diff * r / v.norm());
        }
        k
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessSource {
    /// `b = 0`: the pole `a`.
    PoleA,
    /// `w₀ = Õ⁻¹A⁻¹b` with `A⁻¹b`, `a` independent.
    Independent,
    /// `w₀` with `A⁻¹b`, `a` dependent.
    Dependent,
    /// Best of the seeded direction grid.
    Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NonvanishingVerdict {
    Witness { w: Vector, phi: Vector, norm: f64, source: WitnessSource },
    AllZero { directions: usize, max_norm: f64 },
}

impl NonvanishingVerdict {
    pub fn witness_norm(&self) -> f64 {
        match self {
            NonvanishingVerdict::Witness { norm, .. } => *norm,
            NonvanishingVerdict::AllZero { .. } => 0.0,
        }
    }
}

/// Below this `|Φ|` a direction counts as a zero.
pub const ZERO_FIELD: f64 = 1e-10;

fn independent(u: &Vector, v: &Vector) -> bool {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return false;
    }
    let c = u.dot(v) / (nu * nv);
    1.0 - c.abs() > 1e-12
}

/// Tries the case witnesses first, then `directions` seeded unit vectors.
pub fn nonvanishing_search(params: &TangentIdentityParams, directions: usize, seed: u64) -> NonvanishingVerdict {
    let b = params.b();
    let mut candidates: Vec<(Vector, WitnessSource)> = Vec::new();
    if b.norm() <= 1e-14 * params.eps.norm() {
        if params.a.norm() > 0.0 {
            candidates.push((params.a.clone(), WitnessSource::PoleA));
        }
    } else {
        let aib = &params.a_inv * &b;
        let w0 = &params.o_tilde_inv * &aib;
        let source = if independent(&aib, &params.a) { WitnessSource::Independent } else { WitnessSource::Dependent };
        candidates.push((w0, source));
    }
    for (w, source) in &candidates {
        let phi = params.phi_unchecked(w);
        let norm = phi.norm();
        if norm > ZERO_FIELD {
            return NonvanishingVerdict::Witness { w: w.clone(), phi, norm, source: *source };
        }
    }
    let mut best: Option<(Vector, Vector, f64)> = None;
    for d in unit_directions(params.dim(), directions, seed) {
        let phi = params.phi_unchecked(&d);
        let norm = phi.norm();
        if best.as_ref().is_none_or(|b| norm > b.2) {
            best = Some((d, phi, norm));
        }
    }
    match best {
        Some((w, phi, norm)) if norm > ZERO_FIELD => {
            NonvanishingVerdict::Witness { w, phi, norm, source: WitnessSource::Grid }
        }
        other => NonvanishingVerdict::AllZero { directions, max_norm: other.map_or(0.0, |b| b.2) },
    }
}

/// One row per `λ`: the verdict and whether `η(w₀)` is within 10% of its
/// `1/λ` part.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub verdict: NonvanishingVerdict,
    pub dominance_ratio: Option<f64>,
}

/// Runs [`nonvanishing_search`] for each `λ`, reporting where the `1/λ`
/// terms begin to dominate.
pub fn lambda_sweep(
    params: &TangentIdentityParams,
    lambdas: &[f64],
    directions: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let p = params.with_lambda(lambda)?;
            let b = p.b();
            let dominance_ratio = (b.norm() > 0.0).then(|| {
                let w0 = &p.o_tilde_inv * (&p.a_inv * &b);
                let full = p.eta_unchecked(&w0);
                (full - p.eta_dominant()).norm() / p.eta_dominant().norm()
            });
            Ok(SweepRow { lambda, verdict: nonvanishing_search(&p, directions, seed), dominance_ratio })
        })
        .collect()
}
