use alloc::vec::Vec;

use crate::conformal::ConformalDerivative;
use crate::grid::EvalGrid;
use crate::linalg::{condition_number, max_abs, Matrix, Vector};
use crate::numdiff::richardson_jacobian;
use crate::report::record_minima;
use crate::tolerances;
use crate::{Error, Result};

/// `h_n(x) = λ₂^{−m}O₂^{−m} μ(λ₁ⁿO₁ⁿx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EccentricStep {
    pub n: usize,
    pub m: usize,
    /// `λ₁ⁿ/λ₂^m`, in `[λ₂, 1]`.
    pub ratio: f64,
    inner: Matrix,
    outer: Matrix,
    /// `‖O₁ⁿ − I‖ + ‖O₂^m − I‖ + |ln ratio|`, minimized along the subsequence.
    pub defect: f64,
    /// `Dh_n(0)`.
    pub derivative_at_origin: Matrix,
}

impl EccentricStep {
    pub fn apply<M>(&self, mu: &M, x: &Vector) -> Vector
    where
        M: Fn(&Vector) -> Vector,
    {
        &self.outer * mu(&(&self.inner * x))
    }

    /// Chain rule with a finite-difference `Dμ` at the tiny inner point.
    pub fn derivative<M>(&self, mu: &M, x: &Vector) -> Matrix
    where
        M: Fn(&Vector) -> Vector,
    {
        &self.outer * richardson_jacobian(mu, &(&self.inner * x), tolerances::FD_STEP) * &self.inner
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EccentricSequence {
    pub steps: Vec<EccentricStep>,
    /// Positions in `steps` of the record minima of `defect`.
    pub subsequence: Vec<usize>,
    /// Largest sup-grid distance of `Dh` among the last three subsequence
    /// entries.
    pub cauchy_tail: f64,
    /// Smallest sup-grid distance between two distinct `h_n`.
    pub distinctness: f64,
    /// `Dh(0)` of the last subsequence entry.
    pub limit: Matrix,
}

/// `m_n = ⌈n ln λ₁/ln λ₂⌉`, decremented when the ratio exceeds 1.
pub fn bracket(n: usize, lambda1: f64, lambda2: f64) -> (usize, f64) {
    let r = lambda1.ln() / lambda2.ln();
    let mut m = (n as f64 * r).ceil().max(0.0) as usize;
    let ratio = |m: usize| (n as f64 * lambda1.ln() - m as f64 * lambda2.ln()).exp();
    if ratio(m) > 1.0 + 1e-12 && m > 0 {
        m -= 1;
    }
    (m, ratio(m))
}

/// Pairs `μ` with powers of two contracting similarities. `μ` must fix 0
/// with invertible derivative there.
pub fn eccentric_sequence<M>(
    mu: &M,
    g1: &ConformalDerivative,
    g2: &ConformalDerivative,
    n_max: usize,
    grid: &EvalGrid,
) -> Result<EccentricSequence>
where
    M: Fn(&Vector) -> Vector,
{
    for g in [g1, g2] {
        if !(g.lambda > 0.0 && g.lambda < 1.0) {
            return Err(Error::BracketingFailure);
        }
    }
    let dim = grid.dim();
    let zero = Vector::zeros(dim);
    let displacement = mu(&zero).norm();
    if !(displacement <= tolerances::FIXED_POINT) {
        return Err(Error::FixedPointMismatch { displacement });
    }
    let d0 = richardson_jacobian(mu, &zero, tolerances::FD_STEP);
    if !(condition_number(&d0) < 1e12) {
        return Err(Error::DerivativeSingular);
    }
    let eye = Matrix::identity(dim, dim);
    let o2_inv = g2.orthogonal.transpose();
    let mut steps = Vec::with_capacity(n_max);
    let mut o1n = eye.clone();
    for n in 1..=n_max {
        o1n = &g1.orthogonal * o1n;
        let (m, ratio) = bracket(n, g1.lambda, g2.lambda);
        let o2m_inv = o2_inv.pow(m as u32);
        let inner = &o1n * g1.lambda.powi(n as i32);
        let outer = &o2m_inv * g2.lambda.powi(-(m as i32));
        let defect = max_abs(&(&o1n - &eye)) + max_abs(&(o2m_inv.transpose() - &eye)) + ratio.ln().abs();
        let mut step = EccentricStep { n, m, ratio, inner, outer, defect, derivative_at_origin: eye.clone() };
        step.derivative_at_origin = step.derivative(mu, &zero);
        steps.push(step);
    }
    let defects: Vec<f64> = steps.iter().map(|s| s.defect).collect();
    let subsequence = record_minima(&defects, 1e-12);
    let pts = grid.points();
    let derivs: Vec<Vec<Matrix>> =
        subsequence.iter().rev().take(3).map(|&i| pts.iter().map(|x| steps[i].derivative(mu, x)).collect()).collect();
    let mut cauchy_tail = 0.0f64;
    for i in 0..derivs.len() {
        for j in 0..i {
            for (a, b) in derivs[i].iter().zip(&derivs[j]) {
                cauchy_tail = cauchy_tail.max((a - b).norm());
            }
        }
    }
    let values: Vec<Vec<Vector>> = steps.iter().map(|s| pts.iter().map(|x| s.apply(mu, x)).collect()).collect();
    let mut distinctness = f64::INFINITY;
    for i in 0..values.len() {
        for j in 0..i {
            let d = values[i].iter().zip(&values[j]).fold(0.0f64, |a, (p, q)| a.max((p - q).norm()));
            distinctness = distinctness.min(d);
        }
    }
    let limit = subsequence
        .last()
        .map(|&i| steps[i].derivative_at_origin.clone())
        .ok_or(Error::NoConvergentSubsequence { n_max })?;
    Ok(EccentricSequence { steps, subsequence, cauchy_tail, distinctness, limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::plane_rotation;
    use crate::numdiff::nonlinearity_certificate;

    fn sim(lambda: f64, angle: f64) -> ConformalDerivative {
        ConformalDerivative { lambda, orthogonal: plane_rotation(2, 0, 1, angle) }
    }

    #[test]
    fn bracketing_holds() {
        for (l1, l2) in [(0.5, 0.5), (0.3, 0.7), (0.9, 0.2), (0.5, 0.25)] {
            for n in 1..40 {
                let (_, ratio) = bracket(n, l1, l2);
                assert!(ratio >= l2 * (1.0 - 1e-12) && ratio <= 1.0 + 1e-12, "{l1} {l2} {n} {ratio}");
            }
        }
    }

    #[test]
    fn identity_mu() {
        let s =
            eccentric_sequence(&|x: &Vector| x.clone(), &sim(0.5, 0.0), &sim(0.5, 0.0), 10, &EvalGrid::unit_ball(2))
                .unwrap();
        assert!(s.steps.iter().all(|st| st.m == st.n && st.ratio == 1.0));
        assert!(s.distinctness < 1e-12);
        assert!((&s.limit - Matrix::identity(2, 2)).abs().max() < 1e-9);
    }

    #[test]
    fn linear_mu_closed_form() {
        let d = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 1.0]);
        let mu = |x: &Vector| &d * x;
        let (g1, g2) = (sim(0.5, 0.4), sim(0.3, -1.1));
        let grid = EvalGrid::unit_ball(2);
        let s = eccentric_sequence(&mu, &g1, &g2, 15, &grid).unwrap();
        for st in &s.steps {
            let closed = g2.orthogonal.transpose().pow(st.m as u32) * &d * g1.orthogonal.pow(st.n as u32) * st.ratio;
            assert!((&st.derivative_at_origin - &closed).abs().max() < 1e-8);
            let c = nonlinearity_certificate(&|x: &Vector| st.apply(&mu, x), &grid, tolerances::CERTIFICATE_STEP);
            assert!(c <= 1e-9, "{} {c}", st.n);
        }
    }

    #[test]
    fn rejects_unit_multiplier() {
        let r = eccentric_sequence(&|x: &Vector| x.clone(), &sim(0.5, 0.0), &sim(1.0, 0.0), 3, &EvalGrid::unit_ball(2));
        assert!(matches!(r, Err(Error::BracketingFailure)));
        let flat = |x: &Vector| Vector::from_column_slice(&[x[0], 0.0]);
        let r = eccentric_sequence(&flat, &sim(0.5, 0.0), &sim(0.5, 0.0), 3, &EvalGrid::unit_ball(2));
        assert!(matches!(r, Err(Error::DerivativeSingular)));
    }
}
