use crate::conformal::{based_normalizer, BoundaryPoint, MoebiusMap};
use crate::grid::EvalGrid;
use crate::linalg::{Matrix, Vector};
use crate::numdiff::nonlinearity_certificate;
use crate::tolerances;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearityReport {
    pub is_linear: bool,
    /// Largest second difference `‖μ(x+h) + μ(x−h) − 2μ(x)‖/‖h‖²` on the grid.
    pub nonlinearity: f64,
    pub step: f64,
    /// `|μ(0)|`.
    pub origin_defect: f64,
}

/// `φ = S⁻¹` for the normalizer with `S(0) = p`, `S(∞) = q`: a conformal
/// chart sending `p ↦ 0` and `q ↦ ∞`, nonlinear as soon as `q` is finite.
pub fn inversion_chart(p: &Vector, q: &Vector) -> Result<MoebiusMap> {
    let s = based_normalizer(&BoundaryPoint::finite(p.clone())?, &BoundaryPoint::finite(q.clone())?)?;
    Ok(s.inverse())
}

fn apply_linear(a: &Matrix, x: &BoundaryPoint) -> Result<BoundaryPoint> {
    match x.coords() {
        None => Ok(BoundaryPoint::infinity(a.nrows())),
        Some(v) => BoundaryPoint::finite(a * v),
    }
}

fn mu_point(a: &Matrix, phi1_inv: &MoebiusMap, phi2: &MoebiusMap, x: &BoundaryPoint) -> Result<BoundaryPoint> {
    phi2.apply(&apply_linear(a, &phi1_inv.apply(x)?)?)
}

/// `μ = φ₂ A φ₁⁻¹` in the chart; infinite entries where `μ(x) = ∞`.
pub fn conjugated_linear<'a>(
    a: &'a Matrix,
    phi1: &MoebiusMap,
    phi2: &'a MoebiusMap,
) -> impl Fn(&Vector) -> Vector + 'a {
    let phi1_inv = phi1.inverse();
    move |x: &Vector| {
        let image = BoundaryPoint::finite(x.clone()).and_then(|p| mu_point(a, &phi1_inv, phi2, &p));
        match image.as_ref().ok().and_then(|p| p.coords()) {
            Some(y) => y.clone(),
            None => Vector::from_element(x.len(), f64::INFINITY),
        }
    }
}

/// Decides whether `μ = φ₂ A φ₁⁻¹` is linear near the grid by its
/// second-difference certificate.
pub fn nonlinear_mu_check(
    a: &Matrix,
    phi1: &MoebiusMap,
    phi2: &MoebiusMap,
    grid: &EvalGrid,
) -> Result<NonlinearityReport> {
    let n = grid.dim();
    for d in [a.nrows(), a.ncols(), phi1.dim(), phi2.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    let phi1_inv = phi1.inverse();
    let origin = mu_point(a, &phi1_inv, phi2, &BoundaryPoint::origin(n))?;
    let origin_defect = origin.coords().map_or(f64::INFINITY, |y| y.norm());
    if !(origin_defect <= tolerances::FIXED_POINT) {
        return Err(Error::FixedPointMismatch { displacement: origin_defect });
    }
    let infinity = mu_point(a, &phi1_inv, phi2, &BoundaryPoint::infinity(n))?;
    if !infinity.is_infinity() {
        let displacement = infinity.chordal_distance(&BoundaryPoint::infinity(n));
        if displacement > tolerances::FIXED_POINT {
            return Err(Error::FixedPointMismatch { displacement });
        }
    }
    // φ₁⁻¹ blows up at φ₁(∞); the chart arithmetic loses everything near it.
    let step = tolerances::CERTIFICATE_STEP;
    if let Some(s) = phi1.apply(&BoundaryPoint::infinity(n))?.coords() {
        let margin = 4.0 * step + 1e-6 * (1.0 + s.norm());
        if grid.points().iter().any(|x| (x - s).norm() <= margin) {
            return Err(Error::PoleOnGrid);
        }
    }
    let mu = conjugated_linear(a, phi1, phi2);
    let nonlinearity = nonlinearity_certificate(&mu, grid, step);
    if !nonlinearity.is_finite() {
        return Err(Error::PoleOnGrid);
    }
    Ok(NonlinearityReport { is_linear: nonlinearity <= tolerances::LINEARITY, nonlinearity, step, origin_defect })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn charts(a: &Matrix) -> (MoebiusMap, MoebiusMap) {
        let (p, q) = (v(&[0.6, 0.3, -0.2]), v(&[2.5, -1.0, 1.5]));
        (inversion_chart(&p, &q).unwrap(), inversion_chart(&(a * &p), &(a * &q)).unwrap())
    }

    #[test]
    fn identity_charts_give_a() {
        let a = Matrix::from_diagonal(&v(&[2.0, 1.0, 1.0]));
        let id = MoebiusMap::identity(3);
        let grid = EvalGrid::unit_ball(3);
        let r = nonlinear_mu_check(&a, &id, &id, &grid).unwrap();
        assert!(r.is_linear, "{}", r.nonlinearity);
        let mu = conjugated_linear(&a, &id, &id);
        assert!(grid.sup_distance(&mu, |x| &a * x) < 1e-12);
    }

    #[test]
    fn nonconformal_a_is_not_linear() {
        let a = Matrix::from_diagonal(&v(&[2.0, 1.0, 1.0]));
        let (p1, p2) = charts(&a);
        let r = nonlinear_mu_check(&a, &p1, &p2, &EvalGrid::unit_ball(3)).unwrap();
        assert!(!r.is_linear && r.nonlinearity > 1e-3, "{}", r.nonlinearity);
    }

    #[test]
    fn conformal_a_survives() {
        let a = Matrix::identity(3, 3) * 2.0;
        let (p1, p2) = charts(&a);
        let r = nonlinear_mu_check(&a, &p1, &p2, &EvalGrid::unit_ball(3)).unwrap();
        assert!(r.is_linear, "{}", r.nonlinearity);
    }

    #[test]
    fn pole_and_fixed_point_errors() {
        let a = Matrix::from_diagonal(&v(&[2.0, 1.0, 1.0]));
        let grid = EvalGrid::unit_ball(3);
        // φ₁(∞) = p − q sits inside the unit ball.
        let (p, q) = (v(&[0.1, 0.0, 0.0]), v(&[-0.2, 0.1, 0.0]));
        let p1 = inversion_chart(&p, &q).unwrap();
        let p2 = inversion_chart(&(&a * &p), &(&a * &q)).unwrap();
        let grid_hit = EvalGrid::from_points(alloc::vec![v(&[0.0, 0.0, 0.0]), &p - &q]);
        assert!(matches!(nonlinear_mu_check(&a, &p1, &p2, &grid_hit), Err(Error::PoleOnGrid)));
        let id = MoebiusMap::identity(3);
        assert!(matches!(nonlinear_mu_check(&a, &p1, &id, &grid), Err(Error::FixedPointMismatch { .. })));
    }
}
