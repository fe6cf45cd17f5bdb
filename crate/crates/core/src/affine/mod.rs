//! `Aff(ℝⁿ)` and its Lie algebra, with the Euler-limit engine.

mod euler;

use alloc::vec::Vec;

use crate::grid::EvalGrid;
use crate::linalg::{condition_number, expm, log_one_plus, op_norm, Matrix, Vector};
use crate::tolerances;
use crate::{Error, Result};

pub use euler::{euler_limit, Clock, EulerEntry, EulerOptions, EulerReport, EulerRow, EulerSequence};

/// `x ↦ Bx + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix,
    pub translation: Vector,
}

/// Vector field `x ↦ Bx + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineField {
    pub linear: Matrix,
    pub translation: Vector,
}

fn embed(b: &Matrix, t: &Vector, corner: f64) -> Matrix {
    let n = t.len();
    let mut m = Matrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(b);
    m.view_mut((0, n), (n, 1)).copy_from(t);
    m[(n, n)] = corner;
    m
}

fn split(m: &Matrix) -> (Matrix, Vector) {
    let n = m.nrows() - 1;
    (m.view((0, 0), (n, n)).into_owned(), m.view((0, n), (n, 1)).column(0).into_owned())
}

impl AffineMap {
    pub fn new(linear: Matrix, translation: Vector) -> Result<Self> {
        let n = translation.len();
        if linear.nrows() != n || linear.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: linear.nrows() });
        }
        Ok(Self { linear, translation })
    }

    pub fn identity(n: usize) -> Self {
        Self { linear: Matrix::identity(n, n), translation: Vector::zeros(n) }
    }

    pub fn translation_by(b: Vector) -> Self {
        let n = b.len();
        Self { linear: Matrix::identity(n, n), translation: b }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.linear * x + &self.translation
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            linear: &self.linear * &other.linear,
            translation: &self.linear * &other.translation + &self.translation,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.linear.clone().try_inverse().ok_or(Error::NonInvertible)?;
        let translation = -(&inv * &self.translation);
        Ok(Self { linear: inv, translation })
    }

    pub fn condition(&self) -> f64 {
        condition_number(&self.linear)
    }

    pub fn homogeneous(&self) -> Matrix {
        embed(&self.linear, &self.translation, 1.0)
    }

    /// `self − id` as a field.
    pub fn minus_identity(&self) -> AffineField {
        let n = self.dim();
        AffineField { linear: &self.linear - Matrix::identity(n, n), translation: self.translation.clone() }
    }

    /// Field-norm distance `max(‖B − B'‖, ‖b − b'‖)`.
    pub fn distance(&self, other: &Self) -> f64 {
        op_norm(&(&self.linear - &other.linear)).max((&self.translation - &other.translation).norm())
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.distance(&Self::identity(self.dim())) <= tol
    }

    /// `m`-fold composition by repeated squaring.
    pub fn power(&self, m: u64) -> Self {
        let mut result = Self::identity(self.dim());
        let mut base = self.clone();
        let mut k = m;
        while k > 0 {
            if k & 1 == 1 {
                result = result.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        result
    }
}

impl AffineField {
    pub fn new(linear: Matrix, translation: Vector) -> Result<Self> {
        let n = translation.len();
        if linear.nrows() != n || linear.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: linear.nrows() });
        }
        Ok(Self { linear, translation })
    }

    pub fn zero(n: usize) -> Self {
        Self { linear: Matrix::zeros(n, n), translation: Vector::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// `max(‖B‖_op, ‖b‖)`.
    pub fn norm(&self) -> f64 {
        op_norm(&self.linear).max(self.translation.norm())
    }

    pub fn eval(&self, x: &Vector) -> Vector {
        &self.linear * x + &self.translation
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { linear: &self.linear * s, translation: &self.translation * s }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { linear: &self.linear - &other.linear, translation: &self.translation - &other.translation }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { linear: &self.linear + &other.linear, translation: &self.translation + &other.translation }
    }

    /// `id + A` as a map.
    pub fn plus_identity(&self) -> AffineMap {
        let n = self.dim();
        AffineMap { linear: &self.linear + Matrix::identity(n, n), translation: self.translation.clone() }
    }
}

/// Exponential through the block embedding `[[B, b], [0, 0]]`.
pub fn aff_exp(a: &AffineField) -> AffineMap {
    let (linear, translation) = split(&expm(&embed(&a.linear, &a.translation, 0.0)));
    AffineMap { linear, translation }
}

/// Series logarithm; requires `‖g − id‖ < 0.5` in the field norm.
pub fn aff_log(g: &AffineMap) -> Result<AffineField> {
    let x = g.minus_identity();
    let distance = x.norm();
    if !(distance < 0.5) {
        return Err(Error::OutsideLogDomain { distance });
    }
    let log = log_one_plus(&embed(&x.linear, &x.translation, 0.0)).ok_or(Error::OutsideLogDomain { distance })?;
    let (linear, translation) = split(&log);
    Ok(AffineField { linear, translation })
}

/// Outcome of [`flow_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct FlowReport {
    /// Largest field-norm defect of `φ(s+t) = φ(s)∘φ(t)` over sampled pairs.
    pub law_defect: f64,
    pub identity_defect: f64,
    /// Largest distance of a sampled `φ(t)` from the identity.
    pub displacement: f64,
    pub lawful: bool,
    pub nontrivial: bool,
}

impl FlowReport {
    pub fn passed(&self) -> bool {
        self.lawful && self.nontrivial
    }
}

/// Samples the one-parameter group law on all pairs of `ts`.
pub fn flow_check<F>(phi: F, ts: &[f64]) -> FlowReport
where
    F: Fn(f64) -> AffineMap,
{
    let zero = phi(0.0);
    let identity_defect = zero.distance(&AffineMap::identity(zero.dim()));
    let mut law_defect: f64 = 0.0;
    let mut displacement: f64 = 0.0;
    let values: Vec<AffineMap> = ts.iter().map(|&t| phi(t)).collect();
    for (i, &s) in ts.iter().enumerate() {
        displacement = displacement.max(values[i].distance(&AffineMap::identity(zero.dim())));
        for (j, &t) in ts.iter().enumerate() {
            let lhs = phi(s + t);
            let rhs = values[i].compose(&values[j]);
            law_defect = law_defect.max(lhs.distance(&rhs));
        }
    }
    FlowReport {
        law_defect,
        identity_defect,
        displacement,
        lawful: law_defect <= tolerances::FLOW && identity_defect <= tolerances::FLOW,
        nontrivial: displacement > 1e-6,
    }
}

/// Orbit of the grid under `m` steps of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateReport {
    pub points: Vec<Vector>,
    pub steps: usize,
    /// First step after which some point left the safety ball.
    pub escape: Option<usize>,
}

/// Default safety radius: `ESCAPE_FACTOR` times the grid radius.
pub fn safety_radius(grid: &EvalGrid) -> f64 {
    tolerances::ESCAPE_FACTOR * grid.radius().max(1.0)
}

/// Iterates `f` on every grid point, stopping at the first step where a
/// point leaves the ball of radius `r_max` or becomes non-finite.
pub fn iterate<F>(f: F, m: usize, grid: &EvalGrid, r_max: f64) -> IterateReport
where
    F: Fn(&Vector) -> Vector,
{
    let mut points: Vec<Vector> = grid.points().to_vec();
    for step in 1..=m {
        for p in points.iter_mut() {
            *p = f(p);
        }
        if points.iter().any(|p| !(p.norm() <= r_max)) {
            return IterateReport { points, steps: step, escape: Some(step) };
        }
    }
    IterateReport { points, steps: m, escape: None }
}

/// [`iterate`] with escape reported as an error.
pub fn iterate_checked<F>(f: F, m: usize, grid: &EvalGrid, r_max: f64) -> Result<Vec<Vector>>
where
    F: Fn(&Vector) -> Vector,
{
    let r = iterate(f, m, grid, r_max);
    match r.escape {
        Some(step) => Err(Error::DomainEscape { step }),
        None => Ok(r.points),
    }
}

/// Least-squares affine fit of `f(x) − x` on the grid, with the sup residual.
pub fn fit_near_identity<F>(f: &F, grid: &EvalGrid) -> Result<(AffineField, f64)>
where
    F: Fn(&Vector) -> Vector,
{
    let n = grid.dim();
    let pts = grid.points();
    let mut design = Matrix::zeros(pts.len(), n + 1);
    let mut targets = Matrix::zeros(pts.len(), n);
    let mut values = Vec::with_capacity(pts.len());
    for (r, x) in pts.iter().enumerate() {
        for c in 0..n {
            design[(r, c)] = x[c];
        }
        design[(r, n)] = 1.0;
        let d = f(x) - x;
        for c in 0..n {
            targets[(r, c)] = d[c];
        }
        values.push(d);
    }
    let coef =
        crate::linalg::least_squares(&design, &targets).ok_or(Error::NumericalDegeneracy("affine fit failed"))?;
    let linear = coef.view((0, 0), (n, n)).transpose();
    let translation = coef.row(n).transpose();
    let field = AffineField { linear, translation };
    let residual = pts.iter().zip(&values).fold(0.0, |acc: f64, (x, d)| acc.max((d - field.eval(x)).norm()));
    Ok((field, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn exp_examples() {
        let z = aff_exp(&AffineField::zero(3));
        assert!(z.is_identity(0.0));
        let t = aff_exp(&AffineField { linear: Matrix::zeros(2, 2), translation: v(&[1.5, -2.0]) });
        assert!(t.distance(&AffineMap::translation_by(v(&[1.5, -2.0]))) < 1e-15);
        let d = aff_exp(&AffineField { linear: Matrix::identity(2, 2) * LN_2, translation: v(&[0.0, 0.0]) });
        assert!((d.linear - Matrix::identity(2, 2) * 2.0).abs().max() < 1e-14);
    }

    #[test]
    fn log_roundtrip_and_domain() {
        let a = AffineField {
            linear: Matrix::from_row_slice(2, 2, &[0.1, 0.2, -0.15, 0.05]),
            translation: v(&[0.2, -0.1]),
        };
        let back = aff_log(&aff_exp(&a)).unwrap();
        assert!(back.sub(&a).norm() < 1e-12);
        let far = AffineMap::translation_by(v(&[0.6, 0.0]));
        assert!(matches!(aff_log(&far), Err(Error::OutsideLogDomain { .. })));
    }

    #[test]
    fn flow_check_examples() {
        let a =
            AffineField { linear: Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]), translation: v(&[1.0, 0.0]) };
        let ts = [0.0, 0.5, 1.0, 1.5];
        let r = flow_check(|t| aff_exp(&a.scale(t)), &ts);
        assert!(r.passed(), "{r:?}");
        let r = flow_check(|_| AffineMap::identity(2), &ts);
        assert!(r.lawful && !r.nontrivial);
    }

    #[test]
    fn iterate_escape() {
        let grid = EvalGrid::unit_ball(2);
        let r = iterate(|x: &Vector| x * 2.0, 10, &grid, 100.0);
        assert_eq!(r.escape, Some(7));
        let r = iterate(|x: &Vector| x.clone(), 25, &grid, 100.0);
        assert_eq!(r.escape, None);
        assert_eq!(r.points, grid.points().to_vec());
        assert!(matches!(
            iterate_checked(|x: &Vector| x * 2.0, 10, &grid, 100.0),
            Err(Error::DomainEscape { step: 7 })
        ));
    }

    #[test]
    fn fit_recovers_affine() {
        let grid = EvalGrid::unit_ball(3);
        let a = AffineField { linear: Matrix::identity(3, 3) * 0.01, translation: v(&[0.0, 0.02, 0.0]) };
        let (fit, res) = fit_near_identity(&|x: &Vector| x + a.eval(x), &grid).unwrap();
        assert!(fit.sub(&a).norm() < 1e-14);
        assert!(res < 1e-14);
    }
}
