use alloc::vec::Vec;

use crate::conformal::{classify, BasedFrame, BasedLinearMap, MoebiusMap};
use crate::grid::EvalGrid;
use crate::linalg::{max_abs, Matrix, Vector};
use crate::numdiff::richardson_jacobian;
use crate::report::{record_minima, ConvergenceReport, Verdict};
use crate::tolerances;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ZoomOptions {
    pub n_max: usize,
    pub grid: EvalGrid,
    pub threshold: f64,
    /// `Df(ε)` when known in closed form; finite differences otherwise.
    pub multiplier: Option<Matrix>,
}

impl ZoomOptions {
    pub fn new(n_max: usize, dim: usize) -> Self {
        Self { n_max, grid: EvalGrid::unit_ball(dim), threshold: 1e-6, multiplier: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoomResult {
    pub limit: BasedLinearMap,
    /// Errors along the selected subsequence.
    pub report: ConvergenceReport,
    /// `‖Oⁿ − I‖` for `n = 1..=n_max`.
    pub rotation_defects: Vec<f64>,
    /// Errors for every `n = 1..=n_max`.
    pub all_errors: Vec<f64>,
    /// Expansion factor of the zooming map at `ε`.
    pub lambda: f64,
}

/// Conjugates `f` by powers of the loxodromic `t` about the pole of `t` that
/// `f` fixes, and compares with the based linear map there.
///
/// Both poles are tried (attracting first). Whichever of `t`, `t⁻¹` expands
/// at `ε` is used, so the powers zoom in on `ε`. Errors are measured in the
/// chart normalized by `S_{ε,M}`, where the limit is `x ↦ Df(ε)x`.
pub fn zoom_at_fixed_point<F>(f: F, t: &MoebiusMap, options: &ZoomOptions) -> Result<ZoomResult>
where
    F: Fn(&Vector) -> Vector,
{
    let n = t.dim();
    let class = classify(t)?;
    let data = class.loxodromic().ok_or(Error::InvalidInput("zooming map must be loxodromic".into()))?;
    let mut best: Option<f64> = None;
    let mut chosen = None;
    for (e, m) in [(&data.attracting, &data.repelling), (&data.repelling, &data.attracting)] {
        let Some(x) = e.coords() else { continue };
        let d = (f(x) - x).norm();
        let d = if d.is_finite() { d } else { f64::INFINITY };
        best = Some(best.map_or(d, |b: f64| b.min(d)));
        if d <= tolerances::FIXED_POINT {
            chosen = Some((e.clone(), m.clone()));
            break;
        }
    }
    let (eps, pole_m) = match chosen {
        Some(c) => c,
        None => match best {
            Some(displacement) => return Err(Error::FixedPointMismatch { displacement }),
            None => return Err(Error::PoleAtInfinity),
        },
    };
    let e = eps.coords().expect("finite").clone();
    let forward = t.derivative_at(&e)?;
    let zoom = if forward.lambda > 1.0 { forward } else { t.inverse().derivative_at(&e)? };
    if !(zoom.lambda > 1.0) {
        return Err(Error::NumericalDegeneracy("no expansion at the fixed point"));
    }
    let frame = BasedFrame::new(&eps, &pole_m)?;
    let normalized = |x: &Vector| frame.backward(&f(&frame.forward(x)));
    let a = match &options.multiplier {
        Some(a) => {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
            }
            a.clone()
        }
        None => richardson_jacobian(&f, &e, tolerances::FD_STEP),
    };
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalDegeneracy("f is not differentiable at the fixed point"));
    }
    let o = &zoom.orthogonal;
    let o_inv = o.transpose();
    let eye = Matrix::identity(n, n);
    let mut on = eye.clone();
    let mut on_inv = eye.clone();
    let mut scale = 1.0;
    let mut rotation_defects = Vec::with_capacity(options.n_max);
    let mut all_errors = Vec::with_capacity(options.n_max);
    for _ in 1..=options.n_max {
        on = o * on;
        on_inv = &on_inv * &o_inv;
        scale *= zoom.lambda;
        rotation_defects.push(max_abs(&(&on - &eye)));
        let conj = |x: &Vector| &on * normalized(&(&on_inv * x / scale)) * scale;
        all_errors.push(options.grid.sup_distance(conj, |x| &a * x));
    }
    let picks = record_minima(&rotation_defects, 1e-12);
    let indices: Vec<usize> = picks.iter().map(|i| i + 1).collect();
    let errors: Vec<f64> = picks.iter().map(|&i| all_errors[i]).collect();
    let report = ConvergenceReport::new(indices, errors, options.threshold);
    if report.indices.len() < 2 || report.verdict == Verdict::Diverged {
        return Err(Error::NoConvergentSubsequence { n_max: options.n_max });
    }
    let limit = BasedLinearMap { attracting: eps, repelling: pole_m, multiplier: a };
    Ok(ZoomResult { limit, report, rotation_defects, all_errors, lambda: zoom.lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::BoundaryPoint;
    use crate::linalg::plane_rotation;

    fn a2() -> Matrix {
        Matrix::from_row_slice(2, 2, &[1.5, 0.3, -0.2, 0.8])
    }

    #[test]
    fn linear_f_is_exact() {
        let a = a2();
        let t = MoebiusMap::dilation(2, 2.0).unwrap();
        let r = zoom_at_fixed_point(|x: &Vector| &a * x, &t, &ZoomOptions::new(10, 2)).unwrap();
        assert!(r.all_errors.iter().all(|e| *e < 1e-9));
        assert!((&r.limit.multiplier - &a).abs().max() < 1e-9);
        assert!(r.limit.attracting.coords().unwrap().norm() == 0.0);
    }

    #[test]
    fn quadratic_perturbation_halves() {
        let a = a2();
        let t = MoebiusMap::dilation(2, 2.0).unwrap();
        let mut opts = ZoomOptions::new(25, 2);
        opts.multiplier = Some(a.clone());
        let r = zoom_at_fixed_point(|x: &Vector| &a * x + x * x.norm(), &t, &opts).unwrap();
        for p in r.all_errors.windows(2) {
            assert!((p[1] / p[0] - 0.5).abs() < 1e-6);
        }
        assert!(r.report.is_converged());
        assert!(r.all_errors[24] <= 1e-6);
    }

    #[test]
    fn rotation_subsequence() {
        let o = plane_rotation(2, 0, 1, core::f64::consts::PI / 3.0);
        let t = MoebiusMap::similarity(2.0, &o, &Vector::zeros(2)).unwrap();
        let r = zoom_at_fixed_point(|x: &Vector| x.clone(), &t, &ZoomOptions::new(12, 2)).unwrap();
        // O⁵ = O⁻¹ ties with O.
        assert_eq!(r.report.indices, alloc::vec![1, 5, 6, 12]);
        assert!(r.report.errors.iter().all(|e| *e < 1e-12));
    }

    #[test]
    fn finite_pole_pair() {
        // Loxodromic with poles (0.2, 0.1) and (3, −1); f is conjugate to a linear map.
        let eps = BoundaryPoint::from_slice(&[0.2, 0.1]).unwrap();
        let m = BoundaryPoint::from_slice(&[3.0, -1.0]).unwrap();
        let frame = BasedFrame::new(&eps, &m).unwrap();
        let s = frame.to_moebius().unwrap();
        let t = MoebiusMap::dilation(2, 0.5).unwrap().conjugate_by(&s).unwrap();
        let a = a2();
        let f = |x: &Vector| frame.forward(&(&a * frame.backward(x)));
        let r = zoom_at_fixed_point(f, &t, &ZoomOptions::new(8, 2)).unwrap();
        assert!((&r.limit.multiplier - &a).abs().max() < 1e-8);
        assert!(r.all_errors[7] < 1e-6);
    }

    #[test]
    fn not_a_fixed_point() {
        let t = MoebiusMap::dilation(2, 2.0).unwrap();
        let shift = Vector::from_column_slice(&[1.0, 0.0]);
        let r = zoom_at_fixed_point(|x: &Vector| x + &shift, &t, &ZoomOptions::new(5, 2));
        assert!(matches!(r, Err(Error::FixedPointMismatch { .. })));
    }
}
