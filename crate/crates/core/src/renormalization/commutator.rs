use alloc::vec::Vec;

use super::schedule::ScheduleEntry;
use crate::affine::{fit_near_identity, AffineMap};
use crate::grid::EvalGrid;
use crate::linalg::{condition_number, Matrix, Vector};
use crate::numdiff::richardson_jacobian;
use crate::report::ConvergenceReport;
use crate::tolerances;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorStep {
    pub index: usize,
    /// `B⁻¹O⁻¹BO x + B⁻¹O⁻¹(B − I)ε'/λ`.
    pub predicted: AffineMap,
    /// Least-squares affine fit of `h_n` on the grid.
    pub fitted: AffineMap,
    /// `‖ε'‖/λ`.
    pub scale: f64,
    /// `sup ‖h_n − predicted‖ / scale`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorZoom {
    pub b: Matrix,
    pub steps: Vec<CommutatorStep>,
    pub report: ConvergenceReport,
}

/// `h_n = f_n⁻¹ ∘ g'_n⁻¹ ∘ f_n ∘ g'_n` with `f_n(x) = f(t'_n x)/t'_n`,
/// compared with its predicted affine part. `f_inv` must invert `f` near 0.
/// `b` overrides the finite-difference estimate of `Df(0)`.
pub fn commutator_zoom<F, G>(
    f: F,
    f_inv: G,
    b: Option<Matrix>,
    entries: &[ScheduleEntry],
    grid: &EvalGrid,
    threshold: f64,
) -> Result<CommutatorZoom>
where
    F: Fn(&Vector) -> Vector,
    G: Fn(&Vector) -> Vector,
{
    let n = grid.dim();
    let zero = Vector::zeros(n);
    let displacement = f(&zero).norm();
    if !(displacement <= tolerances::FIXED_POINT) {
        return Err(Error::FixedPointMismatch { displacement });
    }
    let b = b.unwrap_or_else(|| richardson_jacobian(&f, &zero, tolerances::FD_STEP));
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
    }
    if !(condition_number(&b) < 1e12) {
        return Err(Error::NonInvertible);
    }
    let b_inv = b.clone().try_inverse().ok_or(Error::NonInvertible)?;
    let eye = Matrix::identity(n, n);
    let mut steps = Vec::with_capacity(entries.len());
    for e in entries {
        let g = e.realize()?;
        let t = e.t;
        let fz = |x: &Vector| f(&(x * t)) / t;
        let fz_inv = |x: &Vector| f_inv(&(x * t)) / t;
        let h = |x: &Vector| fz_inv(&g.eval_inverse(&fz(&g.eval(x))));
        let o = &e.poles.rotation;
        let o_inv = o.transpose();
        let shift = &e.eps_scaled / e.lambda();
        let predicted =
            AffineMap { linear: &b_inv * &o_inv * &b * o, translation: &b_inv * &o_inv * (&b - &eye) * shift };
        let scale = e.commutator_scale();
        let sup = grid.sup_distance(h, |x| predicted.apply(x));
        let (field, _) = fit_near_identity(&h, grid)?;
        steps.push(CommutatorStep {
            index: e.index(),
            predicted,
            fitted: field.plus_identity(),
            scale,
            residual: sup / scale,
        });
    }
    let report = ConvergenceReport::new(
        steps.iter().map(|s| s.index).collect(),
        steps.iter().map(|s| s.residual).collect(),
        threshold,
    );
    Ok(CommutatorZoom { b, steps, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renormalization::schedule::{choose_dilation, geometric_poles, PoleData};

    fn schedule() -> Vec<ScheduleEntry> {
        let poles: Vec<PoleData> = (1..=12).map(|n| geometric_poles(2, n)).collect();
        choose_dilation(&poles).unwrap().entries
    }

    #[test]
    fn linear_b_prediction() {
        let b = Matrix::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0]));
        let bi = b.clone().try_inverse().unwrap();
        let z = commutator_zoom(
            |x: &Vector| &b * x,
            |x: &Vector| &bi * x,
            None,
            &schedule(),
            &EvalGrid::unit_ball(2),
            1e-2,
        )
        .unwrap();
        assert!(z.steps.windows(2).all(|p| p[1].residual < p[0].residual));
        assert!(z.steps.last().unwrap().residual <= 1e-2);
        // O = I, so the linear part is exactly the identity.
        for s in &z.steps {
            assert!((&s.predicted.linear - Matrix::identity(2, 2)).abs().max() < 1e-12);
            let expect = &bi
                * (&b - Matrix::identity(2, 2))
                * (&schedule()[s.index - 1].eps_scaled / 0.5f64.powi(s.index as i32));
            assert!((&s.predicted.translation - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_derivative() {
        let f = |x: &Vector| x + Vector::from_fn(2, |i, _| if i == 0 { x[1] * x[1] } else { 0.0 });
        let f_inv = |x: &Vector| x - Vector::from_fn(2, |i, _| if i == 0 { x[1] * x[1] } else { 0.0 });
        let z = commutator_zoom(f, f_inv, None, &schedule(), &EvalGrid::unit_ball(2), 1e-2).unwrap();
        for s in &z.steps {
            assert!(s.predicted.translation.norm() < 1e-9 * s.scale);
        }
        assert!(z.steps.windows(2).all(|p| p[1].residual < p[0].residual));
    }

    #[test]
    fn singular_b() {
        let f = |x: &Vector| Vector::from_column_slice(&[x[0], 0.0]);
        let r = commutator_zoom(f, f, None, &schedule(), &EvalGrid::unit_ball(2), 1e-2);
        assert!(matches!(r, Err(Error::NonInvertible)));
    }
}
