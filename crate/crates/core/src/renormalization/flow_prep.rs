use alloc::vec::Vec;

use crate::affine::{AffineField, EulerSequence};
use crate::conformal::{realize_based_linear, BasedLinearMap, BasedLinearRealization};
use crate::grid::EvalGrid;
use crate::linalg::{op_norm, Matrix, Vector};
use crate::tolerances;
use crate::{Error, Result};

/// `f_n = A⁻¹F'_n` where `F'_n(x) = F_n(t_n x)/t_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedMap {
    pub index: usize,
    pub t: f64,
    pub eps_scaled: Vector,
    pub m_scaled: Vector,
    /// Predicted near-identity part: linear `A⁻¹A_n − I`, translation
    /// `A⁻¹(I − A_n)ε'`.
    pub predicted: AffineField,
    realization: BasedLinearRealization,
    a_inv: Matrix,
}

impl PreparedMap {
    pub fn eval(&self, x: &Vector) -> Vector {
        &self.a_inv * self.realization.eval(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowPrep {
    pub limit_multiplier: Matrix,
    pub maps: Vec<PreparedMap>,
}

impl FlowPrep {
    /// Loads the maps into an Euler sequence, fitting their affine parts on
    /// `grid`.
    pub fn euler_sequence(&self, grid: &EvalGrid) -> Result<EulerSequence<'_>> {
        let mut s = EulerSequence::new();
        for m in &self.maps {
            s.push_map(m.index, move |x: &Vector| m.eval(x), grid)?;
        }
        Ok(s)
    }
}

/// Rescales each based linear map by `t_n = ‖ε_n‖^{3/4}‖M_n‖^{1/4}` so that
/// `1/‖M'‖ ≪ ‖ε'‖ ≪ 1`, then divides by the limit multiplier `A`
/// (the last multiplier unless given).
pub fn based_flow_prep(maps: &[(usize, BasedLinearMap)], limit: Option<Matrix>) -> Result<FlowPrep> {
    let (_, last) = maps.last().ok_or(Error::TrivialSequence)?;
    let distinct = maps.windows(2).any(|w| {
        let (a, b) = (&w[0].1, &w[1].1);
        !a.attracting.approx_eq(&b.attracting, 0.0)
            || !a.repelling.approx_eq(&b.repelling, 0.0)
            || (&a.multiplier - &b.multiplier).abs().max() > tolerances::DISTINCT
    });
    if !distinct {
        return Err(Error::TrivialSequence);
    }
    let a = limit.unwrap_or_else(|| last.multiplier.clone());
    let n = a.nrows();
    if !(op_norm(&a) < 1.0) {
        return Err(Error::InvalidInput("limit multiplier must be a contraction".into()));
    }
    let a_inv = a.clone().try_inverse().ok_or(Error::NonInvertible)?;
    let eye = Matrix::identity(n, n);
    let mut out = Vec::with_capacity(maps.len());
    for (index, f) in maps {
        let eps = f.attracting.coords().filter(|e| e.norm() > 0.0);
        let m = f.repelling.coords();
        let (Some(eps), Some(m)) = (eps, m) else {
            return Err(Error::DegeneratePoles { index: *index });
        };
        let t = eps.norm().powf(0.75) * m.norm().powf(0.25);
        let scaled = f.dilated(1.0 / t)?;
        let eps_scaled = eps / t;
        let m_scaled = m / t;
        let realization = realize_based_linear(&scaled)?;
        let predicted = AffineField {
            linear: &a_inv * &f.multiplier - &eye,
            translation: &a_inv * (&eye - &f.multiplier) * &eps_scaled,
        };
        out.push(PreparedMap { index: *index, t, eps_scaled, m_scaled, predicted, realization, a_inv: a_inv.clone() });
    }
    Ok(FlowPrep { limit_multiplier: a, maps: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::BoundaryPoint;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn based(eps: Vector, m: Vector, a: &Matrix) -> BasedLinearMap {
        BasedLinearMap {
            attracting: BoundaryPoint::finite(eps).unwrap(),
            repelling: BoundaryPoint::finite(m).unwrap(),
            multiplier: a.clone(),
        }
    }

    #[test]
    fn inverse_square_poles() {
        let a = Matrix::from_row_slice(2, 2, &[0.5, 0.1, -0.1, 0.5]);
        let maps: Vec<(usize, BasedLinearMap)> = [10usize, 20, 40, 80]
            .iter()
            .map(|&n| {
                let nf = n as f64;
                (n, based(v(&[1.0 / (nf * nf), 0.0]), v(&[0.0, nf * nf]), &a))
            })
            .collect();
        let p = based_flow_prep(&maps, None).unwrap();
        let grid = EvalGrid::unit_ball(2);
        for m in &p.maps {
            let nf = m.index as f64;
            assert!((m.t * nf - 1.0).abs() < 1e-12);
            assert!((m.eps_scaled.norm() * nf - 1.0).abs() < 1e-12);
            assert!(m.predicted.linear.abs().max() < 1e-15);
            let err = grid.sup_distance(|x| m.eval(x), |x| x + m.predicted.eval(x));
            // o(ε') remainder.
            assert!(err < 0.2 * m.eps_scaled.norm(), "{err}");
        }
        let seq = p.euler_sequence(&grid).unwrap();
        assert_eq!(seq.len(), 4);
    }

    #[test]
    fn identical_maps_are_trivial() {
        let eye = Matrix::identity(2, 2) * 0.5;
        let f = BasedLinearMap {
            attracting: BoundaryPoint::origin(2),
            repelling: BoundaryPoint::infinity(2),
            multiplier: eye,
        };
        let maps = alloc::vec![(1, f.clone()), (2, f)];
        assert!(matches!(based_flow_prep(&maps, None), Err(Error::TrivialSequence)));
    }

    #[test]
    fn alternating_zero_poles() {
        let a = Matrix::identity(2, 2) * 0.5;
        let maps: Vec<(usize, BasedLinearMap)> = (1..=4)
            .map(|n| {
                let e = if n % 2 == 0 { 0.0 } else { 1.0 / (n * n) as f64 };
                (n, based(v(&[e, 0.0]), v(&[0.0, (n * n) as f64]), &a))
            })
            .collect();
        assert!(matches!(based_flow_prep(&maps, None), Err(Error::DegeneratePoles { index: 2 })));
    }
}
