use super::moebius::MoebiusMap;
use super::point::BoundaryPoint;
use crate::linalg::{condition_number, Matrix, Vector};
use crate::{Error, Result};

/// Normalizer `S` with `S(0) = ε`, `S(∞) = M` and `DS(0) = I`.
///
/// With `q = (ε − M)/|ε − M|²` (zero when `M = ∞`),
/// `S(x) = ε + (x − |x|²q) / (1 − 2⟨x,q⟩ + |x|²|q|²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedFrame {
    eps: Vector,
    q: Vector,
    repelling: BoundaryPoint,
}

impl BasedFrame {
    pub fn new(attracting: &BoundaryPoint, repelling: &BoundaryPoint) -> Result<Self> {
        if attracting.dim() != repelling.dim() {
            return Err(Error::DimensionMismatch { expected: attracting.dim(), found: repelling.dim() });
        }
        let eps = attracting.coords_or_err()?.clone();
        let q = match repelling.coords() {
            None => Vector::zeros(eps.len()),
            Some(m) => {
                let p = &eps - m;
                let d = p.norm_squared();
                if d == 0.0 || !d.is_finite() {
                    return Err(Error::CoincidentPoints);
                }
                p / d
            }
        };
        Ok(Self { eps, q, repelling: repelling.clone() })
    }

    pub fn dim(&self) -> usize {
        self.eps.len()
    }

    pub fn attracting(&self) -> &Vector {
        &self.eps
    }

    pub fn repelling(&self) -> &BoundaryPoint {
        &self.repelling
    }

    /// `S(x)`; entries are infinite when `x` is the preimage of `∞`.
    pub fn forward(&self, x: &Vector) -> Vector {
        let r2 = x.norm_squared();
        let den = 1.0 - 2.0 * x.dot(&self.q) + r2 * self.q.norm_squared();
        if den <= 0.0 || !den.is_finite() {
            return Vector::from_element(x.len(), f64::INFINITY);
        }
        &self.eps + (x - &self.q * r2) / den
    }

    /// `S⁻¹(w)`.
    pub fn backward(&self, w: &Vector) -> Vector {
        let d = w - &self.eps;
        let r2 = d.norm_squared();
        let den = 1.0 + 2.0 * d.dot(&self.q) + r2 * self.q.norm_squared();
        if den <= 0.0 || !den.is_finite() {
            return Vector::from_element(w.len(), f64::INFINITY);
        }
        (d + &self.q * r2) / den
    }

    pub fn forward_point(&self, x: &BoundaryPoint) -> Result<BoundaryPoint> {
        match x.coords() {
            None => Ok(self.repelling.clone()),
            Some(v) => point_or_infinity(self.forward(v)),
        }
    }

    pub fn backward_point(&self, w: &BoundaryPoint) -> Result<BoundaryPoint> {
        let n = self.dim();
        match w.coords() {
            None => {
                if self.q.norm_squared() == 0.0 {
                    Ok(BoundaryPoint::infinity(n))
                } else {
                    BoundaryPoint::finite(&self.q / self.q.norm_squared())
                }
            }
            Some(v) => {
                if w.approx_eq(&self.repelling, 0.0) {
                    return Ok(BoundaryPoint::infinity(n));
                }
                point_or_infinity(self.backward(v))
            }
        }
    }

    /// `S` as a Lorentz matrix, `T_ε ∘ ι ∘ T_{−q} ∘ ι`.
    pub fn to_moebius(&self) -> Result<MoebiusMap> {
        let n = self.dim();
        let inv = MoebiusMap::unit_inversion(n);
        MoebiusMap::translation(&self.eps).compose(&inv)?.compose(&MoebiusMap::translation(&-&self.q))?.compose(&inv)
    }
}

fn point_or_infinity(v: Vector) -> Result<BoundaryPoint> {
    if v.iter().any(|x| !x.is_finite()) {
        Ok(BoundaryPoint::infinity(v.len()))
    } else {
        BoundaryPoint::finite(v)
    }
}

/// `S_{ε,M}` as a Lorentz matrix.
pub fn based_normalizer(attracting: &BoundaryPoint, repelling: &BoundaryPoint) -> Result<MoebiusMap> {
    BasedFrame::new(attracting, repelling)?.to_moebius()
}

/// Data of the map `S A S⁻¹` where `S` is the normalizer at `(ε, M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedLinearMap {
    pub attracting: BoundaryPoint,
    pub repelling: BoundaryPoint,
    pub multiplier: Matrix,
}

impl BasedLinearMap {
    /// Conjugate by `x ↦ s x`: poles are scaled by `s`, the multiplier is unchanged.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        let scale = |p: &BoundaryPoint| match p.coords() {
            Some(x) => BoundaryPoint::finite(x * s),
            None => Ok(p.clone()),
        };
        Ok(Self {
            attracting: scale(&self.attracting)?,
            repelling: scale(&self.repelling)?,
            multiplier: self.multiplier.clone(),
        })
    }
}

/// Chart evaluator for a based linear map.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedLinearRealization {
    frame: BasedFrame,
    multiplier: Matrix,
    inverse_multiplier: Matrix,
    condition: f64,
}

impl BasedLinearRealization {
    pub fn frame(&self) -> &BasedFrame {
        &self.frame
    }

    pub fn multiplier(&self) -> &Matrix {
        &self.multiplier
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn eval(&self, x: &Vector) -> Vector {
        self.frame.forward(&(&self.multiplier * self.frame.backward(x)))
    }

    pub fn eval_inverse(&self, x: &Vector) -> Vector {
        self.frame.forward(&(&self.inverse_multiplier * self.frame.backward(x)))
    }

    /// Preimage of `∞`, when finite.
    pub fn pole(&self) -> Option<Vector> {
        let n = self.frame.dim();
        let w = self.frame.backward_point(&BoundaryPoint::infinity(n)).ok()?;
        let y = self.frame.forward(&(&self.inverse_multiplier * w.coords()?));
        y.iter().all(|v| v.is_finite()).then_some(y)
    }

    /// Lorentz matrix of the map when the multiplier is conformal.
    pub fn to_moebius(&self) -> Result<MoebiusMap> {
        let n = self.frame.dim();
        let det = self.multiplier.determinant();
        let lambda = det.abs().powf(1.0 / n as f64);
        let o = &self.multiplier / lambda;
        let a = MoebiusMap::similarity(lambda, &o, &Vector::zeros(n))?;
        let s = self.frame.to_moebius()?;
        s.compose(&a)?.compose(&s.inverse())
    }
}

/// Evaluator for `S A S⁻¹`; fails if `A` is numerically singular.
pub fn realize_based_linear(map: &BasedLinearMap) -> Result<BasedLinearRealization> {
    let n = map.multiplier.nrows();
    if map.multiplier.ncols() != n || map.attracting.dim() != n {
        return Err(Error::DimensionMismatch { expected: map.attracting.dim(), found: n });
    }
    let frame = BasedFrame::new(&map.attracting, &map.repelling)?;
    let condition = condition_number(&map.multiplier);
    if !(condition < 1e12) {
        return Err(Error::SingularMultiplier { condition });
    }
    let inverse_multiplier = map.multiplier.clone().try_inverse().ok_or(Error::SingularMultiplier { condition })?;
    Ok(BasedLinearRealization { frame, multiplier: map.multiplier.clone(), inverse_multiplier, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::plane_rotation;
    use crate::numdiff::richardson_jacobian;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn normalizer_example() {
        let eps = BoundaryPoint::from_slice(&[1.0, 0.0]).unwrap();
        let m = BoundaryPoint::infinity(2);
        let s = based_normalizer(&eps, &m).unwrap();
        let y = s.apply_vec(&v(&[0.0, 0.0])).unwrap();
        assert!((y - v(&[1.0, 0.0])).norm() < 1e-15);
        assert!(s.apply(&m).unwrap().is_infinity());
    }

    #[test]
    fn frame_matches_matrix() {
        let eps = BoundaryPoint::from_slice(&[0.2, -0.4, 1.0]).unwrap();
        let m = BoundaryPoint::from_slice(&[3.0, 1.0, -2.0]).unwrap();
        let f = BasedFrame::new(&eps, &m).unwrap();
        let s = f.to_moebius().unwrap();
        for x in [v(&[0.1, 0.2, 0.3]), v(&[-1.0, 0.5, 2.0]), v(&[5.0, 5.0, 5.0])] {
            let a = f.forward(&x);
            let b = s.apply_vec(&x).unwrap();
            assert!((&a - &b).norm() < 1e-12 * (1.0 + a.norm()));
            assert!((f.backward(&a) - &x).norm() < 1e-12 * (1.0 + x.norm()));
        }
        assert!((f.forward(&Vector::zeros(3)) - eps.coords().unwrap()).norm() < 1e-15);
        assert!(f.forward_point(&BoundaryPoint::infinity(3)).unwrap().approx_eq(&m, 0.0));
        let d = richardson_jacobian(&|x: &Vector| f.forward(x), &Vector::zeros(3), 1e-4);
        assert!((d - Matrix::identity(3, 3)).abs().max() < 1e-9);
    }

    #[test]
    fn based_linear_fixes_poles() {
        let eps = BoundaryPoint::from_slice(&[0.5, 0.5]).unwrap();
        let m = BoundaryPoint::from_slice(&[-1.0, 2.0]).unwrap();
        let a = plane_rotation(2, 0, 1, 0.4) * 0.3;
        let b = BasedLinearMap { attracting: eps.clone(), repelling: m.clone(), multiplier: a.clone() };
        let r = realize_based_linear(&b).unwrap();
        let e = eps.coords().unwrap();
        assert!((r.eval(e) - e).norm() < 1e-14);
        let d = richardson_jacobian(&|x: &Vector| r.eval(x), e, 1e-4);
        assert!((d - &a).abs().max() < 1e-8);
        let g = r.to_moebius().unwrap();
        let x = v(&[0.1, -0.3]);
        assert!((g.apply_vec(&x).unwrap() - r.eval(&x)).norm() < 1e-12);
        assert!((r.eval_inverse(&r.eval(&x)) - x).norm() < 1e-12);
    }

    #[test]
    fn singular_multiplier_rejected() {
        let b = BasedLinearMap {
            attracting: BoundaryPoint::origin(2),
            repelling: BoundaryPoint::infinity(2),
            multiplier: Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        };
        assert!(matches!(realize_based_linear(&b), Err(Error::SingularMultiplier { .. })));
    }

    #[test]
    fn coincident_poles_rejected() {
        let p = BoundaryPoint::from_slice(&[1.0, 1.0]).unwrap();
        assert!(matches!(BasedFrame::new(&p, &p), Err(Error::CoincidentPoints)));
    }
}
