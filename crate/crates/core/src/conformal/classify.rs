use super::frame::{BasedLinearMap, BasedLinearRealization};
use super::moebius::{ConformalDerivative, MoebiusMap};
use super::point::BoundaryPoint;
use crate::linalg::{lorentz_form, max_abs, Matrix, Vector};
use crate::tolerances;
use crate::{Error, Result};

/// Attracting fixed point `ε`, repelling fixed point `M`, translation length
/// `l` and derivative at `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoxodromicData {
    pub attracting: BoundaryPoint,
    pub repelling: BoundaryPoint,
    pub length: f64,
    pub multiplier: ConformalDerivative,
}

impl LoxodromicData {
    /// Based linear map at `(ε, M)` with multiplier `λO`.
    pub fn based_linear(&self) -> BasedLinearMap {
        BasedLinearMap {
            attracting: self.attracting.clone(),
            repelling: self.repelling.clone(),
            multiplier: self.multiplier.matrix(),
        }
    }

    pub fn realize(&self) -> Result<BasedLinearRealization> {
        super::frame::realize_based_linear(&self.based_linear())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Identity,
    Elliptic { angle: f64 },
    Parabolic,
    Loxodromic(LoxodromicData),
}

impl Classification {
    pub fn loxodromic(&self) -> Option<&LoxodromicData> {
        match self {
            Classification::Loxodromic(d) => Some(d),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Classification::Identity => "identity",
            Classification::Elliptic { .. } => "elliptic",
            Classification::Parabolic => "parabolic",
            Classification::Loxodromic(_) => "loxodromic",
        }
    }
}

/// Right singular vector of the smallest singular value.
fn near_kernel(m: &Matrix) -> Vector {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (idx, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if *v < bv { (i, *v) } else { (bi, bv) });
    vt.row(idx).transpose()
}

fn pole_from(v: Vector) -> Result<BoundaryPoint> {
    let last = v.len() - 1;
    let v = if v[last] < 0.0 { -v } else { v };
    BoundaryPoint::from_null(&v, 1e-10)
}

/// Derivative at a fixed point, conjugating by the unit inversion when the
/// point is `∞`.
fn multiplier_at(g: &MoebiusMap, p: &BoundaryPoint) -> Result<ConformalDerivative> {
    match p.coords() {
        Some(x) => g.derivative_at(x),
        None => {
            let inv = MoebiusMap::unit_inversion(g.dim());
            let h = inv.compose(g)?.compose(&inv)?;
            h.derivative_at(&Vector::zeros(g.dim()))
        }
    }
}

enum KernelSignature {
    Empty,
    Timelike,
    Null,
    Spacelike,
}

/// Signature of the Lorentz form restricted to the numerical fixed subspace
/// of `M`.
fn kernel_signature(m: &Matrix) -> KernelSignature {
    let size = m.nrows();
    let diff = m - Matrix::identity(size, size);
    let svd = diff.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let scale = max_abs(m).max(1.0);
    let rows: alloc::vec::Vec<usize> =
        svd.singular_values.iter().enumerate().filter(|(_, s)| **s <= 1e-7 * scale).map(|(i, _)| i).collect();
    if rows.is_empty() {
        return KernelSignature::Empty;
    }
    let mut k = Matrix::zeros(size, rows.len());
    for (c, r) in rows.iter().enumerate() {
        k.set_column(c, &vt.row(*r).transpose());
    }
    let gram = k.transpose() * lorentz_form(size) * &k;
    let gram = (&gram + gram.transpose()) * 0.5;
    let min = gram.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a: f64, x| a.min(*x));
    if min < -1e-10 {
        KernelSignature::Timelike
    } else if min <= 1e-10 {
        KernelSignature::Null
    } else {
        KernelSignature::Spacelike
    }
}

fn loxodromic_data(g: &MoebiusMap, length: f64) -> Result<LoxodromicData> {
    let m = g.matrix();
    let size = m.nrows();
    let rho = length.exp();
    let eye = Matrix::identity(size, size);
    let attracting = pole_from(near_kernel(&(m - &eye * rho)))?;
    let repelling = pole_from(near_kernel(&(g.inverse().matrix() - &eye * rho)))?;
    let separation = attracting.chordal_distance(&repelling);
    if length < tolerances::LOXODROMIC_AMBIGUOUS && separation < 1e-4 {
        return Err(Error::AmbiguousClassification { length, separation });
    }
    if separation == 0.0 {
        return Err(Error::AmbiguousClassification { length, separation });
    }
    let multiplier = multiplier_at(g, &attracting)?;
    Ok(LoxodromicData { attracting, repelling, length, multiplier })
}

/// Classifies a Möbius map as identity, elliptic, parabolic or loxodromic.
pub fn classify(g: &MoebiusMap) -> Result<Classification> {
    if g.is_identity(tolerances::COMPOSE) {
        return Ok(Classification::Identity);
    }
    let m = g.matrix();
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::NumericalDegeneracy("eigenvalue iteration did not converge"))?;
    let eig = schur.complex_eigenvalues();
    let rho = eig.iter().fold(0.0, |a: f64, z| a.max(z.re.hypot(z.im)));
    let length = rho.ln().max(0.0);
    if length >= tolerances::LOXODROMIC_AMBIGUOUS {
        return loxodromic_data(g, length).map(Classification::Loxodromic);
    }
    match kernel_signature(m) {
        KernelSignature::Timelike => {
            let angle = eig.iter().fold(0.0, |a: f64, z| a.max(z.im.atan2(z.re).abs()));
            Ok(Classification::Elliptic { angle })
        }
        KernelSignature::Null => Ok(Classification::Parabolic),
        KernelSignature::Spacelike | KernelSignature::Empty => {
            if length >= tolerances::LOXODROMIC {
                loxodromic_data(g, length).map(Classification::Loxodromic)
            } else {
                Err(Error::AmbiguousClassification { length, separation: 0.0 })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::plane_rotation;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn dilation_example() {
        let g = MoebiusMap::similarity(2.0, &Matrix::identity(2, 2), &v(&[0.0, 0.0])).unwrap();
        let c = classify(&g).unwrap();
        let d = c.loxodromic().unwrap();
        assert!(d.attracting.is_infinity());
        assert!(d.repelling.coords().unwrap().norm() < 1e-12);
        assert!((d.length - 2f64.ln()).abs() < 1e-12);
        assert!((d.multiplier.lambda - 0.5).abs() < 1e-12);
    }

    #[test]
    fn contraction_with_rotation() {
        let o = plane_rotation(3, 0, 1, 0.7);
        let b = v(&[0.3, -0.2, 0.5]);
        let g = MoebiusMap::similarity(0.5, &o, &b).unwrap();
        let d = classify(&g).unwrap().loxodromic().unwrap().clone();
        assert!(d.repelling.is_infinity());
        let eps = d.attracting.coords().unwrap();
        let fixed = (Matrix::identity(3, 3) - &o * 0.5).try_inverse().unwrap() * &b;
        assert!((eps - fixed).norm() < 1e-10);
        assert!((d.multiplier.lambda - 0.5).abs() < 1e-10);
        assert!((&d.multiplier.orthogonal - o).abs().max() < 1e-10);
    }

    #[test]
    fn elliptic_and_parabolic() {
        let r = MoebiusMap::orthogonal(&plane_rotation(2, 0, 1, 1.0)).unwrap();
        match classify(&r).unwrap() {
            Classification::Elliptic { angle } => assert!((angle - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let t = MoebiusMap::translation(&v(&[1.0, 0.0]));
        assert_eq!(classify(&t).unwrap(), Classification::Parabolic);
        let id = MoebiusMap::identity(2);
        assert_eq!(classify(&id).unwrap(), Classification::Identity);
    }

    #[test]
    fn reflection_is_elliptic_with_angle_pi() {
        let r = MoebiusMap::hyperplane_reflection(&v(&[0.0, 1.0])).unwrap();
        match classify(&r).unwrap() {
            Classification::Elliptic { angle } => {
                assert!((angle - core::f64::consts::PI).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn both_poles_finite() {
        // Conjugate a dilation so its poles land at p and q.
        let s = MoebiusMap::translation(&v(&[1.0, 2.0]))
            .compose(&MoebiusMap::unit_inversion(2))
            .unwrap()
            .compose(&MoebiusMap::translation(&v(&[0.5, 0.0])))
            .unwrap();
        let g = MoebiusMap::dilation(2, 3.0).unwrap().conjugate_by(&s).unwrap();
        let d = classify(&g).unwrap().loxodromic().unwrap().clone();
        let a = g.apply(&d.attracting).unwrap();
        let r = g.apply(&d.repelling).unwrap();
        assert!(a.chordal_distance(&d.attracting) < 1e-10);
        assert!(r.chordal_distance(&d.repelling) < 1e-10);
        assert!((d.multiplier.lambda - 1.0 / 3.0).abs() < 1e-9);
    }
}
