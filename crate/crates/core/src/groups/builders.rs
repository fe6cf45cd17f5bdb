use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::KleinianGroup;
use crate::conformal::MoebiusMap;
use crate::linalg::{lorentz_dot, lorentz_form, Matrix, Vector};
use crate::{Error, Result};

/// Gram matrix of a linear Coxeter diagram `[m₁, m₂, …]`: `1` on the
/// diagonal, `−cos(π/mᵢ)` between consecutive mirrors, `0` elsewhere.
pub fn coxeter_gram(diagram: &[u32]) -> Matrix {
    let k = diagram.len() + 1;
    let mut g = Matrix::identity(k, k);
    for (i, &m) in diagram.iter().enumerate() {
        let c = -(PI / m as f64).cos();
        g[(i, i + 1)] = c;
        g[(i + 1, i)] = c;
    }
    g
}

/// Gram matrix from a symmetric matrix of orders; `0` encodes `∞`
/// (parallel mirrors, entry `−1`).
pub fn coxeter_gram_from_orders(orders: &[Vec<u32>]) -> Result<Matrix> {
    let k = orders.len();
    let mut g = Matrix::identity(k, k);
    for i in 0..k {
        if orders[i].len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: orders[i].len() });
        }
        for j in 0..k {
            if i == j {
                continue;
            }
            if orders[i][j] != orders[j][i] {
                return Err(Error::NonRealizableGram("order matrix is not symmetric"));
            }
            g[(i, j)] = match orders[i][j] {
                0 => -1.0,
                1 => return Err(Error::NonRealizableGram("off-diagonal order 1")),
                m => -(PI / m as f64).cos(),
            };
        }
    }
    Ok(g)
}

impl KleinianGroup {
    /// Reflection group of a hyperbolic Coxeter simplex with the given Gram
    /// matrix. The mirror normals `vᵢ` satisfy `⟨vᵢ, vⱼ⟩_J = gramᵢⱼ`.
    pub fn coxeter(label: &str, gram: &Matrix, cocompact_hint: bool) -> Result<Self> {
        let k = gram.nrows();
        if gram.ncols() != k || k < 3 {
            return Err(Error::NonRealizableGram("gram must be square of size at least 3"));
        }
        for i in 0..k {
            if (gram[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::NonRealizableGram("diagonal entries must be 1"));
            }
            for j in 0..i {
                if (gram[(i, j)] - gram[(j, i)]).abs() > 1e-12 {
                    return Err(Error::NonRealizableGram("gram is not symmetric"));
                }
            }
        }
        let eig = gram.clone().symmetric_eigen();
        let tol = 1e-10;
        let positive = eig.eigenvalues.iter().filter(|d| **d > tol).count();
        let negative = eig.eigenvalues.iter().filter(|d| **d < -tol).count();
        let zero = k - positive - negative;
        if negative != 1 || zero != 0 {
            return Err(Error::WrongSignature { positive, negative, zero });
        }
        // V = Q |D|^{1/2} P with the negative direction moved to the last column.
        let mut order: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
        order.extend((0..k).filter(|&i| eig.eigenvalues[i] < 0.0));
        let mut v = Matrix::zeros(k, k);
        for (col, &src) in order.iter().enumerate() {
            let s = eig.eigenvalues[src].abs().sqrt();
            v.set_column(col, &(eig.eigenvectors.column(src) * s));
        }
        let j = lorentz_form(k);
        let mut gens = Vec::with_capacity(k);
        for i in 0..k {
            let vi: Vector = v.row(i).transpose();
            let norm = lorentz_dot(&vi, &vi);
            let r = Matrix::identity(k, k) - (&vi * vi.transpose() * &j) * (2.0 / norm);
            gens.push(MoebiusMap::from_matrix(r)?);
        }
        Self::new(label, gens, cocompact_hint)
    }

    /// Index-2 orientation-preserving subgroup generated by the products
    /// `r₀rᵢ` of a reflection group.
    pub fn rotation_subgroup(&self) -> Result<Self> {
        let gens = self.generators();
        let mut out = Vec::new();
        for i in 1..gens.len() {
            out.push(gens[0].compose(&gens[i])?);
        }
        Self::new(&format!("{}+", self.label()), out, self.cocompact_hint())
    }
}

/// `⟨x ↦ λx⟩` on `ℝⁿ`.
pub fn dilation_group(n: usize, lambda: f64) -> Result<KleinianGroup> {
    KleinianGroup::new(&format!("dilation({lambda})"), alloc::vec![MoebiusMap::dilation(n, lambda)?], false)
}

/// Pair of disjoint spheres `A`, `B`; the generator `ι_B ∘ ι_A` maps the
/// exterior of `A` onto the interior of `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchottkyPair {
    pub center_a: Vector,
    pub radius_a: f64,
    pub center_b: Vector,
    pub radius_b: f64,
}

/// Classical Schottky group; all spheres must be pairwise disjoint.
pub fn schottky_group(pairs: &[SchottkyPair]) -> Result<KleinianGroup> {
    let mut spheres: Vec<(&Vector, f64)> = Vec::new();
    for p in pairs {
        if !(p.radius_a > 0.0 && p.radius_b > 0.0) {
            return Err(Error::InvalidInput("sphere radius must be positive".into()));
        }
        spheres.push((&p.center_a, p.radius_a));
        spheres.push((&p.center_b, p.radius_b));
    }
    for i in 0..spheres.len() {
        for j in 0..i {
            let d = (spheres[i].0 - spheres[j].0).norm();
            if d <= spheres[i].1 + spheres[j].1 {
                return Err(Error::InvalidInput("Schottky spheres must be disjoint".into()));
            }
        }
    }
    let mut gens = Vec::new();
    for p in pairs {
        let a = MoebiusMap::sphere_inversion(&p.center_a, p.radius_a)?;
        let b = MoebiusMap::sphere_inversion(&p.center_b, p.radius_b)?;
        gens.push(b.compose(&a)?);
    }
    KleinianGroup::new("schottky", gens, false)
}

fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn cdiv(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d = b[0] * b[0] + b[1] * b[1];
    [(a[0] * b[0] + a[1] * b[1]) / d, (a[1] * b[0] - a[0] * b[1]) / d]
}

/// Complex similarity `z ↦ wz + t` on `ℝ²`.
fn complex_affine(w: [f64; 2], t: [f64; 2]) -> Result<MoebiusMap> {
    let r = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if r == 0.0 {
        return Err(Error::NonInvertible);
    }
    let o = Matrix::from_row_slice(2, 2, &[w[0] / r, -w[1] / r, w[1] / r, w[0] / r]);
    MoebiusMap::similarity(r, &o, &Vector::from_column_slice(&t))
}

/// `z ↦ (az + b)/(cz + d)` on `ℂ ∪ {∞}` as a map of `ℝ² ∪ {∞}`.
pub fn moebius_from_sl2c(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Result<MoebiusMap> {
    let det = {
        let ad = cmul(a, d);
        let bc = cmul(b, c);
        [ad[0] - bc[0], ad[1] - bc[1]]
    };
    if det[0] * det[0] + det[1] * det[1] == 0.0 {
        return Err(Error::NonInvertible);
    }
    if c == [0.0, 0.0] {
        return complex_affine(cdiv(a, d), cdiv(b, d));
    }
    // (az+b)/(cz+d) = a/c − (ad−bc)/(c(cz+d)) and 1/w = conj(ι(w)).
    let shift = complex_affine([1.0, 0.0], cdiv(d, c))?;
    let inv = MoebiusMap::unit_inversion(2);
    let conj = MoebiusMap::orthogonal(&Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))?;
    let c2 = cmul(c, c);
    let scale = cdiv([-det[0], -det[1]], c2);
    let outer = complex_affine(scale, cdiv(a, c))?;
    outer.compose(&conj)?.compose(&inv)?.compose(&shift)
}

/// `PSL(2, ℤ[i])` acting on `ℝ² ∪ {∞}`; not cocompact.
pub fn picard_group() -> Result<KleinianGroup> {
    let one = [1.0, 0.0];
    let zero = [0.0, 0.0];
    let i = [0.0, 1.0];
    let gens = alloc::vec![
        moebius_from_sl2c(one, one, zero, one)?,
        moebius_from_sl2c(one, i, zero, one)?,
        moebius_from_sl2c(zero, [-1.0, 0.0], one, zero)?,
        moebius_from_sl2c(i, zero, zero, [0.0, -1.0])?,
    ];
    KleinianGroup::new("PSL(2,Z[i])", gens, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{classify, Classification};

    #[test]
    fn coxeter_534_generators_are_involutions() {
        let g = KleinianGroup::coxeter("534", &coxeter_gram(&[5, 3, 4]), true).unwrap();
        assert_eq!(g.generators().len(), 4);
        for (i, r) in g.generators().iter().enumerate() {
            assert_eq!(g.inverse_index(i), i);
            assert!(r.compose(r).unwrap().is_identity(1e-12));
            assert_eq!(r.det_sign(), -1);
        }
        assert_eq!(g.hyperbolic_dim(), 3);
    }

    #[test]
    fn coxeter_products_have_dihedral_angles() {
        let diagram = [5u32, 3, 4];
        let g = KleinianGroup::coxeter("534", &coxeter_gram(&diagram), true).unwrap();
        let r = g.generators();
        for (i, m) in diagram.iter().enumerate() {
            let p = r[i].compose(&r[i + 1]).unwrap();
            match classify(&p).unwrap() {
                Classification::Elliptic { angle } => {
                    assert!((angle - 2.0 * PI / *m as f64).abs() < 1e-9, "{angle}")
                }
                other => panic!("{other:?}"),
            }
        }
        // Commuting mirrors meet at a right angle.
        let p = r[0].compose(&r[2]).unwrap();
        assert!(p.compose(&p).unwrap().is_identity(1e-12));
    }

    #[test]
    fn euclidean_gram_rejected() {
        // Euclidean triangle group [3,6].
        let gram = coxeter_gram(&[3, 6]);
        assert!(matches!(
            KleinianGroup::coxeter("36", &gram, false),
            Err(Error::WrongSignature { negative: 0, zero: 1, .. })
        ));
        let mut bad = coxeter_gram(&[5, 3, 4]);
        bad[(0, 0)] = 2.0;
        assert!(matches!(KleinianGroup::coxeter("x", &bad, false), Err(Error::NonRealizableGram(_))));
    }

    #[test]
    fn schottky_inverse_closure() {
        let e = |x: f64, y: f64| Vector::from_column_slice(&[x, y]);
        let g = schottky_group(&[
            SchottkyPair { center_a: e(-3.0, 0.0), radius_a: 1.0, center_b: e(3.0, 0.0), radius_b: 1.0 },
            SchottkyPair { center_a: e(0.0, -3.0), radius_a: 1.0, center_b: e(0.0, 3.0), radius_b: 1.0 },
        ])
        .unwrap();
        assert_eq!(g.generators().len(), 4);
        for i in 0..4 {
            let j = g.inverse_index(i);
            assert_ne!(i, j);
            assert!(g.generators()[i].compose(&g.generators()[j]).unwrap().is_identity(1e-10));
        }
    }
}
