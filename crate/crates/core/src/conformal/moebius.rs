use super::point::BoundaryPoint;
use crate::linalg::{lorentz_form, max_abs, orthogonality_defect, Matrix, Vector};
use crate::tolerances;
use crate::{Error, Result};

/// Derivative `λO` of a Möbius map at a finite point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalDerivative {
    pub lambda: f64,
    pub orthogonal: Matrix,
}

impl ConformalDerivative {
    pub fn matrix(&self) -> Matrix {
        &self.orthogonal * self.lambda
    }
}

/// A Möbius transformation of `ℝⁿ ∪ {∞}` stored as a matrix in `O⁺(n+1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MoebiusMap {
    matrix: Matrix,
    det_sign: i8,
    since_reproject: u32,
}

/// Change of basis `(y, s, τ) → (y, p, q)` with `p = τ + s`, `q = τ − s`.
fn to_pq(n: usize) -> Matrix {
    let mut m = Matrix::identity(n + 2, n + 2);
    m[(n, n)] = 1.0;
    m[(n, n + 1)] = 1.0;
    m[(n + 1, n)] = -1.0;
    m[(n + 1, n + 1)] = 1.0;
    m
}

fn from_pq(n: usize) -> Matrix {
    let mut m = Matrix::identity(n + 2, n + 2);
    m[(n, n)] = 0.5;
    m[(n, n + 1)] = -0.5;
    m[(n + 1, n)] = 0.5;
    m[(n + 1, n + 1)] = 0.5;
    m
}

fn conjugate_pq(k: &Matrix, n: usize) -> Matrix {
    from_pq(n) * k * to_pq(n)
}

impl MoebiusMap {
    /// Wraps a Lorentz matrix after checking shape, form preservation and
    /// time orientation.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        let size = matrix.nrows();
        if size < 3 || matrix.ncols() != size {
            return Err(Error::DimensionMismatch { expected: size, found: matrix.ncols() });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalDegeneracy("non-finite matrix entry"));
        }
        let j = lorentz_form(size);
        let scale = max_abs(&matrix).powi(2).max(1.0);
        let defect = max_abs(&(matrix.transpose() * &j * &matrix - &j));
        if defect > tolerances::LORENTZ * scale {
            return Err(Error::InvalidInput("matrix does not preserve the Lorentz form".into()));
        }
        if matrix[(size - 1, size - 1)] <= 0.0 {
            return Err(Error::InvalidInput("matrix reverses time orientation".into()));
        }
        let det_sign = if matrix.determinant() > 0.0 { 1 } else { -1 };
        Ok(Self { matrix, det_sign, since_reproject: 0 })
    }

    fn raw(matrix: Matrix, det_sign: i8) -> Self {
        Self { matrix, det_sign, since_reproject: 0 }
    }

    pub fn identity(n: usize) -> Self {
        Self::raw(Matrix::identity(n + 2, n + 2), 1)
    }

    /// `x ↦ x / |x|²`.
    pub fn unit_inversion(n: usize) -> Self {
        let mut m = Matrix::identity(n + 2, n + 2);
        m[(n, n)] = -1.0;
        Self::raw(m, -1)
    }

    /// `x ↦ x + b`.
    pub fn translation(b: &Vector) -> Self {
        let n = b.len();
        let mut k = Matrix::identity(n + 2, n + 2);
        for i in 0..n {
            k[(i, n)] = b[i];
            k[(n + 1, i)] = 2.0 * b[i];
        }
        k[(n + 1, n)] = b.norm_squared();
        Self::raw(conjugate_pq(&k, n), 1)
    }

    /// `x ↦ λx`.
    pub fn dilation(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput("dilation factor must be positive".into()));
        }
        let mut k = Matrix::identity(n + 2, n + 2);
        k[(n, n)] = 1.0 / lambda;
        k[(n + 1, n + 1)] = lambda;
        Ok(Self::raw(conjugate_pq(&k, n), 1))
    }

    /// `x ↦ Ox` for orthogonal `O`.
    pub fn orthogonal(o: &Matrix) -> Result<Self> {
        let n = o.nrows();
        if o.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch { expected: n, found: o.ncols() });
        }
        let defect = orthogonality_defect(o);
        if defect > tolerances::ORTHOGONAL {
            return Err(Error::NonOrthogonal { defect });
        }
        let mut m = Matrix::identity(n + 2, n + 2);
        m.view_mut((0, 0), (n, n)).copy_from(o);
        let det_sign = if o.determinant() > 0.0 { 1 } else { -1 };
        Ok(Self::raw(m, det_sign))
    }

    /// `x ↦ λOx + b`.
    pub fn similarity(lambda: f64, o: &Matrix, b: &Vector) -> Result<Self> {
        let n = b.len();
        if o.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: o.nrows() });
        }
        let r = Self::orthogonal(o)?;
        let d = Self::dilation(n, lambda)?;
        let t = Self::translation(b);
        t.compose(&d)?.compose(&r)
    }

    /// Inversion in the sphere of radius `r` about `c`.
    pub fn sphere_inversion(c: &Vector, r: f64) -> Result<Self> {
        let n = c.len();
        let out = Self::translation(&-c);
        let shrink = Self::dilation(n, 1.0 / r)?;
        let grow = Self::dilation(n, r)?;
        let back = Self::translation(c);
        back.compose(&grow)?.compose(&Self::unit_inversion(n))?.compose(&shrink)?.compose(&out)
    }

    /// Reflection in the hyperplane through the origin normal to `u`.
    pub fn hyperplane_reflection(u: &Vector) -> Result<Self> {
        if u.norm() == 0.0 {
            return Err(Error::InvalidInput("zero normal".into()));
        }
        Self::orthogonal(&crate::linalg::reflection(u))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// Boundary dimension `n`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 2
    }

    /// Hyperbolic dimension `N = n + 1`.
    pub fn hyperbolic_dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    pub fn is_orientation_preserving(&self) -> bool {
        self.det_sign > 0
    }

    pub fn lorentz_defect(&self) -> f64 {
        let j = lorentz_form(self.matrix.nrows());
        max_abs(&(self.matrix.transpose() * &j * &self.matrix - j))
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let size = self.matrix.nrows();
        max_abs(&(&self.matrix - Matrix::identity(size, size))) <= tol
    }

    /// `f ∘ g`. Accumulated drift is removed every few compositions.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if self.matrix.nrows() != g.matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), found: g.matrix.nrows() });
        }
        let mut out = Self {
            matrix: &self.matrix * &g.matrix,
            det_sign: self.det_sign * g.det_sign,
            since_reproject: self.since_reproject + g.since_reproject + 1,
        };
        if out.since_reproject >= tolerances::REPROJECT_EVERY {
            out.reproject();
        }
        Ok(out)
    }

    /// Inverse through the Lorentz adjoint `J Mᵀ J`.
    pub fn inverse(&self) -> Self {
        let size = self.matrix.nrows();
        let mut m = self.matrix.transpose();
        let t = size - 1;
        for i in 0..t {
            m[(i, t)] = -m[(i, t)];
            m[(t, i)] = -m[(t, i)];
        }
        Self { matrix: m, det_sign: self.det_sign, since_reproject: self.since_reproject }
    }

    /// `g ∘ self ∘ g⁻¹`.
    pub fn conjugate_by(&self, g: &Self) -> Result<Self> {
        g.compose(self)?.compose(&g.inverse())
    }

    /// Pulls the matrix back onto `O(n+1, 1)` with Newton–Schulz steps
    /// `X ← X(3I − X⋆X)/2`, `X⋆ = JXᵀJ`.
    pub fn reproject(&mut self) {
        let size = self.matrix.nrows();
        let j = lorentz_form(size);
        let eye = Matrix::identity(size, size);
        let mut best = self.lorentz_defect();
        for _ in 0..4 {
            if best == 0.0 {
                break;
            }
            let star = &j * self.matrix.transpose() * &j;
            let next = &self.matrix * (&eye * 3.0 - star * &self.matrix) * 0.5;
            let d = max_abs(&(next.transpose() * &j * &next - &j));
            if d < best {
                self.matrix = next;
                best = d;
            } else {
                break;
            }
        }
        self.since_reproject = 0;
    }

    /// Absolute roundoff allowance on `τ + s` of `M v`.
    fn infinity_bound(&self, v: &Vector) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n + 2 {
            acc += (self.matrix[(n, j)].abs() + self.matrix[(n + 1, j)].abs()) * v[j].abs();
        }
        16.0 * f64::EPSILON * (n as f64 + 2.0) * acc
    }

    pub fn apply(&self, x: &BoundaryPoint) -> Result<BoundaryPoint> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        let v = x.null_vector();
        let u = &self.matrix * v;
        let n = self.dim();
        let tau = u[n + 1];
        let bound = self.infinity_bound(v) / tau.abs().max(f64::MIN_POSITIVE);
        BoundaryPoint::from_null(&u, bound)
    }

    /// Chart evaluation; `PoleAtInfinity` when the image is `∞`.
    pub fn apply_vec(&self, x: &Vector) -> Result<Vector> {
        let p = BoundaryPoint::finite(x.clone())?;
        match self.apply(&p)?.coords() {
            Some(y) => Ok(y.clone()),
            None => Err(Error::PoleAtInfinity),
        }
    }

    /// Chart evaluation with `∞` mapped to a vector of infinities.
    pub fn eval(&self, x: &Vector) -> Vector {
        match self.apply_vec(x) {
            Ok(y) => y,
            Err(_) => Vector::from_element(x.len(), f64::INFINITY),
        }
    }

    /// Preimage of `∞`, if finite.
    pub fn pole(&self) -> Result<BoundaryPoint> {
        self.inverse().apply(&BoundaryPoint::infinity(self.dim()))
    }

    /// Analytic derivative at a finite point with finite image.
    pub fn derivative_at(&self, x: &Vector) -> Result<ConformalDerivative> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
        let r2 = x.norm_squared();
        let mut v = Vector::zeros(n + 2);
        for i in 0..n {
            v[i] = 2.0 * x[i];
        }
        v[n] = 1.0 - r2;
        v[n + 1] = 1.0 + r2;
        let u = &self.matrix * &v;
        let p = u[n] + u[n + 1];
        let scale = v.norm();
        if p.abs() <= self.infinity_bound(&v) || !(p.abs() > 1e-300 * scale) {
            return Err(Error::PoleAtInfinity);
        }
        let mut dv = Matrix::zeros(n + 2, n);
        for j in 0..n {
            dv[(j, j)] = 2.0;
            dv[(n, j)] = -2.0 * x[j];
            dv[(n + 1, j)] = 2.0 * x[j];
        }
        let du = &self.matrix * dv;
        let mut jac = Matrix::zeros(n, n);
        for j in 0..n {
            let dp = du[(n, j)] + du[(n + 1, j)];
            for i in 0..n {
                jac[(i, j)] = du[(i, j)] / p - u[i] * dp / (p * p);
            }
        }
        let det = jac.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NumericalDegeneracy("singular derivative"));
        }
        let lambda = det.abs().powf(1.0 / n as f64);
        Ok(ConformalDerivative { lambda, orthogonal: jac / lambda })
    }

    /// Max-abs entry difference, used for fingerprints and equality tests.
    pub fn distance(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}
