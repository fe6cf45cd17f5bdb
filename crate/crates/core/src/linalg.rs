//! Dense helpers on top of nalgebra's dynamically sized matrices.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// `J = diag(1, …, 1, −1)` of the given size.
pub fn lorentz_form(size: usize) -> Matrix {
    let mut j = Matrix::identity(size, size);
    j[(size - 1, size - 1)] = -1.0;
    j
}

/// Lorentz inner product `⟨u, v⟩_J` with the time coordinate last.
pub fn lorentz_dot(u: &Vector, v: &Vector) -> f64 {
    let last = u.len() - 1;
    u.rows(0, last).dot(&v.rows(0, last)) - u[last] * v[last]
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Spectral norm.
pub fn op_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().fold(0.0, |acc: f64, s| acc.max(*s))
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0, |a: f64, s| a.max(*s));
    let min = sv.iter().fold(f64::INFINITY, |a: f64, s| a.min(*s));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Max-abs entry of `OᵀO − I`.
pub fn orthogonality_defect(o: &Matrix) -> f64 {
    let n = o.ncols();
    max_abs(&(o.transpose() * o - Matrix::identity(n, n)))
}

/// Rotation by `angle` in the `(i, j)` coordinate plane.
pub fn plane_rotation(n: usize, i: usize, j: usize, angle: f64) -> Matrix {
    let mut r = Matrix::identity(n, n);
    let (s, c) = angle.sin_cos();
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(i, j)] = -s;
    r[(j, i)] = s;
    r
}

/// Householder reflection `I − 2uuᵀ/|u|²`.
pub fn reflection(u: &Vector) -> Matrix {
    let n = u.len();
    Matrix::identity(n, n) - (u * u.transpose()) * (2.0 / u.norm_squared())
}

/// `ρ_u(v) = v − 2⟨v,u⟩u/|u|²`.
pub fn reflect(u: &Vector, v: &Vector) -> Vector {
    v - u * (2.0 * v.dot(u) / u.norm_squared())
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let norm = m.abs().row_sum().iter().fold(0.0, |a: f64, x| a.max(*x)).max(max_abs(m));
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = m * scale;
    let mut term = Matrix::identity(n, n);
    let mut sum = Matrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &x / k as f64;
        sum += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `log(I + X)` by its power series; `None` if the series does not settle
/// (spectral radius of `X` too close to 1).
pub fn log_one_plus(x: &Matrix) -> Option<Matrix> {
    let n = x.nrows();
    let mut power = Matrix::identity(n, n);
    let mut sum = Matrix::zeros(n, n);
    for k in 1..=600 {
        power = &power * x;
        let term = &power / k as f64;
        if k % 2 == 1 {
            sum += &term;
        } else {
            sum -= &term;
        }
        if max_abs(&term) < 1e-18 {
            return Some(sum);
        }
    }
    None
}

/// Solves a small linear least-squares problem `min |X c − y|` column-wise via SVD.
pub fn least_squares(design: &Matrix, targets: &Matrix) -> Option<Matrix> {
    let svd = design.clone().svd(true, true);
    svd.solve(targets, 1e-13).ok()
}
