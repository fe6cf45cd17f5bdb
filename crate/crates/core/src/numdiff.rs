//! Finite differences for closures without symbolic derivatives.

use crate::grid::EvalGrid;
use crate::linalg::{Matrix, Vector};

/// Central-difference Jacobian with step `h`.
pub fn central_jacobian<F>(f: &F, x: &Vector, h: f64) -> Matrix
where
    F: Fn(&Vector) -> Vector + ?Sized,
{
    let n = x.len();
    let m = f(x).len();
    let mut jac = Matrix::zeros(m, n);
    for i in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let col = (f(&xp) - f(&xm)) / (2.0 * h);
        jac.set_column(i, &col);
    }
    jac
}

/// Central differences at `h` and `h/2` combined by one Richardson step,
/// cancelling the `O(h²)` term.
pub fn richardson_jacobian<F>(f: &F, x: &Vector, h: f64) -> Matrix
where
    F: Fn(&Vector) -> Vector + ?Sized,
{
    let coarse = central_jacobian(f, x, h);
    let fine = central_jacobian(f, x, 0.5 * h);
    (fine * 4.0 - coarse) / 3.0
}

/// `‖f(x+h) + f(x−h) − 2f(x)‖ / ‖h‖²`.
pub fn second_difference<F>(f: &F, x: &Vector, h: &Vector) -> f64
where
    F: Fn(&Vector) -> Vector + ?Sized,
{
    let fx = f(x);
    let num = f(&(x + h)) + f(&(x - h)) - fx * 2.0;
    num.norm() / h.norm_squared()
}

/// Largest [`second_difference`] over the grid, along the coordinate axes
/// and the diagonals `(eᵢ + eⱼ)/√2`, with step length `delta`. Vanishes up to
/// rounding (`~ε/δ²`) exactly when `f` is affine near the grid.
pub fn nonlinearity_certificate<F>(f: &F, grid: &EvalGrid, delta: f64) -> f64
where
    F: Fn(&Vector) -> Vector + ?Sized,
{
    let n = grid.dim();
    let mut dirs = alloc::vec::Vec::new();
    for i in 0..n {
        dirs.push(Vector::from_fn(n, |k, _| if k == i { delta } else { 0.0 }));
        for j in 0..i {
            let d = delta * core::f64::consts::FRAC_1_SQRT_2;
            dirs.push(Vector::from_fn(n, |k, _| if k == i || k == j { d } else { 0.0 }));
        }
    }
    let mut worst = 0.0f64;
    for x in grid.points() {
        for h in &dirs {
            let s = second_difference(f, x, h);
            if !s.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max(s);
        }
    }
    worst
}
