use crate::affine::{fit_near_identity, AffineField};
use crate::grid::EvalGrid;
use crate::linalg::Vector;
use crate::{Error, Result};

/// Sector `U_{ε,R} = {w : |w| > R, ∠(w, w₀) < ε}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorParams {
    pub eps: f64,
    pub radius: f64,
}

impl SectorParams {
    /// `ε_n = n^{-1/2}`, `R_n = n`.
    pub fn default_for(n: usize) -> Self {
        let n = n.max(1) as f64;
        Self { eps: n.sqrt().recip().min(1.0), radius: n }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorZoom {
    pub n: usize,
    pub params: SectorParams,
    /// Smallest shift putting `n·(B(0, n) + a w₀)` inside the sector.
    pub a: f64,
    pub w0: Vector,
    /// `Φ(w₀)`.
    pub c: Vector,
    /// Mean of `f_n(w) − w` over the grid.
    pub mean_translation: Vector,
    /// Least-squares affine fit of `f_n − id` and its sup residual.
    pub fit: AffineField,
    pub fit_residual: f64,
}

impl SectorZoom {
    /// `n·ĉ_n`, which should approach `Φ(w₀)`.
    pub fn scaled_translation(&self) -> Vector {
        &self.mean_translation * self.n as f64
    }

    /// `|n·ĉ_n − Φ(w₀)| / |Φ(w₀)|`.
    pub fn relative_error(&self) -> f64 {
        (self.scaled_translation() - &self.c).norm() / self.c.norm()
    }
}

/// `a_n = max(n / sin ε_n, n + R_n/n)`: the ball of radius `n` about `a w₀`
/// subtends half-angle `asin(n/a)` and has distance `a − n` from 0.
pub fn minimal_shift(n: usize, params: SectorParams) -> f64 {
    let n = n as f64;
    (n / params.eps.sin()).max(n + params.radius / n)
}

/// `f_n(w) = f(n(w + a w₀))/n − a w₀`.
pub fn sector_map<'a, F>(f: &'a F, zoom: &SectorZoom) -> impl Fn(&Vector) -> Vector + 'a
where
    F: Fn(&Vector) -> Vector,
{
    let n = zoom.n as f64;
    let shift = &zoom.w0 * zoom.a;
    move |w: &Vector| f(&((w + &shift) * n)) / n - &shift
}

fn angle(y: &Vector, w0: &Vector) -> f64 {
    (y.dot(w0) / y.norm()).clamp(-1.0, 1.0).acos()
}

/// Conjugates `f(w) = w + Φ(w) + o(1)` into the sector along `w₀` at scale
/// `n`, and fits the resulting near-translation.
pub fn sector_zoom<F, P>(
    f: &F,
    phi: &P,
    w0: &Vector,
    n: usize,
    params: SectorParams,
    grid: &EvalGrid,
) -> Result<SectorZoom>
where
    F: Fn(&Vector) -> Vector,
    P: Fn(&Vector) -> Vector,
{
    if n == 0 {
        return Err(Error::InvalidInput("scale n must be positive".into()));
    }
    if !(params.eps > 0.0 && params.eps < core::f64::consts::FRAC_PI_2 && params.radius > 0.0) {
        return Err(Error::InvalidInput("sector needs 0 < ε < π/2 and R > 0".into()));
    }
    let norm = w0.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroW);
    }
    let w0 = w0 / norm;
    let c = phi(&w0);
    if !(c.norm() > 1e-14) {
        return Err(Error::ZeroField);
    }
    for s in [0.5, 2.0, 10.0] {
        let defect = (phi(&(&w0 * s)) - &c).norm() / c.norm();
        if !(defect <= 1e-9) {
            return Err(Error::NotHomogeneous { defect });
        }
    }
    let a = minimal_shift(n, params);
    let nf = n as f64;
    for w in grid.points() {
        let y = f(&((w + &w0 * a) * nf));
        if !(y.norm() > 0.5 * params.radius) || !(angle(&y, &w0) < 2.0 * params.eps) {
            return Err(Error::SectorViolation { n });
        }
    }
    let mut zoom = SectorZoom {
        n,
        params,
        a,
        w0,
        c,
        mean_translation: Vector::zeros(grid.dim()),
        fit: AffineField::zero(grid.dim()),
        fit_residual: 0.0,
    };
    let fnmap = sector_map(f, &zoom);
    let mut sum = Vector::zeros(grid.dim());
    for w in grid.points() {
        sum += fnmap(w) - w;
    }
    let mean = sum / grid.len() as f64;
    let (fit, fit_residual) = fit_near_identity(&fnmap, grid)?;
    zoom.mean_translation = mean;
    zoom.fit = fit;
    zoom.fit_residual = fit_residual;
    Ok(zoom)
}
