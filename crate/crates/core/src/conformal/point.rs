use crate::linalg::Vector;
use crate::{Error, Result};

/// Chart representation of a boundary point.
#[derive(Clone, Debug, PartialEq)]
pub enum Chart {
    Finite(Vector),
    Infinity,
}

/// A point of `ℝⁿ ∪ {∞}` together with its null vector normalized to time 1.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    chart: Chart,
    null: Vector,
}

impl BoundaryPoint {
    pub fn finite(x: Vector) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("boundary dimension must be positive".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalDegeneracy("non-finite coordinate"));
        }
        let null = null_of(&x);
        Ok(Self { chart: Chart::Finite(x), null })
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::finite(Vector::from_column_slice(x))
    }

    pub fn infinity(n: usize) -> Self {
        let mut null = Vector::zeros(n + 2);
        null[n] = -1.0;
        null[n + 1] = 1.0;
        Self { chart: Chart::Infinity, null }
    }

    pub fn origin(n: usize) -> Self {
        Self::finite(Vector::zeros(n)).expect("origin is finite")
    }

    /// Recovers a point from a (possibly unnormalized) forward null vector.
    ///
    /// `infinity_bound` is the absolute size below which `τ + s` is treated as
    /// zero, measured on the vector rescaled to unit time.
    pub fn from_null(v: &Vector, infinity_bound: f64) -> Result<Self> {
        let len = v.len();
        if len < 3 {
            return Err(Error::InvalidInput("null vector needs length at least 3".into()));
        }
        let n = len - 2;
        let tau = v[n + 1];
        if !(tau > f64::MIN_POSITIVE * 1e8) || !tau.is_finite() {
            return Err(Error::NumericalDegeneracy("null vector with non-positive time"));
        }
        let u = v / tau;
        let p = u[n] + 1.0;
        if p <= infinity_bound.max(4.0 * f64::EPSILON) {
            return Ok(Self::infinity(n));
        }
        let x = u.rows(0, n) / p;
        Self::finite(x.into_owned())
    }

    pub fn dim(&self) -> usize {
        self.null.len() - 2
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self.chart, Chart::Infinity)
    }

    pub fn coords(&self) -> Option<&Vector> {
        match &self.chart {
            Chart::Finite(x) => Some(x),
            Chart::Infinity => None,
        }
    }

    pub fn coords_or_err(&self) -> Result<&Vector> {
        self.coords().ok_or(Error::PoleAtInfinity)
    }

    /// Null vector scaled to time coordinate 1.
    pub fn null_vector(&self) -> &Vector {
        &self.null
    }

    /// Image on the unit sphere `Sⁿ ⊂ ℝⁿ⁺¹` under inverse stereographic projection.
    pub fn sphere_point(&self) -> Vector {
        self.null.rows(0, self.dim() + 1).into_owned()
    }

    /// Euclidean norm in the chart, `∞` at infinity.
    pub fn norm(&self) -> f64 {
        match &self.chart {
            Chart::Finite(x) => x.norm(),
            Chart::Infinity => f64::INFINITY,
        }
    }

    /// Chordal distance on the unit sphere, in `[0, 2]`.
    pub fn chordal_distance(&self, other: &Self) -> f64 {
        // Closed form in the chart avoids cancellation for nearby points.
        match (&self.chart, &other.chart) {
            (Chart::Finite(x), Chart::Finite(y)) => {
                2.0 * (x - y).norm() / ((1.0 + x.norm_squared()).sqrt() * (1.0 + y.norm_squared()).sqrt())
            }
            (Chart::Finite(x), Chart::Infinity) | (Chart::Infinity, Chart::Finite(x)) => {
                2.0 / (1.0 + x.norm_squared()).sqrt()
            }
            (Chart::Infinity, Chart::Infinity) => 0.0,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.chordal_distance(other) <= tol
    }
}

fn null_of(x: &Vector) -> Vector {
    let n = x.len();
    let r2 = x.norm_squared();
    let mut v = Vector::zeros(n + 2);
    if r2.is_finite() {
        let d = 1.0 + r2;
        for i in 0..n {
            v[i] = 2.0 * x[i] / d;
        }
        v[n] = (1.0 - r2) / d;
    } else {
        v[n] = -1.0;
    }
    v[n + 1] = 1.0;
    v
}

/// Cross-ratio `|a−c||b−d| / (|a−d||b−c|)`, computed through chordal
/// distances so that `∞` is handled uniformly.
pub fn cross_ratio(a: &BoundaryPoint, b: &BoundaryPoint, c: &BoundaryPoint, d: &BoundaryPoint) -> Result<f64> {
    let den = a.chordal_distance(d) * b.chordal_distance(c);
    if den == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(a.chordal_distance(c) * b.chordal_distance(d) / den)
}
