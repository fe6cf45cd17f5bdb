use alloc::vec::Vec;

use crate::conformal::{
    classify, realize_based_linear, BasedLinearMap, BasedLinearRealization, BoundaryPoint, LoxodromicData, MoebiusMap,
};
use crate::grid::EvalGrid;
use crate::linalg::{orthogonality_defect, Matrix, Vector};
use crate::report::ConvergenceReport;
use crate::tolerances;
use crate::{Error, Result};

/// Poles and multiplier `λO` of one loxodromic element `g_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleData {
    pub index: usize,
    pub eps: Vector,
    pub m: Vector,
    pub lambda: f64,
    pub rotation: Matrix,
}

impl PoleData {
    pub fn new(index: usize, eps: Vector, m: Vector, lambda: f64, rotation: Matrix) -> Result<Self> {
        let n = eps.len();
        if m.len() != n || rotation.nrows() != n || rotation.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.len() });
        }
        let defect = orthogonality_defect(&rotation);
        if defect > tolerances::ORTHOGONAL {
            return Err(Error::NonOrthogonal { defect });
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidInput("multiplier must lie in (0, 1)".into()));
        }
        Ok(Self { index, eps, m, lambda, rotation })
    }

    /// Both poles must be finite.
    pub fn from_loxodromic(index: usize, data: &LoxodromicData) -> Result<Self> {
        let eps = data.attracting.coords_or_err()?.clone();
        let m = data.repelling.coords_or_err()?.clone();
        Self::new(index, eps, m, data.multiplier.lambda, data.multiplier.orthogonal.clone())
    }
}

/// One dilated term: `g'_n(x) = g_n(t'_n x)/t'_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleEntry {
    pub poles: PoleData,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub eps_scaled: Vector,
    pub m_scaled: Vector,
    /// Ratios that must tend to zero:
    /// `max((1/‖M'‖)/(‖ε'‖/λ), ‖ε'‖/λ)`, `t'/(‖ε'‖/λ)` and `λ²/‖ε'‖`.
    pub margins: [f64; 3],
    /// `lower < upper` and every margin below 1.
    pub feasible: bool,
}

impl ScheduleEntry {
    pub fn index(&self) -> usize {
        self.poles.index
    }

    pub fn lambda(&self) -> f64 {
        self.poles.lambda
    }

    pub fn multiplier(&self) -> Matrix {
        &self.poles.rotation * self.poles.lambda
    }

    /// `‖ε'‖/λ`.
    pub fn commutator_scale(&self) -> f64 {
        self.eps_scaled.norm() / self.poles.lambda
    }

    /// Chart evaluator for `g'_n`.
    pub fn realize(&self) -> Result<BasedLinearRealization> {
        realize_based_linear(&BasedLinearMap {
            attracting: BoundaryPoint::finite(self.eps_scaled.clone())?,
            repelling: BoundaryPoint::finite(self.m_scaled.clone())?,
            multiplier: self.multiplier(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoomSchedule {
    pub entries: Vec<ScheduleEntry>,
    /// Every margin sequence strictly decreases.
    pub margins_decreasing: bool,
}

impl ZoomSchedule {
    pub fn is_feasible(&self) -> bool {
        self.margins_decreasing && self.entries.iter().all(|e| e.feasible)
    }
}

fn entry(p: &PoleData) -> Result<ScheduleEntry> {
    let e = p.eps.norm();
    let m = p.m.norm();
    let l = p.lambda;
    if e == 0.0 {
        return Err(Error::InfeasibleSchedule { index: p.index, reason: "attracting pole at the origin" });
    }
    let lower = e / l;
    let upper = (e * m / l).sqrt().min((e / l).sqrt()).min(e / (l * l));
    let t = (lower * upper).sqrt();
    let eps_scaled = &p.eps / t;
    let m_scaled = &p.m / t;
    let es = eps_scaled.norm();
    let ratio = es / l;
    let margins = [(1.0 / m_scaled.norm() / ratio).max(ratio), t / ratio, l * l / es];
    let feasible = lower < upper && margins.iter().all(|x| *x < 1.0);
    Ok(ScheduleEntry { poles: p.clone(), t, lower, upper, eps_scaled, m_scaled, margins, feasible })
}

fn decreasing(entries: &[ScheduleEntry]) -> Option<usize> {
    entries.windows(2).position(|w| (0..3).any(|k| !(w[1].margins[k] < w[0].margins[k]))).map(|i| i + 1)
}

/// Picks `t'_n` as the geometric mean of the feasible bounds
/// `‖ε‖/λ < t' < min(√(‖ε‖‖M‖/λ), √(‖ε‖/λ), ‖ε‖/λ²)` and rejects the
/// sequence unless every entry is feasible and all margins strictly decrease.
pub fn choose_dilation(poles: &[PoleData]) -> Result<ZoomSchedule> {
    let s = choose_dilation_lenient(poles)?;
    for e in &s.entries {
        if !(e.lower < e.upper) {
            return Err(Error::InfeasibleSchedule { index: e.index(), reason: "empty feasible interval" });
        }
        if e.margins.iter().any(|x| !(*x < 1.0)) {
            return Err(Error::InfeasibleSchedule { index: e.index(), reason: "margin not below 1" });
        }
    }
    if let Some(i) = decreasing(&s.entries) {
        return Err(Error::InfeasibleSchedule { index: s.entries[i].index(), reason: "margins do not decay" });
    }
    Ok(s)
}

/// As [`choose_dilation`] but records infeasibility instead of failing.
/// Only a vanishing `ε` is an error.
pub fn choose_dilation_lenient(poles: &[PoleData]) -> Result<ZoomSchedule> {
    let entries = poles.iter().map(entry).collect::<Result<Vec<_>>>()?;
    let margins_decreasing = decreasing(&entries).is_none();
    Ok(ZoomSchedule { entries, margins_decreasing })
}

/// `sup ‖g'(x) − λOx − ε'‖ / ‖ε'‖` over the grid.
pub fn almost_affine_residual(entry: &ScheduleEntry, grid: &EvalGrid) -> Result<f64> {
    let g = entry.realize()?;
    let pole_norm = g_pole_norm(&g, entry);
    if pole_norm <= grid.radius() + 1.0 {
        return Err(Error::GridTouchesPole { pole_norm });
    }
    let lo = entry.multiplier();
    let sup = grid.sup_distance(|x| g.eval(x), |x| &lo * x + &entry.eps_scaled);
    Ok(sup / entry.eps_scaled.norm())
}

/// Smaller of `‖M'‖` and the norm of the preimage of `∞` under `g'`.
fn g_pole_norm(g: &BasedLinearRealization, entry: &ScheduleEntry) -> f64 {
    let pole = g.pole().map_or(f64::INFINITY, |v| v.norm());
    pole.min(entry.m_scaled.norm())
}

/// [`almost_affine_residual`] for an explicit group element, after checking
/// that its poles and multiplier are those recorded in `entry`.
pub fn almost_affine_residual_of(g: &MoebiusMap, entry: &ScheduleEntry, grid: &EvalGrid) -> Result<f64> {
    let class = classify(g)?;
    let data = class.loxodromic().ok_or(Error::InvalidInput("element is not loxodromic".into()))?;
    let p = PoleData::from_loxodromic(entry.index(), data)?;
    let scale = entry.poles.eps.norm().max(entry.poles.m.norm()).max(1.0);
    let close = (&p.eps - &entry.poles.eps).norm() <= 1e-9 * scale
        && (&p.m - &entry.poles.m).norm() <= 1e-9 * scale
        && (p.lambda - entry.poles.lambda).abs() <= 1e-9 * entry.poles.lambda;
    if !close {
        return Err(Error::InvalidInput("element does not match the schedule entry".into()));
    }
    almost_affine_residual(entry, grid)
}

/// Residuals along the whole schedule.
pub fn almost_affine_report(schedule: &ZoomSchedule, grid: &EvalGrid, threshold: f64) -> Result<ConvergenceReport> {
    let mut indices = Vec::new();
    let mut errors = Vec::new();
    for e in &schedule.entries {
        indices.push(e.index());
        errors.push(almost_affine_residual(e, grid)?);
    }
    Ok(ConvergenceReport::new(indices, errors, threshold))
}

/// `ε_n = 4⁻ⁿe₁`, `M_n = 2ⁿe₂`, `λ_n = 2⁻ⁿ`, `O_n = I`.
pub fn geometric_poles(dim: usize, n: usize) -> PoleData {
    let mut eps = Vector::zeros(dim);
    eps[0] = 0.25f64.powi(n as i32);
    let mut m = Vector::zeros(dim);
    m[1.min(dim - 1)] = 2f64.powi(n as i32);
    PoleData { index: n, eps, m, lambda: 0.5f64.powi(n as i32), rotation: Matrix::identity(dim, dim) }
}
