use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use super::enumerate::{ElementStream, EnumerationOptions, GroupElementRecord};
use super::KleinianGroup;
use crate::conformal::{BoundaryPoint, LoxodromicData, MoebiusMap};
use crate::linalg::{lorentz_dot, Vector};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PoleSearchOptions {
    pub max_word_length: usize,
    pub even_only: bool,
    pub max_elements: usize,
    /// Poles are measured relative to this point instead of the origin.
    pub basepoint: Option<Vector>,
    /// Number of best witnesses returned.
    pub keep: usize,
}

impl PoleSearchOptions {
    pub fn new(max_word_length: usize) -> Self {
        Self { max_word_length, even_only: false, max_elements: 500_000, basepoint: None, keep: 32 }
    }
}

#[derive(Clone, Debug)]
pub struct PoleSearchWitness {
    pub record: GroupElementRecord,
    pub length: f64,
    pub eps_norm: f64,
    pub m_norm: f64,
    pub t: f64,
    pub score: f64,
    /// `(‖ε‖/(t e^{−l}), t/‖M‖)`.
    pub ratios: (f64, f64),
    /// Hyperbolic distance from `g(0,t)` to `(0, t e^{−l})`.
    pub delta: f64,
    /// Angle between the image of the downward vertical at `(0,t)` and the
    /// downward vertical.
    pub theta: f64,
}

/// Point of the hyperboloid over `(x, h)` in the upper half-space.
fn hyperboloid(x: &Vector, h: f64) -> Vector {
    let n = x.len();
    let r2 = x.norm_squared() + h * h;
    let mut v = Vector::zeros(n + 2);
    for i in 0..n {
        v[i] = x[i] / h;
    }
    v[n] = (1.0 - r2) / (2.0 * h);
    v[n + 1] = (1.0 + r2) / (2.0 * h);
    v
}

fn upper_half_space(v: &Vector) -> (Vector, f64) {
    let n = v.len() - 2;
    let h = 1.0 / (v[n] + v[n + 1]);
    (v.rows(0, n) * h, h)
}

fn recurrence(g: &MoebiusMap, t: f64, length: f64, shift: &Vector) -> (f64, f64) {
    let n = g.dim();
    // Work in coordinates where the basepoint is the origin.
    let tr = MoebiusMap::translation(shift);
    let g = match tr.inverse().compose(g).and_then(|m| m.compose(&tr)) {
        Ok(m) => m,
        Err(_) => return (f64::NAN, f64::NAN),
    };
    let origin = Vector::zeros(n);
    let p = g.matrix() * hyperboloid(&origin, t);
    let q = hyperboloid(&origin, t * (-length).exp());
    let delta = (-lorentz_dot(&p, &q)).max(1.0).acosh();
    let step: f64 = 1e-6;
    let p2 = g.matrix() * hyperboloid(&origin, t * (-step).exp());
    let (x1, h1) = upper_half_space(&p);
    let (x2, h2) = upper_half_space(&p2);
    let mut d = Vector::zeros(n + 1);
    d.rows_mut(0, n).copy_from(&(x2 - x1));
    d[n] = h2 - h1;
    let cos = (-d[n] / d.norm()).clamp(-1.0, 1.0);
    (delta, cos.acos())
}

/// Scores one loxodromic element; `shift` is the basepoint.
pub fn witness_for(record: &GroupElementRecord, data: &LoxodromicData, shift: &Vector) -> Option<PoleSearchWitness> {
    let eps = data.attracting.coords()? - shift;
    let eps_norm = eps.norm();
    let m_norm = match data.repelling.coords() {
        Some(m) => (m - shift).norm(),
        None => f64::INFINITY,
    };
    let l = data.length;
    let el = l.exp();
    let (t, score) = if eps_norm == 0.0 || m_norm.is_infinite() {
        (1.0, 0.0)
    } else {
        ((eps_norm * m_norm * el).sqrt().min(1.0), (eps_norm * el / m_norm).sqrt())
    };
    let ratios = (eps_norm * el / t, t / m_norm);
    let (delta, theta) = recurrence(&record.map, t, l, shift);
    Some(PoleSearchWitness { record: record.clone(), length: l, eps_norm, m_norm, t, score, ratios, delta, theta })
}

fn by_score(a: &PoleSearchWitness, b: &PoleSearchWitness) -> Ordering {
    a.score
        .partial_cmp(&b.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.record.word.len().cmp(&b.record.word.len()))
        .then_with(|| a.record.word.cmp(&b.record.word))
}

/// Scores every loxodromic element within the word budget and returns the
/// best `keep` witnesses, ascending by score.
pub fn pole_density_search(group: &KleinianGroup, options: &PoleSearchOptions) -> Result<Vec<PoleSearchWitness>> {
    let shift = options.basepoint.clone().unwrap_or_else(|| Vector::zeros(group.dim()));
    if shift.len() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: shift.len() });
    }
    let enumeration = EnumerationOptions {
        max_word_length: options.max_word_length,
        even_only: options.even_only,
        max_elements: options.max_elements,
        classify: true,
    };
    let mut best: Vec<PoleSearchWitness> = Vec::new();
    for record in ElementStream::new(group, enumeration) {
        let record = record?;
        let Ok(c) = &record.classification else { continue };
        let Some(data) = c.loxodromic() else { continue };
        if let Some(w) = witness_for(&record, data, &shift) {
            best.push(w);
            if best.len() > 4 * options.keep.max(1) {
                best.sort_by(by_score);
                best.truncate(options.keep.max(1));
            }
        }
    }
    if best.is_empty() {
        return Err(Error::NoLoxodromicFound);
    }
    best.sort_by(by_score);
    best.truncate(options.keep.max(1));
    Ok(best)
}

/// Equilateral triple on the unit circle of the first coordinate plane.
pub fn canonical_triple(n: usize) -> [BoundaryPoint; 3] {
    let pt = |k: f64| {
        let a = 2.0 * PI * k / 3.0;
        let mut x = Vector::zeros(n);
        x[0] = a.cos();
        if n > 1 {
            x[1] = a.sin();
        }
        BoundaryPoint::finite(x).expect("finite")
    };
    [pt(0.0), pt(1.0), pt(2.0)]
}

fn min_separation(phi: &MoebiusMap, triple: &[BoundaryPoint; 3]) -> Result<f64> {
    let a = phi.apply(&triple[0])?;
    let b = phi.apply(&triple[1])?;
    let c = phi.apply(&triple[2])?;
    Ok(a.chordal_distance(&b).min(b.chordal_distance(&c)).min(a.chordal_distance(&c)))
}

#[derive(Clone, Debug)]
pub struct Normalization {
    pub g: GroupElementRecord,
    pub phi: MoebiusMap,
    pub separation: f64,
    /// Separation of the triple under `T` itself.
    pub initial_separation: f64,
}

/// Finds `g` in the word budget maximizing the smallest pairwise chordal
/// distance of `g⁻¹T` applied to `triple`. Ties (within `1e-12`) go to the
/// first element in enumeration order, which is shortlex order.
pub fn normalize_by_group(
    group: &KleinianGroup,
    t: &MoebiusMap,
    triple: &[BoundaryPoint; 3],
    options: &EnumerationOptions,
) -> Result<Normalization> {
    for i in 0..3 {
        for j in 0..i {
            if triple[i].chordal_distance(&triple[j]) == 0.0 {
                return Err(Error::CoincidentPoints);
            }
        }
    }
    let initial_separation = min_separation(t, triple)?;
    let opts = EnumerationOptions { classify: false, ..options.clone() };
    let mut best: Option<(GroupElementRecord, MoebiusMap, f64)> = None;
    for record in ElementStream::new(group, opts) {
        let record = record?;
        let phi = record.map.inverse().compose(t)?;
        let sep = min_separation(&phi, triple)?;
        let better = match &best {
            None => true,
            Some((_, _, s)) => sep > s + 1e-12,
        };
        if better {
            best = Some((record, phi, sep));
        }
    }
    let (mut g, phi, separation) = best.ok_or(Error::BudgetExceeded { limit: options.max_elements })?;
    g.classification = crate::conformal::classify(&g.map);
    Ok(Normalization { g, phi, separation, initial_separation })
}
