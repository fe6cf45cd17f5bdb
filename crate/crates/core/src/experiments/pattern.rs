use alloc::vec::Vec;

use crate::affine::{flow_check, AffineMap};
use crate::linalg::Vector;
use crate::tolerances;
use crate::{Error, Result};

/// Hausdorff distance between two finite point sets. `∞` if either is empty.
pub fn hausdorff(a: &[Vector], b: &[Vector]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |p: &[Vector], q: &[Vector]| {
        p.iter().fold(0.0f64, |acc, x| acc.max(q.iter().fold(f64::INFINITY, |m, y| m.min((x - y).norm()))))
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Finite truncation of a pattern: a list of sampled compact sets.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternSet {
    elements: Vec<Vec<Vector>>,
    floor: f64,
}

impl PatternSet {
    /// Rejects singletons, ragged dimensions and coincident elements. The
    /// discreteness floor is always recomputed here.
    pub fn new(elements: Vec<Vec<Vector>>) -> Result<Self> {
        let dim = elements.first().and_then(|e| e.first()).map(|p| p.len()).unwrap_or(0);
        if elements.len() < 2 || dim == 0 {
            return Err(Error::InvalidInput("pattern needs at least two nonempty elements".into()));
        }
        for e in &elements {
            if e.len() < 2 {
                return Err(Error::InvalidInput("pattern element is a singleton".into()));
            }
            if let Some(p) = e.iter().find(|p| p.len() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
        }
        let mut floor = f64::INFINITY;
        for i in 0..elements.len() {
            for j in 0..i {
                floor = floor.min(hausdorff(&elements[i], &elements[j]));
            }
        }
        if !(floor > 0.0) {
            return Err(Error::InvalidInput("pattern elements coincide".into()));
        }
        Ok(Self { elements, floor })
    }

    /// Circles of `radius` in the `e₁e₂`-plane centred on the integer grid
    /// `{−k..k}² · spacing`, each sampled at `samples` points.
    pub fn circle_grid(dim: usize, k: i32, spacing: f64, radius: f64, samples: usize) -> Result<Self> {
        let mut elements = Vec::new();
        for i in -k..=k {
            for j in -k..=k {
                let c = Vector::from_fn(dim, |r, _| match r {
                    0 => i as f64 * spacing,
                    1 => j as f64 * spacing,
                    _ => 0.0,
                });
                elements.push(circle(&c, radius, samples));
            }
        }
        Self::new(elements)
    }

    /// Circles about the origin in the `e₁e₂`-plane.
    pub fn concentric(dim: usize, radii: &[f64], samples: usize) -> Result<Self> {
        Self::new(radii.iter().map(|&r| circle(&Vector::zeros(dim), r, samples)).collect())
    }

    pub fn elements(&self) -> &[Vec<Vector>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Smallest Hausdorff distance between two elements.
    pub fn discreteness_floor(&self) -> f64 {
        self.floor
    }

    /// Largest gap between consecutive samples of one element.
    pub fn probe_spacing(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| {
                e.iter()
                    .map(|x| e.iter().filter(|y| *y != x).fold(f64::INFINITY, |m, y| m.min((x - y).norm())))
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max)
    }

    /// Hausdorff distance from `set` to the nearest element, and its index.
    pub fn nearest(&self, set: &[Vector]) -> (usize, f64) {
        self.elements.iter().enumerate().map(|(i, e)| (i, hausdorff(set, e))).fold((0, f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        })
    }
}

fn circle(c: &Vector, r: f64, samples: usize) -> Vec<Vector> {
    (0..samples)
        .map(|k| {
            let th = core::f64::consts::TAU * k as f64 / samples as f64;
            let mut p = c.clone();
            p[0] += r * th.cos();
            p[1] += r * th.sin();
            p
        })
        .collect()
}

/// The contradiction pair: `f_{t₀}(J)` is no pattern element, yet
/// `f_{t₀/n}(J)` is closer to `J` than any two elements are to each other.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternFlowWitness {
    pub element: usize,
    pub t0: f64,
    /// Hausdorff distance from `f_{t₀}(J)` to the nearest element.
    pub gap: f64,
    pub n: u64,
    /// Hausdorff distance from `f_{t₀/n}(J)` to `J`.
    pub near_distance: f64,
    pub floor: f64,
    pub probe_spacing: f64,
}

/// Looks for `J` and `n ≤ n_max` (powers of two) exhibiting the pair.
pub fn pattern_flow_demo<F>(pattern: &PatternSet, flow: F, t0: f64, n_max: u64) -> Result<PatternFlowWitness>
where
    F: Fn(f64) -> AffineMap,
{
    if !(t0.is_finite() && t0 != 0.0) {
        return Err(Error::InvalidInput("t0 must be finite and nonzero".into()));
    }
    let ts = [0.0, 0.25 * t0, 0.5 * t0, t0, -0.5 * t0];
    if !flow_check(&flow, &ts).passed() {
        return Err(Error::TrivialFlow);
    }
    let floor = pattern.discreteness_floor();
    let ft0 = flow(t0);
    let mut best: Option<(usize, f64)> = None;
    for (i, j) in pattern.elements().iter().enumerate() {
        let moved: Vec<Vector> = j.iter().map(|x| ft0.apply(x)).collect();
        let (_, gap) = pattern.nearest(&moved);
        if gap > tolerances::DISTINCT && best.is_none_or(|(_, g)| gap > g) {
            best = Some((i, gap));
        }
    }
    let (element, gap) = best.ok_or(Error::NoWitnessFound)?;
    let j = &pattern.elements()[element];
    let mut n = 1u64;
    while n <= n_max {
        let fs = flow(t0 / n as f64);
        let moved: Vec<Vector> = j.iter().map(|x| fs.apply(x)).collect();
        let near_distance = hausdorff(&moved, j);
        if near_distance < floor {
            return Ok(PatternFlowWitness {
                element,
                t0,
                gap,
                n,
                near_distance,
                floor,
                probe_spacing: pattern.probe_spacing(),
            });
        }
        n = n.saturating_mul(2);
    }
    Err(Error::NoWitnessFound)
}
