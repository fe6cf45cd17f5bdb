use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use super::{aff_exp, aff_log, fit_near_identity, iterate, safety_radius, AffineField, AffineMap};
use crate::grid::EvalGrid;
use crate::linalg::{op_norm, Vector};
use crate::tolerances;
use crate::{Error, Result};

type MapFn<'a> = Box<dyn Fn(&Vector) -> Vector + 'a>;

/// One term `f_n = id + A_n + E_n`.
pub struct EulerEntry<'a> {
    pub index: usize,
    pub field: AffineField,
    /// `sup ‖E_n‖` on the fitting grid.
    pub residual: f64,
    map: MapFn<'a>,
}

impl EulerEntry<'_> {
    pub fn eval(&self, x: &Vector) -> Vector {
        (self.map)(x)
    }

    /// `sup ‖E_n‖ / ‖A_n‖`.
    pub fn ratio(&self) -> f64 {
        self.residual / self.field.norm()
    }
}

impl fmt::Debug for EulerEntry<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EulerEntry")
            .field("index", &self.index)
            .field("field", &self.field)
            .field("residual", &self.residual)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Default)]
pub struct EulerSequence<'a> {
    entries: Vec<EulerEntry<'a>>,
}

impl<'a> EulerSequence<'a> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Exact near-identity affine maps `id + A_n`.
    pub fn from_fields(fields: Vec<(usize, AffineField)>) -> Self {
        let mut s = Self::new();
        for (index, field) in fields {
            let map = field.plus_identity();
            s.entries.push(EulerEntry { index, field, residual: 0.0, map: Box::new(move |x| map.apply(x)) });
        }
        s
    }

    /// Adds `f_n`, splitting it into its least-squares affine part on `grid`
    /// and the residual.
    pub fn push_map<F>(&mut self, index: usize, f: F, grid: &EvalGrid) -> Result<()>
    where
        F: Fn(&Vector) -> Vector + 'a,
    {
        let (field, residual) = fit_near_identity(&f, grid)?;
        self.entries.push(EulerEntry { index, field, residual, map: Box::new(f) });
        Ok(())
    }

    pub fn entries(&self) -> &[EulerEntry<'a>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `‖A_n‖ → 0` and `sup‖E_n‖/‖A_n‖ → 0` over the stored window, read as
    /// non-increasing sequences.
    pub fn invariants_hold(&self) -> bool {
        let norms: Vec<f64> = self.entries.iter().map(|e| e.field.norm()).collect();
        let ratios: Vec<f64> = self.entries.iter().map(|e| e.ratio()).collect();
        let non_increasing = |v: &[f64]| v.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9) + 1e-15);
        non_increasing(&norms) && non_increasing(&ratios)
    }
}

/// How the time scale `t_n` of each term is read off.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    /// `t_n = ‖log(id + A_n)‖`; the detected direction has unit norm.
    Intrinsic,
    /// `t_n = 1/n` with `n` the entry index; the detected generator is
    /// `lim n·log(id + A_n)` and `m_n = ⌊nt⌋`.
    Index,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerOptions {
    pub t: f64,
    pub clock: Clock,
    pub grid: EvalGrid,
    pub r_max: f64,
    /// Known generator to measure errors against; the detected one is used
    /// otherwise.
    pub reference: Option<AffineField>,
}

impl EulerOptions {
    pub fn new(t: f64, clock: Clock, grid: EvalGrid) -> Self {
        let r_max = safety_radius(&grid);
        Self { t, clock, grid, r_max, reference: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerRow {
    pub index: usize,
    pub t_n: f64,
    pub m: u64,
    pub sup_error: f64,
    /// `4·C·m·sup‖E_n‖ + sup‖g_n^m − e^{tA}‖` with `g_n = id + A_n` and `C`
    /// the Lipschitz bound of `g_n^m`.
    pub bound: f64,
    pub bound_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerReport {
    pub generator: AffineField,
    pub flow: AffineMap,
    pub rows: Vec<EulerRow>,
    /// Entries outside the largest direction cluster.
    pub excluded: Vec<usize>,
    pub decreasing: bool,
    /// Distance between detected and reference generators, when given.
    pub direction_gap: Option<f64>,
}

/// Iterates each `f_n` `m_n` times and compares with `e^{tA}` for the
/// generator `A` extracted from the largest cluster of directions.
pub fn euler_limit(seq: &EulerSequence<'_>, options: &EulerOptions) -> Result<EulerReport> {
    if !(options.t > 0.0) {
        return Err(Error::InvalidInput("flow time must be positive".into()));
    }
    struct Candidate {
        pos: usize,
        t_n: f64,
        dir: AffineField,
    }
    let mut cands = Vec::new();
    for (pos, e) in seq.entries.iter().enumerate() {
        let Ok(log) = aff_log(&e.field.plus_identity()) else { continue };
        let t_n = match options.clock {
            Clock::Intrinsic => log.norm(),
            Clock::Index => 1.0 / e.index.max(1) as f64,
        };
        if !(t_n > 0.0) {
            continue;
        }
        cands.push(Candidate { pos, t_n, dir: log.scale(1.0 / t_n) });
    }
    // Greedy clustering of directions.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, c) in cands.iter().enumerate() {
        let found = clusters.iter().position(|cl| {
            let rep = &cands[cl[0]].dir;
            c.dir.sub(rep).norm() <= tolerances::DIRECTION_CLUSTER * rep.norm().max(f64::MIN_POSITIVE)
        });
        match found {
            Some(i) => clusters[i].push(k),
            None => clusters.push(alloc::vec![k]),
        }
    }
    let best = clusters
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(a.last().cmp(&b.last())))
        .filter(|cl| cl.len() >= 2)
        .ok_or(Error::NoConvergentDirection)?;
    let detected = cands[*best.last().expect("non-empty")].dir.clone();
    let generator = options.reference.clone().unwrap_or_else(|| detected.clone());
    let direction_gap = options.reference.as_ref().map(|r| r.sub(&detected).norm());
    let flow = aff_exp(&generator.scale(options.t));
    let mut rows = Vec::new();
    for &k in best {
        let c = &cands[k];
        let entry = &seq.entries[c.pos];
        let m = match options.clock {
            Clock::Index => (options.t * entry.index as f64 + 1e-9).floor(),
            Clock::Intrinsic => (options.t / c.t_n).floor(),
        } as u64;
        let orbit = iterate(|x: &Vector| entry.eval(x), m as usize, &options.grid, options.r_max);
        if let Some(step) = orbit.escape {
            return Err(Error::DomainEscape { step });
        }
        let pts = options.grid.points();
        let sup_error = pts.iter().zip(&orbit.points).fold(0.0, |a: f64, (x, y)| a.max((y - flow.apply(x)).norm()));
        let g = entry.field.plus_identity();
        let gm = g.power(m);
        let affine_gap = pts.iter().fold(0.0, |a: f64, x| a.max((gm.apply(x) - flow.apply(x)).norm()));
        let lipschitz = op_norm(&g.linear).max(1.0).powf(m as f64);
        let bound = 4.0 * lipschitz * m as f64 * entry.residual + affine_gap;
        rows.push(EulerRow {
            index: entry.index,
            t_n: c.t_n,
            m,
            sup_error,
            bound,
            bound_ok: sup_error <= bound * (1.0 + 1e-9) + 1e-12,
        });
    }
    let decreasing = rows.windows(2).all(|p| p[1].sup_error <= p[0].sup_error * (1.0 + 1e-9) + 1e-14);
    let in_best: Vec<usize> = best.iter().map(|&k| cands[k].pos).collect();
    let excluded = seq.entries.iter().enumerate().filter(|(p, _)| !in_best.contains(p)).map(|(_, e)| e.index).collect();
    Ok(EulerReport { generator, flow, rows, excluded, decreasing, direction_gap })
}
