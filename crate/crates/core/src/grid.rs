//! Compact evaluation grids. Every "uniformly on compacts" statement in the
//! crate is sampled on one of these.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Vector;

pub const DEFAULT_POINTS: usize = 200;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    points: Vec<Vector>,
    radius: f64,
    seed: u64,
}

impl EvalGrid {
    /// Origin plus `count − 1` seeded points of the closed ball of `radius`;
    /// half of them lie on the bounding sphere, where sup-norms are usually
    /// attained.
    pub fn ball(dim: usize, radius: f64, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count);
        points.push(Vector::zeros(dim));
        let rest = count.saturating_sub(1);
        for i in 0..rest {
            let dir = random_unit(&mut rng, dim);
            let r = if i % 2 == 0 {
                1.0
            } else {
                let u: f64 = rng.random();
                u.powf(1.0 / dim as f64)
            };
            points.push(dir * (r * radius));
        }
        EvalGrid { points, radius, seed }
    }

    /// The default 200-point unit-ball grid.
    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(dim, 1.0, DEFAULT_POINTS, DEFAULT_SEED)
    }

    pub fn from_points(points: Vec<Vector>) -> Self {
        let radius = points.iter().fold(0.0, |a: f64, p| a.max(p.norm()));
        EvalGrid { points, radius, seed: 0 }
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// `sup_x ‖f(x) − g(x)‖` over the grid; non-finite values propagate as `∞`.
    pub fn sup_distance<F, G>(&self, f: F, g: G) -> f64
    where
        F: Fn(&Vector) -> Vector,
        G: Fn(&Vector) -> Vector,
    {
        self.points.iter().fold(0.0, |acc: f64, x| {
            let d = (f(x) - g(x)).norm();
            if d.is_finite() {
                acc.max(d)
            } else {
                f64::INFINITY
            }
        })
    }
}

/// Uniform direction on the unit sphere of `ℝ^dim`.
pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| {
            // Box–Muller on two uniforms gives a gaussian coordinate.
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
        });
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Seeded unit directions, used for direction sweeps of homogeneous fields.
pub fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_unit(&mut rng, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_origin_and_sphere_points() {
        let g = EvalGrid::unit_ball(3);
        assert_eq!(g.len(), 200);
        assert_eq!(g.points()[0].norm(), 0.0);
        let on_sphere = g.points().iter().filter(|p| (p.norm() - 1.0).abs() < 1e-12).count();
        assert_eq!(on_sphere, 100);
        assert!(g.points().iter().all(|p| p.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn grid_is_deterministic() {
        assert_eq!(EvalGrid::unit_ball(2), EvalGrid::unit_ball(2));
        assert_ne!(EvalGrid::ball(2, 1.0, 50, 1), EvalGrid::ball(2, 1.0, 50, 2));
    }
}
