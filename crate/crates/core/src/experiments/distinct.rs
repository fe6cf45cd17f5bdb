use crate::linalg::{Matrix, Vector};
use crate::tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct DistinctnessCertificate {
    /// Symmetric matrix of `max_probe ‖fᵢ(p) − fⱼ(p)‖`.
    pub distances: Matrix,
    /// Smallest off-diagonal entry, `∞` for fewer than two maps.
    pub min_off_diagonal: f64,
    /// Every pair differs by more than `DISTINCT` somewhere on the probes.
    /// False for fewer than two maps.
    pub all_distinct: bool,
}

/// Pairwise sup-distances of `maps` on `probes`. Non-finite values count as
/// infinitely far apart.
pub fn distinctness_certificate<F>(maps: &[F], probes: &[Vector]) -> DistinctnessCertificate
where
    F: Fn(&Vector) -> Vector,
{
    let k = maps.len();
    let values: alloc::vec::Vec<alloc::vec::Vec<Vector>> =
        maps.iter().map(|f| probes.iter().map(f).collect()).collect();
    let mut distances = Matrix::zeros(k, k);
    let mut min_off_diagonal = f64::INFINITY;
    for i in 0..k {
        for j in 0..i {
            let d = values[i].iter().zip(&values[j]).fold(0.0f64, |acc, (a, b)| {
                let d = (a - b).norm();
                if d.is_finite() {
                    acc.max(d)
                } else {
                    f64::INFINITY
                }
            });
            distances[(i, j)] = d;
            distances[(j, i)] = d;
            min_off_diagonal = min_off_diagonal.min(d);
        }
    }
    DistinctnessCertificate {
        distances,
        min_off_diagonal,
        all_distinct: k >= 2 && min_off_diagonal > tolerances::DISTINCT,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{realize_based_linear, BasedLinearMap, BoundaryPoint};
    use crate::grid::EvalGrid;

    #[test]
    fn identical_maps_are_zero() {
        let f = |x: &Vector| x * 2.0;
        let grid = EvalGrid::unit_ball(2);
        let c = distinctness_certificate(&[f, f, f], grid.points());
        assert_eq!(c.distances, Matrix::zeros(3, 3));
        assert!(!c.all_distinct);
    }

    #[test]
    fn equal_based_data_same_map() {
        let b = BasedLinearMap {
            attracting: BoundaryPoint::from_slice(&[0.1, 0.2]).unwrap(),
            repelling: BoundaryPoint::from_slice(&[3.0, -1.0]).unwrap(),
            multiplier: Matrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.4]),
        };
        let (r1, r2) = (realize_based_linear(&b).unwrap(), realize_based_linear(&b.clone()).unwrap());
        let maps: [&dyn Fn(&Vector) -> Vector; 2] = [&|x| r1.eval(x), &|x| r2.eval(x)];
        let c = distinctness_certificate(&maps, EvalGrid::unit_ball(2).points());
        assert_eq!(c.min_off_diagonal, 0.0);
    }

    #[test]
    fn scalings_are_distinct() {
        let maps: alloc::vec::Vec<_> = (1..=5).map(|k| move |x: &Vector| x * k as f64).collect();
        let c = distinctness_certificate(&maps, EvalGrid::unit_ball(2).points());
        assert!(c.all_distinct);
        assert!((c.min_off_diagonal - 1.0).abs() < 1e-12);
        assert!(!distinctness_certificate(&maps[..1], &[]).all_distinct);
    }
}
