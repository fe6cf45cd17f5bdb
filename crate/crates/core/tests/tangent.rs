use kleinflow_core::grid::unit_directions;
use kleinflow_core::linalg::plane_rotation;
use kleinflow_core::tangent::{nonvanishing_search, NonvanishingVerdict, TangentIdentityParams, WitnessSource};
use kleinflow_core::{Error, Matrix, Vector};
use proptest::prelude::*;

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

fn params(lambda: f64) -> TangentIdentityParams {
    TangentIdentityParams::new(
        lambda,
        plane_rotation(3, 0, 1, 0.7),
        Matrix::from_diagonal(&v(&[2.0, 1.0, 1.0])),
        v(&[0.3, -0.2, 0.5]),
        v(&[0.4, 0.1, -0.3]),
    )
    .unwrap()
}

fn vec3() -> impl Strategy<Value = Vector> {
    prop::array::uniform3(-2.0f64..2.0)
        .prop_map(|a| Vector::from_column_slice(&a))
        .prop_filter("nonzero", |x| x.norm() > 1e-3)
}

proptest! {
    #[test]
    fn sigma_vanishes_for_conformal(s in 0.2f64..5.0, th in -3.0f64..3.0, ph in -3.0f64..3.0, x in vec3(), y in vec3()) {
        let a = plane_rotation(3, 1, 2, ph) * s;
        let p = TangentIdentityParams::new(0.5, plane_rotation(3, 0, 1, th), a, v(&[0.3, 0.1, 0.0]), v(&[0.0, 1.0, 0.0])).unwrap();
        prop_assert!(p.sigma(&x, &y).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn phi_is_degree_zero(w in vec3(), s in 0.01f64..100.0) {
        let p = params(0.5);
        let base = p.phi(&w).unwrap();
        let scaled = p.phi(&(&w * s)).unwrap();
        prop_assert!((scaled - &base).norm() <= 1e-9 * base.norm().max(1.0));
    }
}

#[test]
fn sigma_detects_nonconformal() {
    let p = params(0.5);
    let dirs = unit_directions(3, 1000, 11);
    let worst = dirs.windows(2).map(|w| p.sigma(&w[0], &w[1]).unwrap().abs()).fold(0.0f64, f64::max);
    assert!(worst > 1e-6, "{worst}");
}

#[test]
fn expansion_error_is_order_one_over_w() {
    let p = params(0.5);
    for d in unit_directions(3, 20, 3) {
        let scaled: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&s| {
                let w = &d * s;
                let (direct, expansion) = p.g2_triple_prime(&w).unwrap();
                (direct - expansion).norm() * s
            })
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), x| (l.min(*x), h.max(*x)));
        assert!(hi <= 2.0 * lo, "{scaled:?}");
    }
}

#[test]
fn below_validity_radius_rejected() {
    let p = params(0.5);
    let r = p.g2_triple_prime(&v(&[0.1, 0.0, 0.0]));
    assert!(matches!(r, Err(Error::BelowValidityRadius { .. })));
    assert!(matches!(p.phi(&Vector::zeros(3)), Err(Error::ZeroW)));
}

#[test]
fn small_lambda_witness() {
    let p = params(1e-3);
    match nonvanishing_search(&p, 64, 1) {
        NonvanishingVerdict::Witness { w, phi, norm, source } => {
            assert_eq!(source, WitnessSource::Independent);
            assert!(norm >= 1e-3);
            assert!((p.phi(&w).unwrap() - phi).norm() == 0.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn tangent_map_is_near_identity() {
    let p = params(0.5);
    let w = v(&[300.0, -200.0, 500.0]);
    let step = p.tangent_map(&w) - &w;
    let phi = p.phi(&w).unwrap();
    assert!((step - &phi).norm() <= 1e-1 * phi.norm(), "{}", phi.norm());
}
