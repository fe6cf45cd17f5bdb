use kleinflow_core::conformal::{
    based_normalizer, classify, cross_ratio, BasedFrame, BoundaryPoint, Classification, MoebiusMap,
};
use kleinflow_core::groups::moebius_from_sl2c;
use kleinflow_core::linalg::plane_rotation;
use kleinflow_core::numdiff::richardson_jacobian;
use kleinflow_core::{Matrix, Vector};
use num_complex::Complex64;
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vector> {
    prop::array::uniform3(-3.0f64..3.0).prop_map(|a| Vector::from_column_slice(&a))
}

/// Similarity, inversion in a sphere about `c`, then a rotation.
fn moebius() -> impl Strategy<Value = MoebiusMap> {
    (0.3f64..3.0, -3.0f64..3.0, vec3(), vec3(), 0.5f64..2.0).prop_map(|(l, ang, b, c, r)| {
        let s = MoebiusMap::similarity(l, &plane_rotation(3, 0, 2, ang), &b).unwrap();
        let inv = MoebiusMap::sphere_inversion(&c, r).unwrap();
        let rot = MoebiusMap::orthogonal(&plane_rotation(3, 1, 2, 0.5 * ang)).unwrap();
        rot.compose(&inv).unwrap().compose(&s).unwrap()
    })
}

fn rounding_floor(m: &MoebiusMap) -> f64 {
    let n = m.matrix().abs().max();
    1e-9f64.max(1e-14 * n * n)
}

proptest! {
    #[test]
    fn composition_matches_sequential(f in moebius(), g in moebius(), x in vec3()) {
        let fg = f.compose(&g).unwrap();
        // Rounding in MᵀJM grows like ε‖M‖², and each factor's defect is
        // amplified by the other factor's norm squared.
        let sq = |m: &MoebiusMap| m.matrix().abs().max().powi(2);
        let propagated = 4.0 * (sq(&f) * g.lorentz_defect() + sq(&g) * f.lorentz_defect());
        let tol = rounding_floor(&fg) + propagated;
        prop_assert!(fg.lorentz_defect() <= tol, "{} {}", fg.lorentz_defect(), tol);
        let p = BoundaryPoint::finite(x).unwrap();
        let lhs = fg.apply(&p).unwrap();
        let rhs = f.apply(&g.apply(&p).unwrap()).unwrap();
        prop_assert!(lhs.chordal_distance(&rhs) <= tol);
    }

    #[test]
    fn inverse_undoes(f in moebius(), x in vec3()) {
        let p = BoundaryPoint::finite(x).unwrap();
        let back = f.inverse().apply(&f.apply(&p).unwrap()).unwrap();
        prop_assert!(back.chordal_distance(&p) <= rounding_floor(&f));
    }

    #[test]
    fn cross_ratio_invariant(f in moebius(), a in vec3(), b in vec3(), c in vec3(), d in vec3()) {
        let pts: Vec<BoundaryPoint> = [a, b, c, d].into_iter().map(|v| BoundaryPoint::finite(v).unwrap()).collect();
        prop_assume!((0..4).all(|i| (0..i).all(|j| pts[i].chordal_distance(&pts[j]) > 1e-2)));
        let before = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let img: Vec<BoundaryPoint> = pts.iter().map(|p| f.apply(p).unwrap()).collect();
        let after = cross_ratio(&img[0], &img[1], &img[2], &img[3]).unwrap();
        prop_assert!((after - before).abs() <= 1e-8 * before.max(1.0), "{} {}", before, after);
    }

    #[test]
    fn derivative_is_conformal(f in moebius(), x in vec3()) {
        let d = match f.derivative_at(&x) { Ok(d) => d, Err(_) => return Ok(()) };
        prop_assume!(d.lambda < 1e3 && d.lambda > 1e-3);
        let fd = richardson_jacobian(&|y: &Vector| f.eval(y), &x, 1e-4 / d.lambda.max(1.0));
        let rel = (&fd - d.matrix()).abs().max() / d.lambda;
        prop_assert!(rel <= 1e-5, "{}", rel);
    }

    #[test]
    fn normalizer_conditions(eps in vec3(), m in vec3()) {
        prop_assume!((&eps - &m).norm() > 0.1);
        let e = BoundaryPoint::finite(eps.clone()).unwrap();
        let mm = BoundaryPoint::finite(m.clone()).unwrap();
        let frame = BasedFrame::new(&e, &mm).unwrap();
        prop_assert!((frame.forward(&Vector::zeros(3)) - &eps).norm() <= 1e-12);
        prop_assert!(frame.forward_point(&BoundaryPoint::infinity(3)).unwrap().approx_eq(&mm, 1e-12));
        let jac = richardson_jacobian(&|x: &Vector| frame.forward(x), &Vector::zeros(3), 1e-4);
        prop_assert!((jac - Matrix::identity(3, 3)).abs().max() <= 1e-7);
        let s = based_normalizer(&e, &mm).unwrap();
        let y = Vector::from_column_slice(&[0.2, -0.1, 0.05]);
        prop_assert!((s.eval(&y) - frame.forward(&y)).norm() <= 1e-8 * (1.0 + m.norm()));
    }
}

#[test]
fn sl2c_matches_complex_arithmetic() {
    let mut rng = 0x2545f491u64;
    let mut next = move || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    };
    for _ in 0..200 {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (a, b, cc, d) = (c(next(), next()), c(next(), next()), c(next(), next()), c(next(), next()));
        if (a * d - b * cc).norm() < 0.1 {
            continue;
        }
        let g = moebius_from_sl2c([a.re, a.im], [b.re, b.im], [cc.re, cc.im], [d.re, d.im]).unwrap();
        let z = c(next(), next());
        let den = cc * z + d;
        if den.norm() < 0.05 {
            continue;
        }
        let want = (a * z + b) / den;
        let got = g.eval(&Vector::from_column_slice(&[z.re, z.im]));
        let err = (Complex64::new(got[0], got[1]) - want).norm();
        assert!(err <= 1e-9 * want.norm().max(1.0), "{err}");
    }
}

#[test]
fn dilation_by_two_poles() {
    let t = MoebiusMap::dilation(3, 2.0).unwrap();
    let Classification::Loxodromic(data) = classify(&t).unwrap() else { panic!("not loxodromic") };
    assert!(data.attracting.is_infinity());
    assert!(data.repelling.approx_eq(&BoundaryPoint::origin(3), 1e-12));
    assert!((data.length - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn elliptic_and_identity() {
    let r = MoebiusMap::orthogonal(&plane_rotation(3, 0, 1, 0.9)).unwrap();
    match classify(&r).unwrap() {
        Classification::Elliptic { angle } => assert!((angle - 0.9).abs() < 1e-9),
        other => panic!("{}", other.label()),
    }
    assert_eq!(classify(&MoebiusMap::identity(3)).unwrap(), Classification::Identity);
    let par = MoebiusMap::translation(&Vector::from_column_slice(&[1.0, 0.0, 0.0]));
    assert_eq!(classify(&par).unwrap().label(), "parabolic");
}
