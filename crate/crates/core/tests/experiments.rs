use kleinflow_core::affine::AffineMap;
use kleinflow_core::conformal::ConformalDerivative;
use kleinflow_core::experiments::{
    conjugated_linear, distinctness_certificate, inversion_chart, nonlinear_mu_check, pattern_flow_demo, PatternSet,
};
use kleinflow_core::grid::EvalGrid;
use kleinflow_core::numdiff::nonlinearity_certificate;
use kleinflow_core::renormalization::eccentric_sequence;
use kleinflow_core::tolerances;
use kleinflow_core::{Error, Matrix, Vector};

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

fn mu_parts(a: &Matrix) -> (kleinflow_core::conformal::MoebiusMap, kleinflow_core::conformal::MoebiusMap) {
    let (p, q) = (v(&[0.6, 0.3, -0.2]), v(&[2.5, -1.0, 1.5]));
    (inversion_chart(&p, &q).unwrap(), inversion_chart(&(a * &p), &(a * &q)).unwrap())
}

#[test]
fn certificate_separates_conformal_from_not() {
    let grid = EvalGrid::unit_ball(3);
    let stretch = Matrix::from_diagonal(&v(&[2.0, 1.0, 1.0]));
    let (p1, p2) = mu_parts(&stretch);
    let r = nonlinear_mu_check(&stretch, &p1, &p2, &grid).unwrap();
    assert!(!r.is_linear && r.nonlinearity > 1e-3);
    let double = Matrix::identity(3, 3) * 2.0;
    let (p1, p2) = mu_parts(&double);
    let r = nonlinear_mu_check(&double, &p1, &p2, &grid).unwrap();
    assert!(r.is_linear && r.nonlinearity <= 1e-8, "{}", r.nonlinearity);
}

#[test]
fn eccentric_sequence_of_nonlinear_mu() {
    let a = Matrix::from_diagonal(&v(&[2.0, 1.0, 1.0]));
    let (p1, p2) = mu_parts(&a);
    let mu = conjugated_linear(&a, &p1, &p2);
    let half = ConformalDerivative { lambda: 0.5, orthogonal: Matrix::identity(3, 3) };
    let grid = EvalGrid::unit_ball(3);
    let s = eccentric_sequence(&mu, &half, &half, 20, &grid).unwrap();
    assert_eq!(s.subsequence.len(), 20);
    assert!(s.distinctness > 1e-8, "{}", s.distinctness);
    assert!(s.cauchy_tail <= 1e-4, "{}", s.cauchy_tail);
    assert!((&s.limit - &a).abs().max() < 1e-3);

    let mu_ref = &mu;
    let maps: Vec<_> = s.steps.iter().map(|st| move |x: &Vector| st.apply(mu_ref, x)).collect();
    let cert = distinctness_certificate(&maps, grid.points());
    assert!(cert.all_distinct);
    assert!((cert.min_off_diagonal - s.distinctness).abs() <= 1e-15);
    // Early terms carry visible curvature; it fades like 2⁻ⁿ.
    let c1 = nonlinearity_certificate(&|x: &Vector| s.steps[0].apply(&mu, x), &grid, tolerances::CERTIFICATE_STEP);
    let c8 = nonlinearity_certificate(&|x: &Vector| s.steps[7].apply(&mu, x), &grid, tolerances::CERTIFICATE_STEP);
    assert!(c1 > 1e-3 && c8 < c1 / 50.0, "{c1} {c8}");
}

#[test]
fn circle_grid_contradiction_pair() {
    let p = PatternSet::circle_grid(2, 3, 1.0, 0.25, 32).unwrap();
    let c = v(&[0.37, 0.11]);
    let w = pattern_flow_demo(&p, |t| AffineMap::translation_by(&c * t), 4.0, 1 << 20).unwrap();
    assert!(w.gap > 0.0);
    assert!(w.near_distance < w.floor);
    // 4|c|/2 ≈ 0.77 is the first halving below the unit spacing.
    assert_eq!(w.n, 2);
    assert!(w.probe_spacing > 0.0 && w.probe_spacing < 0.1);
}

#[test]
fn rotation_preserving_concentric_pattern() {
    let p = PatternSet::concentric(2, &[0.5, 1.0, 1.5], 24).unwrap();
    let rot =
        |t: f64| AffineMap { linear: kleinflow_core::linalg::plane_rotation(2, 0, 1, t), translation: v(&[0.0, 0.0]) };
    let r = pattern_flow_demo(&p, rot, std::f64::consts::TAU / 24.0, 1 << 12);
    assert!(matches!(r, Err(Error::NoWitnessFound)));
}
