//! One function per pipeline. Each returns a verdict, a summary line, scalar
//! metrics and the tables behind them.

use std::collections::BTreeMap;

use kleinflow_core::affine::{
    aff_exp, euler_limit, flow_check, AffineField, AffineMap, Clock, EulerOptions, EulerSequence,
};
use kleinflow_core::conformal::{ConformalDerivative, MoebiusMap};
use kleinflow_core::experiments::{
    conjugated_linear, distinctness_certificate, hausdorff, inversion_chart, nonlinear_mu_check, pattern_flow_demo,
    PatternSet,
};
use kleinflow_core::grid::{unit_directions, EvalGrid};
use kleinflow_core::groups::{commensurability_test, pole_density_search, Commensurability, PoleSearchOptions};
use kleinflow_core::linalg::{max_abs, op_norm, plane_rotation};
use kleinflow_core::numdiff::nonlinearity_certificate;
use kleinflow_core::renormalization::{
    almost_affine_report, choose_dilation, commutator_zoom, eccentric_sequence, geometric_poles, sector_map,
    sector_zoom, zoom_at_fixed_point, SectorParams, ZoomOptions,
};
use kleinflow_core::report::power_exponent;
use kleinflow_core::tangent::{lambda_sweep, nonvanishing_search, NonvanishingVerdict, TangentIdentityParams};
use kleinflow_core::tolerances;
use kleinflow_core::{Error, Matrix, Result, Vector};
use serde_json::{json, Value};

use crate::artifact::{Cell, Table};
use crate::catalog;
use crate::config::{
    matrix, parse_expectation, vector, CommensurabilityParams, CommutatorParams, EccentricParams, EulerParams,
    MuParams, Parameters, PatternParams, PoleParams, Rows, Scenario, TangentParams, ZoomParams,
};
use crate::profile::TolProfile;

#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub seed: u64,
    pub profile: TolProfile,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub passed: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    /// Evaluation grid, when one was used.
    pub grid: Option<Value>,
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

/// JSON has no infinities; those become strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format!("{x}"))
    }
}

#[derive(Default)]
struct Metrics(BTreeMap<String, Value>);

impl Metrics {
    fn f(&mut self, k: &str, x: f64) {
        self.0.insert(k.into(), num(x));
    }

    fn set(&mut self, k: &str, v: Value) {
        self.0.insert(k.into(), v);
    }
}

fn grid(dim: usize, points: usize, seed: u64) -> EvalGrid {
    EvalGrid::ball(dim, 1.0, points, seed)
}

fn grid_spec(g: &EvalGrid) -> Value {
    json!({ "kind": "ball", "dim": g.dim(), "points": g.len(), "radius": g.radius(), "seed": g.seed() })
}

fn mat(rows: &Rows) -> Result<Matrix> {
    matrix(rows).ok_or(Error::InvalidInput("malformed matrix".into()))
}

fn mat_json(m: &Matrix) -> Value {
    json!((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| num(m[(i, j)])).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn vec_json(v: &Vector) -> Value {
    json!(v.iter().map(|x| num(*x)).collect::<Vec<_>>())
}

pub fn run(s: &Scenario, ctx: &Context) -> Result<PipelineOutput> {
    match &s.parameters {
        Parameters::Zoom(p) => zoom(p, ctx),
        Parameters::Pole(p) => pole_density(p, ctx),
        Parameters::Euler(p) => euler(p, ctx),
        Parameters::Commutator(p) => commutator(p, ctx),
        Parameters::Tangent(p) => tangent(p, ctx),
        Parameters::Eccentric(p) => eccentric(p, ctx),
        Parameters::Mu(p) => mu(p, ctx),
        Parameters::Pattern(p) => pattern(p, ctx),
        Parameters::Commensurability(p) => commensurability(p, ctx),
    }
}

fn zoom(p: &ZoomParams, ctx: &Context) -> Result<PipelineOutput> {
    let a = mat(&p.a)?;
    let n = a.nrows();
    let q = p.quadratic;
    let f = |x: &Vector| &a * x + x * (q * x.norm());
    let t = MoebiusMap::dilation(n, p.dilation)?;
    let g = grid(n, p.grid_points, ctx.seed);
    let bound = p.final_bound * ctx.profile.scale();
    let mut opts = ZoomOptions::new(p.n_max, n);
    opts.grid = g.clone();
    opts.threshold = bound;
    if p.known_multiplier {
        opts.multiplier = Some(a.clone());
    }
    let z = zoom_at_fixed_point(f, &t, &opts)?;

    let mut table = Table::new("zoom", &["n", "error", "ratio", "rotation_defect", "in_subsequence"]);
    let mut ratios_ok = true;
    for (k, e) in z.all_errors.iter().enumerate() {
        let ratio = if k == 0 {
            Cell::S(String::new())
        } else {
            let r = e / z.all_errors[k - 1];
            ratios_ok &= r >= p.ratio_window[0] && r <= p.ratio_window[1];
            Cell::F(r)
        };
        let picked = z.report.indices.contains(&(k + 1));
        table.push(vec![Cell::from(k + 1), Cell::F(*e), ratio, Cell::F(z.rotation_defects[k]), Cell::B(picked)]);
    }
    let last = z.all_errors.last().copied().unwrap_or(f64::INFINITY);
    let converged = z.report.is_converged();
    let passed = ratios_ok && last <= bound && converged;

    let mut m = Metrics::default();
    m.f("final_error", last);
    m.f("final_bound", bound);
    m.set("ratios_in_window", json!(ratios_ok));
    m.set("verdict", json!(z.report.verdict.label()));
    m.f("zoom_lambda", z.lambda);
    m.f("multiplier_error", max_abs(&(&z.limit.multiplier - &a)));
    if let Some(r) = z.report.rate {
        m.f("rate", r);
    }
    Ok(PipelineOutput {
        passed,
        summary: format!("error {last:.3e} after {} steps (bound {bound:.1e})", p.n_max),
        metrics: m.0,
        tables: vec![table],
        grid: Some(grid_spec(&g)),
    })
}

fn word_string(w: &[usize]) -> String {
    w.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
}

fn pole_density(p: &PoleParams, _ctx: &Context) -> Result<PipelineOutput> {
    let entry = catalog::lookup(&p.group).ok_or(Error::InvalidInput("unknown catalog group".into()))?;
    let group = (entry.build)()?;
    let mut table = Table::new(
        "pole_density",
        &["budget", "score", "word", "word_length", "translation_length", "eps_norm", "m_norm", "t", "delta", "theta"],
    );
    let mut scores = Vec::new();
    for &budget in &p.budgets {
        let mut opts = PoleSearchOptions::new(budget);
        opts.even_only = p.even_only;
        opts.keep = 1;
        opts.basepoint = p.basepoint.as_deref().map(vector);
        if let Some(k) = p.max_elements {
            opts.max_elements = k;
        }
        let best = pole_density_search(&group, &opts)?.remove(0);
        scores.push(best.score);
        table.push(row![
            budget,
            best.score,
            word_string(&best.record.word),
            best.record.word.len(),
            best.length,
            best.eps_norm,
            best.m_norm,
            best.t,
            best.delta,
            best.theta,
        ]);
    }
    let decreasing = scores.windows(2).all(|w| w[1] < w[0]);
    let passed = scores.len() >= 2 && decreasing;
    let mut m = Metrics::default();
    m.set("group", json!(group.label()));
    m.set("scores", json!(scores.iter().map(|s| num(*s)).collect::<Vec<_>>()));
    m.set("strictly_decreasing", json!(decreasing));
    Ok(PipelineOutput {
        passed,
        summary: format!(
            "best scores {} over budgets {:?}",
            scores.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>().join(", "),
            p.budgets
        ),
        metrics: m.0,
        tables: vec![table],
        grid: None,
    })
}

fn euler(p: &EulerParams, ctx: &Context) -> Result<PipelineOutput> {
    let mut b = mat(&p.linear)?;
    if let Some(target) = p.linear_norm {
        let norm = op_norm(&b);
        if norm == 0.0 {
            return Err(Error::InvalidInput("cannot rescale a zero linear part".into()));
        }
        b *= target / norm;
    }
    let n = b.nrows();
    let field = AffineField::new(b, vector(&p.translation))?;
    let seq = EulerSequence::from_fields(p.n_values.iter().map(|&k| (k, field.scale(1.0 / k as f64))).collect());
    let g = grid(n, p.grid_points, ctx.seed);
    let mut opts = EulerOptions::new(p.t, Clock::Index, g.clone());
    opts.reference = Some(field.clone());
    let report = euler_limit(&seq, &opts)?;

    let c = p.error_constant * ctx.profile.scale();
    let mut table = Table::new("euler", &["n", "m", "sup_error", "scaled_error", "bound", "bound_ok"]);
    let mut within = true;
    for r in &report.rows {
        within &= r.sup_error <= c / r.index as f64;
        table.push(row![r.index, r.m, r.sup_error, r.sup_error * r.index as f64, r.bound, r.bound_ok]);
    }
    let xs: Vec<f64> = report.rows.iter().map(|r| r.index as f64).collect();
    let errs: Vec<f64> = report.rows.iter().map(|r| r.sup_error).collect();
    let exponent = power_exponent(&xs, &errs);
    let rate = exponent.map(|e| -e);
    let rate_ok = rate.is_some_and(|r| r >= p.exponent_window[0] && r <= p.exponent_window[1]);
    let bounds_ok = report.rows.iter().all(|r| r.bound_ok);
    let generator_error = report.generator.sub(&field).norm();
    let passed = within && rate_ok && bounds_ok && report.rows.len() == p.n_values.len();

    let mut m = Metrics::default();
    m.f("error_constant", c);
    m.set("errors_within_c_over_n", json!(within));
    m.f("rate", rate.unwrap_or(f64::NAN));
    m.set("rate_in_window", json!(rate_ok));
    m.set("bounds_ok", json!(bounds_ok));
    m.f("linear_norm", op_norm(&field.linear));
    m.f("generator_error", generator_error);
    m.set("excluded", json!(report.excluded));
    Ok(PipelineOutput {
        passed,
        summary: format!(
            "errors {} decay at rate {:.3}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", "),
            rate.unwrap_or(f64::NAN)
        ),
        metrics: m.0,
        tables: vec![table],
        grid: Some(grid_spec(&g)),
    })
}

fn commutator(p: &CommutatorParams, ctx: &Context) -> Result<PipelineOutput> {
    let b = mat(&p.b)?;
    let n = b.nrows();
    let b_inv = b.clone().try_inverse().ok_or(Error::NonInvertible)?;
    let poles: Vec<_> = (1..=p.n_max)
        .map(|k| {
            let mut pd = geometric_poles(n, k);
            pd.rotation = plane_rotation(n, 0, 1, p.rotation_step * k as f64);
            pd
        })
        .collect();
    let schedule = choose_dilation(&poles)?;
    let g = grid(n, p.grid_points, ctx.seed);
    let aa_bound = p.almost_affine_threshold * ctx.profile.scale();
    let cm_bound = p.commutator_threshold * ctx.profile.scale();
    let aa = almost_affine_report(&schedule, &g, aa_bound)?;
    let f = |x: &Vector| &b * x;
    let fi = |x: &Vector| &b_inv * x;
    let cz = commutator_zoom(f, fi, Some(b.clone()), &schedule.entries, &g, cm_bound)?;

    let mut st = Table::new(
        "schedule",
        &["n", "t", "lower", "upper", "margin_eps", "margin_m", "margin_lambda", "almost_affine_residual"],
    );
    for (e, r) in schedule.entries.iter().zip(&aa.errors) {
        st.push(row![e.index(), e.t, e.lower, e.upper, e.margins[0], e.margins[1], e.margins[2], *r]);
    }
    let mut ct = Table::new("commutator", &["n", "scale", "residual"]);
    for s in &cz.steps {
        ct.push(row![s.index, s.scale, s.residual]);
    }
    let aa_last = aa.last_error().unwrap_or(f64::INFINITY);
    let residuals: Vec<f64> = cz.steps.iter().map(|s| s.residual).collect();
    let cm_last = residuals.last().copied().unwrap_or(f64::INFINITY);
    let cm_decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    let schedule_ok = schedule.margins_decreasing && aa_last <= aa_bound;
    let commutator_ok = cm_decreasing && cm_last <= cm_bound;

    let mut m = Metrics::default();
    m.set("margins_decreasing", json!(schedule.margins_decreasing));
    m.f("almost_affine_last", aa_last);
    m.f("almost_affine_bound", aa_bound);
    m.set("schedule_ok", json!(schedule_ok));
    m.f("commutator_last", cm_last);
    m.f("commutator_bound", cm_bound);
    m.set("commutator_decreasing", json!(cm_decreasing));
    m.set("commutator_ok", json!(commutator_ok));
    Ok(PipelineOutput {
        passed: schedule_ok && commutator_ok,
        summary: format!("almost-affine residual {aa_last:.2e}, commutator residual {cm_last:.2e} at n = {}", p.n_max),
        metrics: m.0,
        tables: vec![st, ct],
        grid: Some(grid_spec(&g)),
    })
}

/// `AᵀA = cI` up to rounding.
fn is_conformal(a: &Matrix) -> bool {
    let g = a.transpose() * a;
    let n = g.nrows();
    let c = g.trace() / n as f64;
    max_abs(&(g - Matrix::identity(n, n) * c)) <= 1e-12 * c.abs().max(1.0)
}

pub(crate) fn max_sigma(params: &TangentIdentityParams, samples: usize, seed: u64) -> Result<f64> {
    let dirs = unit_directions(params.dim(), samples, seed);
    let mut worst = 0.0f64;
    for (i, v) in dirs.iter().enumerate() {
        let w = &dirs[(i + 1) % dirs.len()];
        worst = worst.max(params.sigma(v, w)?.abs());
    }
    Ok(worst)
}

fn tangent(p: &TangentParams, ctx: &Context) -> Result<PipelineOutput> {
    let a = mat(&p.a)?;
    let n = a.nrows();
    let o = plane_rotation(n, 0, 1, p.rotation_angle);
    let params = TangentIdentityParams::new(p.lambda, o.clone(), a.clone(), vector(&p.eps), vector(&p.pole))?;
    let scale = ctx.profile.scale();
    let mut m = Metrics::default();

    // Expansion error is O(1/|w|): |direct − expansion|·|w| stays bounded.
    let rays = unit_directions(n, p.rays, ctx.seed);
    let mut expansion = Table::new("expansion", &["ray", "s", "gap", "scaled_gap"]);
    let mut worst_variation = 1.0f64;
    for (i, d) in rays.iter().enumerate() {
        let mut scaled = Vec::new();
        for &s in &p.s_values {
            let (direct, approx) = params.g2_triple_prime(&(d * s))?;
            let gap = (direct - approx).norm();
            scaled.push(gap * s);
            expansion.push(row![i, s, gap, gap * s]);
        }
        let hi = scaled.iter().copied().fold(0.0f64, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        worst_variation = worst_variation.max(if lo > 0.0 { hi / lo } else { f64::INFINITY });
    }
    let expansion_ok = worst_variation <= p.variation_bound;
    m.f("expansion_variation", worst_variation);

    let mut homogeneity = 0.0f64;
    for d in &rays {
        let base = params.phi(d)?;
        for &s in &p.s_values {
            let e = (params.phi(&(d * s))? - &base).norm() / base.norm().max(f64::MIN_POSITIVE);
            homogeneity = homogeneity.max(e);
        }
    }
    let homogeneity_ok = homogeneity <= 1e-9;
    m.f("homogeneity_defect", homogeneity);

    // σ ≡ 0 exactly when A is conformal; the control swaps A for a multiple of I.
    let sigma_seed = ctx.seed ^ 0x5167;
    let sigma = max_sigma(&params, p.sigma_samples, sigma_seed)?;
    let det = a.determinant().abs().powf(1.0 / n as f64);
    let control =
        TangentIdentityParams::new(p.lambda, o, Matrix::identity(n, n) * det, vector(&p.eps), vector(&p.pole))?;
    let sigma_control = max_sigma(&control, p.sigma_samples, sigma_seed)?;
    let conformal = is_conformal(&a);
    let sigma_ok = sigma_control <= 1e-10 && if conformal { sigma <= 1e-10 } else { sigma > 1e-6 };
    m.f("sigma_max", sigma);
    m.f("sigma_control_max", sigma_control);
    m.set("a_conformal", json!(conformal));
    m.set("sigma_ok", json!(sigma_ok));

    let small = params.with_lambda(p.small_lambda)?;
    let small_norm = nonvanishing_search(&small, p.rays, ctx.seed).witness_norm();
    let witness_ok = small_norm >= p.witness_floor;
    m.f("small_lambda_witness_norm", small_norm);

    let mut sweep = Table::new("lambda_sweep", &["lambda", "witness_norm", "dominance_ratio"]);
    for r in lambda_sweep(&params, &[1e-1, 1e-2, 1e-3], p.rays, ctx.seed)? {
        sweep.push(row![r.lambda, r.verdict.witness_norm(), r.dominance_ratio.unwrap_or(f64::NAN)]);
    }

    // Sector zooms of the tangent-to-identity map along a witness direction
    // should converge to translation by Φ(w₀).
    let NonvanishingVerdict::Witness { w: w0, phi: c, .. } = nonvanishing_search(&params, p.rays, ctx.seed) else {
        return Err(Error::ZeroField);
    };
    let f = |w: &Vector| params.tangent_map(w);
    let phi = |w: &Vector| params.phi(w).unwrap_or_else(|_| Vector::zeros(n));
    let g = grid(n, p.grid_points, ctx.seed);
    let zooms = p
        .sector_n
        .iter()
        .map(|&k| sector_zoom(&f, &phi, &w0, k, SectorParams::default_for(k), &g))
        .collect::<Result<Vec<_>>>()?;
    let mut sector = Table::new("sector", &["n", "shift", "relative_error", "fit_residual"]);
    let mut seq = EulerSequence::new();
    for z in &zooms {
        sector.push(row![z.n, z.a, z.relative_error(), z.fit_residual]);
        seq.push_map(z.n, sector_map(&f, z), &g)?;
    }
    let opts = EulerOptions::new(p.flow_t, Clock::Index, g.clone());
    let report = euler_limit(&seq, &opts)?;
    let mut flow_rows = Table::new("sector_euler", &["n", "m", "sup_error", "bound", "bound_ok"]);
    for r in &report.rows {
        flow_rows.push(row![r.index, r.m, r.sup_error, r.bound, r.bound_ok]);
    }
    let generator = report.generator.clone();
    let c_error = (&generator.translation - &c).norm() / c.norm();
    let ts = [0.0, 0.25 * p.flow_t, 0.5 * p.flow_t, p.flow_t, -0.5 * p.flow_t];
    let fr = flow_check(|t| aff_exp(&generator.scale(t)), &ts);
    let flow_ok = c_error <= p.c_tolerance * scale && fr.passed();
    m.set("w0", vec_json(&w0));
    m.set("phi_w0", vec_json(&c));
    m.set("generator_translation", vec_json(&generator.translation));
    m.f("generator_linear_norm", generator.linear.norm());
    m.f("c_relative_error", c_error);
    m.f("flow_law_defect", fr.law_defect);
    m.set("flow_check_passed", json!(fr.passed()));

    m.set("expansion_ok", json!(expansion_ok));
    m.set("homogeneity_ok", json!(homogeneity_ok));
    m.set("witness_ok", json!(witness_ok));
    m.set("flow_ok", json!(flow_ok));
    let passed = expansion_ok && homogeneity_ok && sigma_ok && witness_ok && flow_ok;
    Ok(PipelineOutput {
        passed,
        summary: format!(
            "variation {worst_variation:.3}, |Φ| at λ={} is {small_norm:.3e}, translation off Φ(w₀) by {:.2e} relative",
            p.small_lambda, c_error
        ),
        metrics: m.0,
        tables: vec![expansion, sweep, sector, flow_rows],
        grid: Some(grid_spec(&g)),
    })
}

fn eccentric(p: &EccentricParams, ctx: &Context) -> Result<PipelineOutput> {
    let a = mat(&p.a)?;
    let n = a.nrows();
    let (p1, q1) = (vector(&p.p1), vector(&p.q1));
    let phi1 = inversion_chart(&p1, &q1)?;
    let phi2 = inversion_chart(&(&a * &p1), &(&a * &q1))?;
    let mu = conjugated_linear(&a, &phi1, &phi2);
    let g1 = ConformalDerivative { lambda: p.lambda1, orthogonal: plane_rotation(n, 0, 1, p.angle1) };
    let g2 = ConformalDerivative { lambda: p.lambda2, orthogonal: plane_rotation(n, 0, 1, p.angle2) };
    let g = grid(n, p.grid_points, ctx.seed);
    let s = eccentric_sequence(&mu, &g1, &g2, p.n_max, &g)?;

    let mu_ref = &mu;
    let maps: Vec<_> = s.steps.iter().map(|st| move |x: &Vector| st.apply(mu_ref, x)).collect();
    let cert = distinctness_certificate(&maps, g.points());
    let mut steps =
        Table::new("eccentric", &["n", "m", "ratio", "defect", "in_subsequence", "nonlinearity", "derivative_gap"]);
    for (i, st) in s.steps.iter().enumerate() {
        let curvature = nonlinearity_certificate(&maps[i], &g, tolerances::CERTIFICATE_STEP);
        let gap = max_abs(&(&st.derivative_at_origin - &s.limit));
        steps.push(row![st.n, st.m, st.ratio, st.defect, s.subsequence.contains(&i), curvature, gap]);
    }
    let mut dist = Table::new("distinctness", &["i", "j", "distance"]);
    for i in 0..maps.len() {
        for j in 0..i {
            dist.push(row![s.steps[i].n, s.steps[j].n, cert.distances[(i, j)]]);
        }
    }
    let bound = p.cauchy_bound * ctx.profile.scale();
    let passed = cert.all_distinct && s.cauchy_tail <= bound;
    let mut m = Metrics::default();
    m.f("distinctness", cert.min_off_diagonal);
    m.set("all_distinct", json!(cert.all_distinct));
    m.f("cauchy_tail", s.cauchy_tail);
    m.f("cauchy_bound", bound);
    m.set("subsequence_length", json!(s.subsequence.len()));
    m.set("limit", mat_json(&s.limit));
    Ok(PipelineOutput {
        passed,
        summary: format!("min distance {:.3e}, Cauchy tail {:.3e}", cert.min_off_diagonal, s.cauchy_tail),
        metrics: m.0,
        tables: vec![steps, dist],
        grid: Some(grid_spec(&g)),
    })
}

fn mu(p: &MuParams, ctx: &Context) -> Result<PipelineOutput> {
    let mut table = Table::new("nonlinear_mu", &["label", "nonlinearity", "is_linear", "expect_linear", "ok"]);
    let mut all_ok = true;
    let mut spec = None;
    let mut m = Metrics::default();
    for case in &p.cases {
        let a = mat(&case.a)?;
        let n = a.nrows();
        let (phi1, phi2) = match (&case.p1, &case.q1) {
            (Some(p1), Some(q1)) => {
                let (p1, q1) = (vector(p1), vector(q1));
                (inversion_chart(&p1, &q1)?, inversion_chart(&(&a * &p1), &(&a * &q1))?)
            }
            _ => (MoebiusMap::identity(n), MoebiusMap::identity(n)),
        };
        let g = grid(n, p.grid_points, ctx.seed);
        let r = nonlinear_mu_check(&a, &phi1, &phi2, &g)?;
        let strong_enough = case.min_nonlinearity.is_none_or(|t| r.nonlinearity > t);
        let ok = r.is_linear == case.expect_linear && strong_enough;
        all_ok &= ok;
        m.f(&format!("nonlinearity.{}", case.label), r.nonlinearity);
        table.push(row![case.label.as_str(), r.nonlinearity, r.is_linear, case.expect_linear, ok]);
        spec.get_or_insert_with(|| grid_spec(&g));
    }
    m.f("linearity_threshold", tolerances::LINEARITY);
    m.f("certificate_step", tolerances::CERTIFICATE_STEP);
    Ok(PipelineOutput {
        passed: all_ok,
        summary: format!(
            "{} of {} cases as expected",
            table.rows.iter().filter(|r| r[4] == Cell::B(true)).count(),
            p.cases.len()
        ),
        metrics: m.0,
        tables: vec![table],
        grid: spec,
    })
}

fn pattern(p: &PatternParams, _ctx: &Context) -> Result<PipelineOutput> {
    let set = PatternSet::circle_grid(2, p.k, p.spacing, p.radius, p.samples)?;
    let velocity = vector(&p.velocity);
    let flow = |t: f64| AffineMap::translation_by(&velocity * t);
    let w = pattern_flow_demo(&set, flow, p.t0, p.n_max)?;

    let element = &set.elements()[w.element];
    let moved = |t: f64| element.iter().map(|x| flow(t).apply(x)).collect::<Vec<_>>();
    let mut halving = Table::new("halving", &["n", "time", "distance_to_nearest", "hausdorff_to_self"]);
    let mut k = 1u64;
    while k <= w.n {
        let t = p.t0 / k as f64;
        let image = moved(t);
        halving.push(row![k, t, set.nearest(&image).1, hausdorff(&image, element)]);
        k *= 2;
    }
    let mut points = Table::new("witness_sets", &["set", "x", "y"]);
    for (label, pts) in [("J", element.clone()), ("f_t0(J)", moved(p.t0)), ("f_t0/n(J)", moved(p.t0 / w.n as f64))] {
        for x in &pts {
            points.push(row![label, x[0], x[1]]);
        }
    }
    let mut wt = Table::new("witness", &["element", "t0", "gap", "n", "near_distance", "floor", "probe_spacing"]);
    wt.push(row![w.element, p.t0, w.gap, w.n, w.near_distance, w.floor, w.probe_spacing]);

    let mut m = Metrics::default();
    m.set("element", json!(w.element));
    m.f("gap", w.gap);
    m.set("n", json!(w.n));
    m.f("near_distance", w.near_distance);
    m.f("floor", w.floor);
    m.f("probe_spacing", w.probe_spacing);
    Ok(PipelineOutput {
        passed: w.gap > tolerances::DISTINCT && w.near_distance < w.floor,
        summary: format!(
            "element {} moves by {:.3} under f_t0 but f_t0/{} lands {:.3e} from itself, below the floor {:.3}",
            w.element, w.gap, w.n, w.near_distance, w.floor
        ),
        metrics: m.0,
        tables: vec![wt, halving, points],
        grid: None,
    })
}

fn commensurability(p: &CommensurabilityParams, _ctx: &Context) -> Result<PipelineOutput> {
    let mut table = Table::new("commensurability", &["l1", "l2", "ratio", "verdict", "expected", "ok"]);
    let mut all_ok = true;
    for case in &p.cases {
        let verdict = commensurability_test(case.l1, case.l2, p.tol, p.max_denominator);
        let got = match verdict {
            Commensurability::Rational { p, q } => Some((p, q)),
            Commensurability::Independent => None,
        };
        let expected = parse_expectation(&case.expect).ok_or(Error::InvalidInput("bad expectation".into()))?;
        let ok = got == expected;
        all_ok &= ok;
        let label = got.map_or("independent".to_string(), |(a, b)| format!("{a}/{b}"));
        table.push(row![case.l1, case.l2, case.l1 / case.l2, label, case.expect.as_str(), ok]);
    }
    let mut m = Metrics::default();
    m.f("tol", p.tol);
    m.set("max_denominator", json!(p.max_denominator));
    Ok(PipelineOutput {
        passed: all_ok,
        summary: format!("{} cases, all as expected: {all_ok}", p.cases.len()),
        metrics: m.0,
        tables: vec![table],
        grid: None,
    })
}
