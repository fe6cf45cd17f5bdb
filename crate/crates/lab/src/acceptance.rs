//! The fourteen acceptance criteria. Criteria 1 and 8 call the core directly;
//! the rest read the verdicts and metrics of the builtin scenarios.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kleinflow_core::conformal::{cross_ratio, BoundaryPoint, MoebiusMap};
use kleinflow_core::grid::random_unit;
use kleinflow_core::linalg::plane_rotation;
use kleinflow_core::tangent::TangentIdentityParams;
use kleinflow_core::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::builtin;
use crate::pipelines::max_sigma;
use crate::runner::{run_all, RunError, RunOptions, ScenarioOutcome};

/// Criteria known to fail; see the README. They print FAIL but do not fail
/// the suite, and passing one is reported.
pub const EXPECTED_FAILURES: &[u8] = &[11];

const SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub number: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn expected_failure(&self) -> bool {
        EXPECTED_FAILURES.contains(&self.number)
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let note = match (self.passed, self.expected_failure()) {
            (false, true) => " (expected)",
            (true, true) => " (unexpected pass)",
            _ => "",
        };
        format!("criterion {:>2} {verdict}{note}  {}: {}", self.number, self.name, self.detail)
    }
}

/// True when every failure is an expected one.
pub fn suite_ok(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.passed || r.expected_failure())
}

fn random_generator(rng: &mut ChaCha8Rng) -> MoebiusMap {
    match rng.random_range(0..4) {
        0 => {
            let i = rng.random_range(0..3);
            let j = (i + 1 + rng.random_range(0..2)) % 3;
            MoebiusMap::orthogonal(&plane_rotation(3, i, j, rng.random_range(-3.0..3.0))).expect("rotation")
        }
        1 => MoebiusMap::dilation(3, rng.random_range(-0.1f64..0.1).exp()).expect("dilation"),
        2 => MoebiusMap::translation(&(random_unit(rng, 3) * rng.random_range(0.0..0.1))),
        _ => MoebiusMap::unit_inversion(3),
    }
}

fn lorentz_integrity() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut defect = 0.0f64;
    let mut cross = 0.0f64;
    let mut failure = None;
    for _ in 0..32 {
        let mut m = MoebiusMap::identity(3);
        for _ in 0..64 {
            match m.compose(&random_generator(&mut rng)) {
                Ok(next) => m = next,
                Err(e) => failure = Some(e.to_string()),
            }
        }
        defect = defect.max(m.lorentz_defect());
        let pts: Vec<BoundaryPoint> = (0..4)
            .map(|_| BoundaryPoint::finite(random_unit(&mut rng, 3) * rng.random_range(0.1..2.0)).expect("finite"))
            .collect();
        let img: Result<Vec<_>, _> = pts.iter().map(|p| m.apply(p)).collect();
        let ratios = img.and_then(|img| {
            Ok((cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3])?, cross_ratio(&img[0], &img[1], &img[2], &img[3])?))
        });
        match ratios {
            Ok((before, after)) => cross = cross.max((after - before).abs() / before.abs()),
            Err(e) => failure = Some(e.to_string()),
        }
    }
    let passed = failure.is_none() && defect <= 1e-9 && cross <= 1e-8;
    CriterionResult {
        number: 1,
        name: "Lorentz and cross-ratio integrity",
        passed,
        detail: failure.unwrap_or_else(|| {
            format!("32 products of 64 generators: Lorentz defect {defect:.2e}, cross-ratio drift {cross:.2e}")
        }),
    }
}

fn sigma_equivalence() -> CriterionResult {
    let eps = Vector::from_column_slice(&[0.3, -0.2, 0.5]);
    let pole = Vector::from_column_slice(&[0.4, 0.1, -0.3]);
    let o = plane_rotation(3, 0, 1, 0.7);
    let conformal = [
        Matrix::identity(3, 3) * 2.0,
        plane_rotation(3, 0, 2, 1.1) * 0.5,
        plane_rotation(3, 1, 2, -0.4) * plane_rotation(3, 0, 1, 2.0) * 3.0,
    ];
    let mut shear = Matrix::identity(3, 3);
    shear[(0, 1)] = 0.5;
    let nonconformal = [Matrix::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0, 1.0])), shear];
    let eval = |a: &Matrix| {
        TangentIdentityParams::new(0.5, o.clone(), a.clone(), eps.clone(), pole.clone())
            .and_then(|p| max_sigma(&p, 1000, SEED))
    };
    let mut worst_conformal = 0.0f64;
    let mut least_nonconformal = f64::INFINITY;
    let mut failure = None;
    for a in &conformal {
        match eval(a) {
            Ok(s) => worst_conformal = worst_conformal.max(s),
            Err(e) => failure = Some(e.to_string()),
        }
    }
    for a in &nonconformal {
        match eval(a) {
            Ok(s) => least_nonconformal = least_nonconformal.min(s),
            Err(e) => failure = Some(e.to_string()),
        }
    }
    CriterionResult {
        number: 8,
        name: "sigma vanishes iff A is conformal",
        passed: failure.is_none() && worst_conformal <= 1e-10 && least_nonconformal > 1e-6,
        detail: failure.unwrap_or_else(|| {
            format!("max |sigma| {worst_conformal:.2e} over conformal A, at least {least_nonconformal:.2e} otherwise")
        }),
    }
}

fn metric<'a>(o: &'a ScenarioOutcome, key: &str) -> Option<&'a Value> {
    o.output.metrics.get(key)
}

fn flag(o: &ScenarioOutcome, key: &str) -> bool {
    metric(o, key).and_then(Value::as_bool).unwrap_or(false)
}

fn show(o: &ScenarioOutcome, key: &str) -> String {
    match metric(o, key) {
        Some(Value::Number(n)) => n.as_f64().map_or(n.to_string(), |x| format!("{x:.3e}")),
        Some(v) => v.to_string(),
        None => "n/a".into(),
    }
}

type Outcomes = BTreeMap<String, Result<ScenarioOutcome, String>>;

fn from_scenario<F>(outcomes: &Outcomes, id: &str, number: u8, name: &'static str, judge: F) -> CriterionResult
where
    F: Fn(&ScenarioOutcome) -> (bool, String),
{
    let (passed, detail) = match outcomes.get(id) {
        Some(Ok(o)) => judge(o),
        Some(Err(e)) => (false, e.clone()),
        None => (false, format!("scenario `{id}` missing")),
    };
    CriterionResult { number, name, passed, detail }
}

fn collect(results: Vec<Result<ScenarioOutcome, RunError>>, ids: &[String]) -> Outcomes {
    ids.iter().cloned().zip(results.into_iter().map(|r| r.map_err(|e| e.to_string()))).collect()
}

/// Relative paths of every file under `root`, sorted.
fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let Ok(rd) = std::fs::read_dir(&dir) else { continue };
        for e in rd.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if let Ok(rel) = p.strip_prefix(root) {
                out.push(rel.to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(first: &Path, second: &Path) -> CriterionResult {
    let a = files(first);
    let b = files(second);
    let csv: Vec<&PathBuf> = a.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    let mut differing: Vec<String> = Vec::new();
    if a != b {
        differing.push("file sets differ".into());
    }
    for rel in &a {
        if std::fs::read(first.join(rel)).ok() != std::fs::read(second.join(rel)).ok() {
            differing.push(rel.display().to_string());
        }
    }
    CriterionResult {
        number: 14,
        name: "determinism",
        passed: differing.is_empty() && !csv.is_empty(),
        detail: if differing.is_empty() {
            format!("{} CSV and {} other files byte-identical across two runs", csv.len(), a.len() - csv.len())
        } else {
            format!("differences in {}", differing.join(", "))
        },
    }
}

/// Runs every criterion, writing scenario output under `work`.
pub fn run_all_criteria(work: &Path) -> Vec<CriterionResult> {
    let mut results = vec![lorentz_integrity()];
    let scenarios = match builtin::scenarios() {
        Ok(s) => s,
        Err(e) => {
            results.push(sigma_equivalence());
            for (n, name) in (2..=14u8).zip(NAMES) {
                if n != 8 {
                    results.push(CriterionResult { number: n, name, passed: false, detail: e.to_string() });
                }
            }
            results.sort_by_key(|r| r.number);
            return results;
        }
    };
    let ids: Vec<String> = scenarios.iter().map(|s| s.id.clone()).collect();
    let (first, second) = (work.join("run-a"), work.join("run-b"));
    let opts = |out: &Path| RunOptions { out: Some(out.to_path_buf()), ..RunOptions::default() };
    let outcomes = collect(run_all(&scenarios, &opts(&first)), &ids);

    results.push(from_scenario(&outcomes, "zoom-quadratic", 2, NAMES[0], |o| {
        (o.output.passed, format!("{}; ratios in window: {}", o.output.summary, show(o, "ratios_in_window")))
    }));
    results
        .push(from_scenario(&outcomes, "euler-rotation", 3, NAMES[1], |o| (o.output.passed, o.output.summary.clone())));
    results.push(from_scenario(&outcomes, "commutator-geometric", 4, NAMES[2], |o| {
        (
            flag(o, "schedule_ok"),
            format!(
                "margins decreasing: {}, residual at n=12 {}",
                show(o, "margins_decreasing"),
                show(o, "almost_affine_last")
            ),
        )
    }));
    results.push(from_scenario(&outcomes, "commutator-geometric", 5, NAMES[3], |o| {
        (
            flag(o, "commutator_ok"),
            format!(
                "decreasing: {}, residual at n=12 {}",
                show(o, "commutator_decreasing"),
                show(o, "commutator_last")
            ),
        )
    }));
    results.push(from_scenario(&outcomes, "tangent-identity", 6, NAMES[4], |o| {
        (
            flag(o, "expansion_ok") && flag(o, "homogeneity_ok") && flag(o, "witness_ok"),
            format!(
                "variation {}, homogeneity defect {}, |Phi| at small lambda {}",
                show(o, "expansion_variation"),
                show(o, "homogeneity_defect"),
                show(o, "small_lambda_witness_norm")
            ),
        )
    }));
    results.push(from_scenario(&outcomes, "tangent-identity", 7, NAMES[5], |o| {
        (
            flag(o, "flow_ok"),
            format!(
                "translation off Phi(w0) by {} (relative), flow law defect {}",
                show(o, "c_relative_error"),
                show(o, "flow_law_defect")
            ),
        )
    }));
    results.push(sigma_equivalence());
    results.push(from_scenario(&outcomes, "nonlinear-mu", 9, NAMES[7], |o| {
        (
            o.output.passed,
            format!("stretch {}, similarity {}", show(o, "nonlinearity.stretch"), show(o, "nonlinearity.similarity")),
        )
    }));
    results.push(from_scenario(&outcomes, "eccentric-stretch", 10, NAMES[8], |o| {
        (o.output.passed, o.output.summary.clone())
    }));
    results.push(from_scenario(&outcomes, "pole-density-534", 11, NAMES[9], |o| {
        (o.output.passed, o.output.summary.clone())
    }));
    results.push(from_scenario(&outcomes, "commensurability", 12, NAMES[10], |o| {
        (o.output.passed, o.output.summary.clone())
    }));
    results.push(from_scenario(&outcomes, "pattern-circles", 13, NAMES[11], |o| {
        (o.output.passed, o.output.summary.clone())
    }));

    let _ = run_all(&scenarios, &opts(&second));
    results.push(determinism(&first, &second));
    results
}

const NAMES: [&str; 13] = [
    "zoom-in limit",
    "Euler limit",
    "dilation schedule",
    "commutator expansion",
    "tangent-identity field",
    "flow construction end to end",
    "sigma vanishes iff A is conformal",
    "nonlinear mu certificate",
    "eccentric sequence",
    "pole density trend",
    "commensurability detector",
    "pattern and flow incompatibility",
    "determinism",
];
