//! Scenario files.
//!
//! A file holds either one scenario at top level or several as
//! `[[scenario]]` tables. Pipeline parameters are checked against a typed
//! table per pipeline; unknown keys are errors everywhere.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use kleinflow_core::{Matrix, Vector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: String,
    /// 1-based.
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.origin)?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ": field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pipeline {
    ZoomConvergence,
    PoleDensity,
    EulerFlow,
    CommutatorFlow,
    TangentIdentityFlow,
    EccentricSequence,
    NonlinearMu,
    PatternFlowDemo,
    Commensurability,
}

impl Pipeline {
    pub const ALL: [Pipeline; 9] = [
        Pipeline::ZoomConvergence,
        Pipeline::PoleDensity,
        Pipeline::EulerFlow,
        Pipeline::CommutatorFlow,
        Pipeline::TangentIdentityFlow,
        Pipeline::EccentricSequence,
        Pipeline::NonlinearMu,
        Pipeline::PatternFlowDemo,
        Pipeline::Commensurability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::ZoomConvergence => "ZoomConvergence",
            Pipeline::PoleDensity => "PoleDensity",
            Pipeline::EulerFlow => "EulerFlow",
            Pipeline::CommutatorFlow => "CommutatorFlow",
            Pipeline::TangentIdentityFlow => "TangentIdentityFlow",
            Pipeline::EccentricSequence => "EccentricSequence",
            Pipeline::NonlinearMu => "NonlinearMu",
            Pipeline::PatternFlowDemo => "PatternFlowDemo",
            Pipeline::Commensurability => "Commensurability",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Square matrix given by rows.
pub type Rows = Vec<Vec<f64>>;

fn default_grid_points() -> usize {
    kleinflow_core::grid::DEFAULT_POINTS
}

fn default_one() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoomParams {
    /// `f(x) = Ax + quadratic·|x|x`.
    pub a: Rows,
    #[serde(default = "default_one")]
    pub quadratic: f64,
    /// `T = dilation·I`.
    pub dilation: f64,
    pub n_max: usize,
    /// Pass `A` as the known derivative instead of differencing.
    #[serde(default = "default_true")]
    pub known_multiplier: bool,
    pub ratio_window: [f64; 2],
    pub final_bound: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleParams {
    /// Catalog name.
    pub group: String,
    pub budgets: Vec<usize>,
    #[serde(default = "default_true")]
    pub even_only: bool,
    #[serde(default)]
    pub basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub max_elements: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerParams {
    pub linear: Rows,
    pub translation: Vec<f64>,
    /// Rescale `linear` to this operator norm first.
    #[serde(default)]
    pub linear_norm: Option<f64>,
    pub n_values: Vec<usize>,
    pub t: f64,
    /// Pass iff every error is at most `error_constant/n` ...
    pub error_constant: f64,
    /// ... and the fitted decay exponent lies in this window.
    pub exponent_window: [f64; 2],
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorParams {
    /// `Df(0)` of the linear map `f = B`.
    pub b: Rows,
    /// Geometric poles `ε_n = 4⁻ⁿe₁`, `M_n = 2ⁿe₂`, `λ_n = 2⁻ⁿ` for `n = 1..=n_max`.
    pub n_max: usize,
    /// `O_n` rotates the `e₁e₂`-plane by `n·rotation_step`.
    #[serde(default)]
    pub rotation_step: f64,
    pub almost_affine_threshold: f64,
    pub commutator_threshold: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentParams {
    pub lambda: f64,
    /// `O` rotates the `e₁e₂`-plane by this angle.
    pub rotation_angle: f64,
    pub a: Rows,
    pub eps: Vec<f64>,
    pub pole: Vec<f64>,
    pub rays: usize,
    pub s_values: Vec<f64>,
    /// Max/min of `|direct − expansion|·|w|` along a ray.
    pub variation_bound: f64,
    pub small_lambda: f64,
    pub witness_floor: f64,
    pub sector_n: Vec<usize>,
    #[serde(default = "default_one")]
    pub flow_t: f64,
    /// Relative tolerance on the translation against `Φ(w₀)`.
    pub c_tolerance: f64,
    pub sigma_samples: usize,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EccentricParams {
    pub a: Rows,
    /// Chart `φ₁` sends `p1 ↦ 0`, `q1 ↦ ∞`; `φ₂` uses `Ap1`, `Aq1`.
    pub p1: Vec<f64>,
    pub q1: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(default)]
    pub angle1: f64,
    #[serde(default)]
    pub angle2: f64,
    pub n_max: usize,
    pub cauchy_bound: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuCase {
    pub label: String,
    pub a: Rows,
    /// Inversion charts through these points; identity charts when absent.
    #[serde(default)]
    pub p1: Option<Vec<f64>>,
    #[serde(default)]
    pub q1: Option<Vec<f64>>,
    pub expect_linear: bool,
    /// Required certificate for a nonlinear verdict.
    #[serde(default)]
    pub min_nonlinearity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuParams {
    pub cases: Vec<MuCase>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternParams {
    /// Circles centred on `{−k..k}²·spacing`.
    pub k: i32,
    pub spacing: f64,
    pub radius: f64,
    pub samples: usize,
    /// Flow `w ↦ w + t·velocity`.
    pub velocity: Vec<f64>,
    pub t0: f64,
    pub n_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommensurabilityCase {
    pub l1: f64,
    pub l2: f64,
    /// `"p/q"` or `"independent"`.
    pub expect: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommensurabilityParams {
    pub tol: f64,
    pub max_denominator: u64,
    pub cases: Vec<CommensurabilityCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Zoom(ZoomParams),
    Pole(PoleParams),
    Euler(EulerParams),
    Commutator(CommutatorParams),
    Tangent(TangentParams),
    Eccentric(EccentricParams),
    Mu(MuParams),
    Pattern(PatternParams),
    Commensurability(CommensurabilityParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub parameters: Parameters,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    pipeline: Pipeline,
    seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    parameters: toml::Table,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: Vec<RawScenario>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// First backticked word of a serde message, which names the field.
fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

/// Line of `key = ...` at or after byte `from`.
fn find_key(src: &str, key: &str, from: usize) -> Option<usize> {
    let mut offset = 0;
    for line in src.lines() {
        let here = offset;
        offset += line.len() + 1;
        if here < from {
            continue;
        }
        let t = line.trim_start();
        if let Some(rest) = t.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(line_of(src, here));
            }
        }
    }
    None
}

struct Located<'a> {
    src: &'a str,
    origin: &'a str,
}

impl Located<'_> {
    fn error(&self, line: Option<usize>, field: Option<String>, message: impl Into<String>) -> ConfigError {
        ConfigError { origin: self.origin.to_string(), line, field, message: message.into() }
    }

    fn toml_error(&self, e: &toml::de::Error) -> ConfigError {
        let line = e.span().map(|s| line_of(self.src, s.start));
        let message = e.message().trim().to_string();
        self.error(line, backticked(&message), message)
    }

    /// Byte offset of the `n`-th scenario table, for locating its keys.
    fn scenario_start(&self, n: usize, multi: bool) -> usize {
        if !multi {
            return 0;
        }
        self.src.match_indices("[[scenario]]").nth(n).map_or(0, |(i, _)| i)
    }

    fn parameters_start(&self, from: usize) -> usize {
        let rest = &self.src[from..];
        let table = rest.find("[parameters").or_else(|| rest.find("[scenario.parameters"));
        let inline = rest.find("parameters");
        from + table.or(inline).unwrap_or(0)
    }
}

fn typed<T: DeserializeOwned>(table: &toml::Table) -> Result<T, toml::de::Error> {
    toml::Value::Table(table.clone()).try_into()
}

fn parse_parameters(pipeline: Pipeline, table: &toml::Table) -> Result<Parameters, toml::de::Error> {
    Ok(match pipeline {
        Pipeline::ZoomConvergence => Parameters::Zoom(typed(table)?),
        Pipeline::PoleDensity => Parameters::Pole(typed(table)?),
        Pipeline::EulerFlow => Parameters::Euler(typed(table)?),
        Pipeline::CommutatorFlow => Parameters::Commutator(typed(table)?),
        Pipeline::TangentIdentityFlow => Parameters::Tangent(typed(table)?),
        Pipeline::EccentricSequence => Parameters::Eccentric(typed(table)?),
        Pipeline::NonlinearMu => Parameters::Mu(typed(table)?),
        Pipeline::PatternFlowDemo => Parameters::Pattern(typed(table)?),
        Pipeline::Commensurability => Parameters::Commensurability(typed(table)?),
    })
}

/// Parses and validates every scenario in `src`. `origin` names the source in
/// diagnostics.
pub fn parse_scenarios(src: &str, origin: &str) -> Result<Vec<Scenario>, ConfigError> {
    let loc = Located { src, origin };
    let top: toml::Table = toml::from_str(src).map_err(|e| loc.toml_error(&e))?;
    let multi = top.contains_key("scenario");
    let raws = if multi {
        toml::from_str::<RawFile>(src).map_err(|e| loc.toml_error(&e))?.scenario
    } else {
        vec![toml::from_str::<RawScenario>(src).map_err(|e| loc.toml_error(&e))?]
    };
    if raws.is_empty() {
        return Err(loc.error(None, Some("scenario".into()), "no scenarios"));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(raws.len());
    for (k, raw) in raws.into_iter().enumerate() {
        let start = loc.scenario_start(k, multi);
        if raw.id.trim().is_empty() || !raw.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(loc.error(find_key(src, "id", start), Some("id".into()), "id must be nonempty [A-Za-z0-9_-]"));
        }
        if !seen.insert(raw.id.clone()) {
            return Err(loc.error(find_key(src, "id", start), Some("id".into()), format!("duplicate id `{}`", raw.id)));
        }
        let pstart = loc.parameters_start(start);
        let parameters = parse_parameters(raw.pipeline, &raw.parameters).map_err(|e| {
            let msg = e.message().trim().to_string();
            let key = backticked(&msg);
            let line = key.as_deref().and_then(|k| find_key(src, k, pstart)).or_else(|| Some(line_of(src, pstart)));
            loc.error(line, Some(format!("parameters.{}", key.unwrap_or_default())), msg)
        })?;
        validate(&parameters).map_err(|(key, msg)| {
            let line = find_key(src, key, pstart).or_else(|| Some(line_of(src, pstart)));
            loc.error(line, Some(format!("parameters.{key}")), msg)
        })?;
        out.push(Scenario {
            id: raw.id,
            pipeline: raw.pipeline,
            seed: raw.seed,
            output_dir: raw.output_dir,
            parameters,
        });
    }
    Ok(out)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>, ConfigError> {
    let origin = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
        origin: origin.clone(),
        line: None,
        field: None,
        message: e.to_string(),
    })?;
    parse_scenarios(&src, &origin)
}

type Invalid = (&'static str, String);

fn check(ok: bool, key: &'static str, msg: &str) -> Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err((key, msg.to_string()))
    }
}

pub fn matrix(rows: &Rows) -> Option<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n || r.iter().any(|x| !x.is_finite())) {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn vector(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

fn square(rows: &Rows, key: &'static str) -> Result<usize, Invalid> {
    matrix(rows).map(|m| m.nrows()).ok_or((key, "expected a nonempty square matrix of finite rows".into()))
}

fn sized(v: &[f64], n: usize, key: &'static str) -> Result<(), Invalid> {
    check(v.len() == n && v.iter().all(|x| x.is_finite()), key, &format!("expected {n} finite entries"))
}

fn positive_list(v: &[usize], key: &'static str) -> Result<(), Invalid> {
    check(!v.is_empty() && v.iter().all(|&n| n > 0), key, "expected a nonempty list of positive integers")
}

fn validate(p: &Parameters) -> Result<(), Invalid> {
    match p {
        Parameters::Zoom(z) => {
            square(&z.a, "a")?;
            check(z.dilation > 1.0, "dilation", "must exceed 1")?;
            check(z.n_max >= 2, "n_max", "need at least two steps")?;
            check(z.ratio_window[0] <= z.ratio_window[1], "ratio_window", "empty window")?;
            check(z.grid_points >= 2, "grid_points", "need at least two points")
        }
        Parameters::Pole(q) => {
            check(crate::catalog::lookup(&q.group).is_some(), "group", "unknown catalog group")?;
            check(!q.budgets.is_empty(), "budgets", "need at least one budget")
        }
        Parameters::Euler(e) => {
            let n = square(&e.linear, "linear")?;
            sized(&e.translation, n, "translation")?;
            positive_list(&e.n_values, "n_values")?;
            check(e.n_values.windows(2).all(|w| w[0] < w[1]), "n_values", "must increase")?;
            check(e.t > 0.0, "t", "must be positive")?;
            check(e.linear_norm.is_none_or(|x| x > 0.0), "linear_norm", "must be positive")
        }
        Parameters::Commutator(c) => {
            let n = square(&c.b, "b")?;
            check(n >= 2, "b", "need dimension at least 2")?;
            check(c.n_max >= 2, "n_max", "need at least two terms")
        }
        Parameters::Tangent(t) => {
            let n = square(&t.a, "a")?;
            check(n >= 2, "a", "need dimension at least 2")?;
            sized(&t.eps, n, "eps")?;
            sized(&t.pole, n, "pole")?;
            check(t.lambda > 0.0 && t.lambda < 1.0, "lambda", "must lie in (0, 1)")?;
            check(t.small_lambda > 0.0 && t.small_lambda < 1.0, "small_lambda", "must lie in (0, 1)")?;
            check(t.rays > 0, "rays", "need at least one ray")?;
            check(t.s_values.len() >= 2 && t.s_values.iter().all(|s| *s > 0.0), "s_values", "need two positive radii")?;
            positive_list(&t.sector_n, "sector_n")?;
            check(t.sigma_samples >= 2, "sigma_samples", "need at least two samples")
        }
        Parameters::Eccentric(e) => {
            let n = square(&e.a, "a")?;
            check(n >= 2, "a", "need dimension at least 2")?;
            sized(&e.p1, n, "p1")?;
            sized(&e.q1, n, "q1")?;
            for (x, key) in [(e.lambda1, "lambda1"), (e.lambda2, "lambda2")] {
                check(x > 0.0 && x < 1.0, key, "must lie in (0, 1)")?;
            }
            check(e.n_max >= 2, "n_max", "need at least two terms")
        }
        Parameters::Mu(m) => {
            check(!m.cases.is_empty(), "cases", "need at least one case")?;
            for c in &m.cases {
                let n = square(&c.a, "a")?;
                match (&c.p1, &c.q1) {
                    (Some(p), Some(q)) => {
                        sized(p, n, "p1")?;
                        sized(q, n, "q1")?;
                    }
                    (None, None) => {}
                    _ => return Err(("p1", "give both p1 and q1 or neither".into())),
                }
            }
            Ok(())
        }
        Parameters::Pattern(p) => {
            check(p.k >= 1, "k", "need k ≥ 1")?;
            check(p.spacing > 2.0 * p.radius && p.radius > 0.0, "radius", "circles must be disjoint")?;
            check(p.samples >= 3, "samples", "need at least three samples")?;
            sized(&p.velocity, 2, "velocity")?;
            check(p.t0.is_finite() && p.t0 != 0.0, "t0", "must be nonzero")
        }
        Parameters::Commensurability(c) => {
            check(c.tol > 0.0, "tol", "must be positive")?;
            check(!c.cases.is_empty(), "cases", "need at least one case")?;
            for case in &c.cases {
                check(parse_expectation(&case.expect).is_some(), "expect", "expected \"p/q\" or \"independent\"")?;
            }
            Ok(())
        }
    }
}

/// `"p/q"` as `Some(Some((p, q)))`, `"independent"` as `Some(None)`.
pub fn parse_expectation(s: &str) -> Option<Option<(u64, u64)>> {
    if s.eq_ignore_ascii_case("independent") {
        return Some(None);
    }
    let (p, q) = s.split_once('/')?;
    Some(Some((p.trim().parse().ok()?, q.trim().parse().ok()?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER: &str = r#"
id = "euler"
pipeline = "EulerFlow"
seed = 1

[parameters]
linear = [[0.0, 1.0], [-1.0, 0.0]]
translation = [0.1, 0.0]
n_values = [100, 1000]
t = 1.0
error_constant = 2.0
exponent_window = [0.9, 1.1]
"#;

    #[test]
    fn parses_single() {
        let s = parse_scenarios(EULER, "mem").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].pipeline, Pipeline::EulerFlow);
        let Parameters::Euler(p) = &s[0].parameters else { panic!() };
        assert_eq!(p.grid_points, 200);
    }

    #[test]
    fn empty_parameters_rejected() {
        let src = "id = \"e\"\npipeline = \"EulerFlow\"\nseed = 1\n[parameters]\n";
        let e = parse_scenarios(src, "mem").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("parameters.linear"));
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn unknown_field_located() {
        let src = EULER.replace("t = 1.0", "t = 1.0\ntypo = 3");
        let e = parse_scenarios(&src, "mem").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("parameters.typo"));
        assert_eq!(e.line, Some(11));
        let src = EULER.replace("seed = 1", "seed = 1\nsed = 2");
        let e = parse_scenarios(&src, "mem").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("sed"));
        assert_eq!(e.line, Some(5));
    }

    #[test]
    fn invalid_value_located() {
        let src = EULER.replace("t = 1.0", "t = -1.0");
        let e = parse_scenarios(&src, "mem").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("parameters.t"));
        assert_eq!(e.line, Some(10));
        assert!(e.to_string().starts_with("mem:10: field `parameters.t`"));
    }

    #[test]
    fn duplicate_ids() {
        let one = EULER
            .replace("id = \"euler\"", "[[scenario]]\nid = \"euler\"")
            .replace("[parameters]", "[scenario.parameters]");
        let src = format!("{one}\n{one}");
        let e = parse_scenarios(&src, "mem").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("id"));
        assert!(e.message.contains("duplicate"));
        assert!(parse_scenarios(&one, "mem").is_ok());
    }

    #[test]
    fn expectations() {
        assert_eq!(parse_expectation("1/3"), Some(Some((1, 3))));
        assert_eq!(parse_expectation("Independent"), Some(None));
        assert_eq!(parse_expectation("x"), None);
    }
}
