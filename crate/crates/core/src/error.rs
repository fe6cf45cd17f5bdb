use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(&'static str),
    #[error("matrix is not orthogonal (defect {defect:e})")]
    NonOrthogonal { defect: f64 },
    #[error("classification is ambiguous: translation length {length:e} with pole separation {separation:e}")]
    AmbiguousClassification { length: f64, separation: f64 },
    #[error("point or its image is at infinity; conjugate by an inversion first")]
    PoleAtInfinity,
    #[error("the two points coincide")]
    CoincidentPoints,
    #[error("multiplier is singular (condition number {condition:e})")]
    SingularMultiplier { condition: f64 },
    #[error("gram matrix does not have Lorentzian signature: {positive} positive, {negative} negative, {zero} zero eigenvalues")]
    WrongSignature { positive: usize, negative: usize, zero: usize },
    #[error("gram matrix is not realizable: {0}")]
    NonRealizableGram(&'static str),
    #[error("enumeration budget of {limit} elements exceeded")]
    BudgetExceeded { limit: usize },
    #[error("no loxodromic element found within budget")]
    NoLoxodromicFound,
    #[error("no convergent subsequence within {n_max} steps")]
    NoConvergentSubsequence { n_max: usize },
    #[error("point is not a fixed point (displacement {displacement:e})")]
    FixedPointMismatch { displacement: f64 },
    #[error("dilation schedule infeasible at index {index}: {reason}")]
    InfeasibleSchedule { index: usize, reason: &'static str },
    #[error("evaluation grid touches a pole (pole norm {pole_norm:e})")]
    GridTouchesPole { pole_norm: f64 },
    #[error("linear part is not invertible")]
    NonInvertible,
    #[error("sector zoom image escaped the sector at step {n}")]
    SectorViolation { n: usize },
    #[error("field vanishes at the chosen direction")]
    ZeroField,
    #[error("field is not homogeneous of degree zero (defect {defect:e})")]
    NotHomogeneous { defect: f64 },
    #[error("bracketing failure: multiplier must lie strictly in (0, 1)")]
    BracketingFailure,
    #[error("derivative at the fixed point is singular")]
    DerivativeSingular,
    #[error("degenerate poles at index {index}")]
    DegeneratePoles { index: usize },
    #[error("sequence has no distinct elements; flow would be trivial")]
    TrivialSequence,
    #[error("map is outside the logarithm domain (distance {distance:e} from identity)")]
    OutsideLogDomain { distance: f64 },
    #[error("no convergent direction among normalized logarithms")]
    NoConvergentDirection,
    #[error("iterate escaped the safety ball at step {step}")]
    DomainEscape { step: usize },
    #[error("vector argument w must be nonzero")]
    ZeroW,
    #[error("|w| = {norm:e} is below the validity radius {radius:e}")]
    BelowValidityRadius { norm: f64, radius: f64 },
    #[error("a pole of the map lies on the evaluation grid")]
    PoleOnGrid,
    #[error("no pattern/flow witness found")]
    NoWitnessFound,
    #[error("flow is trivial")]
    TrivialFlow,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
