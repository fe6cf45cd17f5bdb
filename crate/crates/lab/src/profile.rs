//! Tolerance profiles for pipeline verdicts.

use std::fmt;
use std::str::FromStr;

use kleinflow_core::tolerances;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TolProfile {
    #[default]
    Default,
    /// Verdict thresholds taken from scenarios are tightened tenfold.
    Strict,
}

impl TolProfile {
    pub fn name(self) -> &'static str {
        match self {
            TolProfile::Default => "default",
            TolProfile::Strict => "strict",
        }
    }

    /// Factor applied to scenario-supplied error bounds.
    pub fn scale(self) -> f64 {
        match self {
            TolProfile::Default => 1.0,
            TolProfile::Strict => 0.1,
        }
    }

    /// Everything a verdict depended on, for reports.
    pub fn describe(self) -> Value {
        json!({
            "profile": self.name(),
            "bound_scale": self.scale(),
            "core": {
                "lorentz": tolerances::LORENTZ,
                "compose": tolerances::COMPOSE,
                "derivative": tolerances::DERIVATIVE,
                "fixed_point": tolerances::FIXED_POINT,
                "loxodromic": tolerances::LOXODROMIC,
                "orthogonal": tolerances::ORTHOGONAL,
                "cross_ratio": tolerances::CROSS_RATIO,
                "fingerprint": tolerances::FINGERPRINT,
                "flow": tolerances::FLOW,
                "distinct": tolerances::DISTINCT,
                "linearity": tolerances::LINEARITY,
                "fd_step": tolerances::FD_STEP,
                "certificate_step": tolerances::CERTIFICATE_STEP,
                "direction_cluster": tolerances::DIRECTION_CLUSTER,
                "escape_factor": tolerances::ESCAPE_FACTOR,
            }
        })
    }
}

impl fmt::Display for TolProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TolProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(TolProfile::Default),
            "strict" => Ok(TolProfile::Strict),
            other => Err(format!("unknown tolerance profile `{other}` (expected strict or default)")),
        }
    }
}
