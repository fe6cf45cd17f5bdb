//! Scenario files shipped with the binary, one per acceptance pipeline.

use crate::config::{parse_scenarios, ConfigError, Scenario};

pub const FILES: [(&str, &str); 9] = [
    ("zoom.toml", include_str!("../scenarios/zoom.toml")),
    ("pole_density.toml", include_str!("../scenarios/pole_density.toml")),
    ("euler.toml", include_str!("../scenarios/euler.toml")),
    ("commutator.toml", include_str!("../scenarios/commutator.toml")),
    ("tangent.toml", include_str!("../scenarios/tangent.toml")),
    ("eccentric.toml", include_str!("../scenarios/eccentric.toml")),
    ("nonlinear_mu.toml", include_str!("../scenarios/nonlinear_mu.toml")),
    ("pattern.toml", include_str!("../scenarios/pattern.toml")),
    ("commensurability.toml", include_str!("../scenarios/commensurability.toml")),
];

pub fn scenarios() -> Result<Vec<Scenario>, ConfigError> {
    let mut out = Vec::new();
    for (name, src) in FILES {
        out.extend(parse_scenarios(src, &format!("builtin:{name}"))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Pipeline;

    #[test]
    fn every_pipeline_has_a_builtin() {
        let s = scenarios().unwrap();
        for p in Pipeline::ALL {
            assert!(s.iter().any(|x| x.pipeline == p), "{p}");
        }
    }
}
