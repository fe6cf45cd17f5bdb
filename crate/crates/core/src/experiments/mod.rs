//! Certificates used by the theorem pipelines: nonlinearity of conjugated
//! linear maps, pairwise distinctness of map sequences and the pattern/flow
//! incompatibility demo.

mod distinct;
mod mu;
mod pattern;

pub use distinct::{distinctness_certificate, DistinctnessCertificate};
pub use mu::{conjugated_linear, inversion_chart, nonlinear_mu_check, NonlinearityReport};
pub use pattern::{hausdorff, pattern_flow_demo, PatternFlowWitness, PatternSet};
