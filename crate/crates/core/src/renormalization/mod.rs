//! Zoom-in operators: conjugating group elements and maps by dilations
//! centered at poles so that they converge to based linear, affine or
//! near-translation limits.
//!
//! Every "uniformly on compacts" claim is sampled on an [`EvalGrid`](crate::grid::EvalGrid).
//! Where a pole must avoid the group's limit set, only the finitely many
//! enumerated elements are ever checked.

mod commutator;
mod eccentric;
mod flow_prep;
mod schedule;
mod sector;
mod zoom;

pub use commutator::{commutator_zoom, CommutatorStep, CommutatorZoom};
pub use eccentric::{bracket, eccentric_sequence, EccentricSequence, EccentricStep};
pub use flow_prep::{based_flow_prep, FlowPrep, PreparedMap};
pub use schedule::{
    almost_affine_report, almost_affine_residual, almost_affine_residual_of, choose_dilation, choose_dilation_lenient,
    geometric_poles, PoleData, ScheduleEntry, ZoomSchedule,
};
pub use sector::{minimal_shift, sector_map, sector_zoom, SectorParams, SectorZoom};
pub use zoom::{zoom_at_fixed_point, ZoomOptions, ZoomResult};
