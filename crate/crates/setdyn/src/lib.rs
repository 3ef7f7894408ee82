//! Point-cloud approximation of pullback and forward limit sets.
//!
//! Compact fibres are finite clouds carrying the sampling resolution; set statements hold
//! up to max(resolution, tol).

mod cloud;
mod limits;
mod report;
mod sets;
mod verify;

pub use cloud::{hausdorff_dist, hausdorff_semidist, FiberCloud, Provenance, MERGE_TOL};
pub use limits::{
    attractor_star_fibers, construction_by_name, constructions, forward_limit_fiber, omega_forward, omega_star,
    pullback_limit_fiber, AttractorFibers, ForwardConstruction, ImageIntersection, OmegaForward, SourceFibre,
    TailUnion, Trace,
};
pub use report::{cloud_json, trace_json, write_cloud_csv, write_trace_csv, LimitSetReport};
pub use sets::{sample_random, sample_set, stream_seed, Sampling, SetDescriptor, MAX_GRID_POINTS};
pub use verify::{
    check_invariance, tail_log_slope, verify_asymptotic_autonomy, verify_forward_attraction,
    verify_negative_invariance, verify_positive_invariance, AttractionReport, AutonomyReport, AutonomyVerdict,
    InvarianceEntry, InvarianceReport, NegativeInvarianceReport, NegativeWitness, PositiveInvarianceReport,
    EXPONENTIAL_SLOPE, NOISE_FLOOR,
};
