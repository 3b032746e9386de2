//! Finite-size scaling: scaling collapse of `chi_tilde`, Binder-parameter
//! crossings and the susceptibility-divergence phase boundary.

mod boundary;
mod collapse;
mod crossing;
mod simplex_search;

pub use boundary::{
    divergence_boundary, fit_log_log, fit_quadratic, AxisBoundary, BoundaryCriteria,
    BoundaryResult, LogLogFit, SusceptibilityPoint,
};
pub use collapse::{
    collapse_residual, scaling_collapse, transform, CollapsePoint, CollapseResult,
    ReducedTemperature, SearchRanges, write_collapse_csv,
};
pub use crossing::{binder_crossing, all_crossings, BinderPoint, CrossingEstimate, CrossingOutcome};
