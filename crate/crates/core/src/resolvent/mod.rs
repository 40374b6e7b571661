//! Green-function analytics on a fixed spectral decomposition.

mod audit;
mod green;
mod hs;
mod reconstruct;
mod smoothing;

pub use audit::{
    counting_sandwich, edge_grid, edge_window, left_counting_edge, local_law_audit, log_factor, sharp_vs_smooth_gap,
    AuditGrid, AuditPoint, LocalLawAudit, Sandwich, SharpSmoothGap,
};
pub use green::{
    control_params, green_entry, resolvent_column_direct, resolvent_direct, resolvent_matrix, smoothed_count,
    smoothed_count_quadrature, stieltjes, theta_kernel, tilde_green, ControlParams, TildeGreenWeights,
};
pub use hs::{direct_trace, hs_trace, HsTrace, STRIP_FRACTION};
pub use reconstruct::{
    overlap_window_closed_form, reconstruct_overlap_edge, reconstruct_overlap_smoothed, ReconstructedOverlap,
    ReconstructionParams,
};
pub use smoothing::{smoothstep, CutoffQ, SmoothedIndicator, SMOOTHSTEP_D1_MAX, SMOOTHSTEP_D2_MAX};
