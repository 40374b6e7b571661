//! Lindeberg swapping, resolvent-expansion audits and two-ensemble comparisons.

mod expansion;
mod gfct;
mod observable;
mod repulsion;
mod swap;
mod universality;

pub use expansion::{resolvent_expansion_remainder, ExpansionRemainder};
pub use gfct::{counting_statistic, gfct_statistic, GfctReport, GfctSettings, SmoothFunction};
pub use observable::{
    EigenvalueTerm, EigenvectorTerm, IndexRegime, IndexSpec, ObservableSpec, ResolvedObservable, TestFunction,
};
pub use repulsion::{repulsion_estimate, repulsion_from_spectra, window_half_width, RepulsionPoint, RepulsionReport};
pub use swap::{hybrid_matrix, ordering_map, telescope_decompose, CoupledEntries, SwapSchedule, Telescope};
pub use universality::{
    compare_at_size, universality_experiment, ComparisonReport, ComparisonSettings, ComponentKs, SizeComparison,
};
