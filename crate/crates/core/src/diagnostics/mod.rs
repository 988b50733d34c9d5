//! Finite-n diagnostics for the reduction of the non-central circular law to the
//! central case: log-determinant comparison across a z-grid, the singular-value rank
//! inequality, extreme singular value scaling, weak-convergence probes with smooth
//! test functions, the rank-one outlier, and the Green identity for root measures.

mod constant;
mod delta;
mod green;
mod replacement;
mod scaling;
mod test_functions;
mod zgrid;

pub use constant::{constant_case, constant_case_for_sample, ConstantCaseRecord};
pub use delta::{
    delta_at, delta_scan, verify_rank_inequality, DeltaDiagnostics, RankCheck,
    DELTA_CROSS_CHECK_RTOL, IBP_SLACK, RANK_SLACK,
};
pub use green::{green_identity_residual, GreenResidual, Rectangle};
pub use replacement::replacement_check;
pub use scaling::{
    fit_log_log_slope, scaling_scan, scaling_scan_with, DimStatistics, FittedExponents,
    ScalingRecord, ScalingReport,
};
pub use test_functions::{
    default_test_functions, ConstantFunction, GaussianBump, HarmonicCutoff, RadialBump,
    TestFunction,
};
pub use zgrid::ZGrid;
