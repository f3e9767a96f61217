//! Numerical laboratory for the statistical-query hardness construction.
//!
//! The hard instances are shifted sign functions `f_v(x) = sign(v·x − t)`
//! with labels flipped at rate η. Their pairwise correlations are governed
//! by the Hermite expansion of `sign(z − t)`; this module evaluates that
//! expansion, its closed-form bound, the Mehler identity behind the bound,
//! near-orthogonal packings, χ-correlations, and the `‖Z_N‖²` test that
//! solves the decision problem with `O(√d/ε²)` samples.

mod chi;
mod coefficients;
mod distinguisher;
mod mehler;
mod packing;
mod report;

pub use chi::{chi_correlation, ChiCorrelation, CHI_TOLERANCE};
pub use coefficients::{correlation_bound, pair_correlation_series, sign_hermite_coeff, sign_mean, SeriesValue};
pub use distinguisher::{
    calibrate, distinguish, distinguisher_sample_size, run_trials, simulate_statistics, Calibration,
    DistinguisherSetup, DistinguisherVerdict, TrialTally, DEFAULT_CALIBRATION_C, DEFAULT_SAMPLE_CONSTANT,
    VERDICT_CSV_HEADER,
};
pub use mehler::{mehler_closed_form, mehler_sum, MehlerValue};
pub use packing::{make_packing, max_abs_inner, Packing};
pub use report::{correlation_report, mc_covariance, CorrelationReport, CORRELATION_CSV_HEADER};
