//! Weighted power variation, weighted quadratic covariation, the Wick–Itô
//! integral, and residual checks of the Itô, Tanaka and time-reversal
//! identities.

mod checks;
mod power;
mod report;
mod wick;
mod wqc;

pub use checks::{
    ito_formula_check, ito_time_dependent_check, CovariationSource, time_reversal_check, time_reversal_check_2d,
    IdentityForm, ItoResidualReport, ReversalCheck, TimeDependentForm,
};
pub use power::{gaussian_even_moment, weighted_power_variation, PowerVariation};
pub use report::{write_residual_csv, write_residual_records, ResidualRow};
pub use wick::{
    reversed_wick_integral, wick_ito_integral, wick_ito_integral_2d, wick_ito_series, WickEstimate,
};
pub use wqc::{
    weighted_quadratic_covariation, wqc_smooth_oracle, wqc_sum, wqc_time_dependent, WqcEstimate,
    DEFAULT_N_SCHEDULE,
};

use crate::error::{domain, Result};
use crate::gaussian::SamplePath;

/// Stride that subsamples `path` down to `n` steps.
pub(crate) fn stride_for(path: &SamplePath<'_>, n: usize) -> Result<usize> {
    let full = path.grid.steps();
    if n == 0 || n > full || full % n != 0 {
        return domain(format!(
            "n = {n} is not a divisor of the path resolution {full}"
        ));
    }
    Ok(full / n)
}

/// `0^{e} := 0` for the positive weight exponents used here.
#[inline]
pub(crate) fn weight_pow(k: usize, e: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        (k as f64).powf(e)
    }
}
