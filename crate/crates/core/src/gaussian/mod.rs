//! Exact fBm covariance, path generators, the Volterra kernel and its
//! operators, and the Gaussian-analytic checks on the covariance structure.

mod cache;
mod holder;
mod nondeterminacy;
mod operators;
mod paths;
mod volterra;

pub use cache::{read_ensemble, write_ensemble, CACHE_MAGIC, CACHE_VERSION};
pub use holder::{indicator_second_moment, IndicatorMoment};
pub use nondeterminacy::{local_ratio, nondeterminacy_ratio, NondeterminacyRatio};
pub use operators::{
    deterministic_wick_variance, gamma_gamma_star, gamma_star, gamma_star_norm_sq,
    QUAD_RESOLUTION,
};
pub use paths::{
    generate_paths, generate_paths_capped, GeneratorTag, PathEnsemble, SamplePath,
    DEFAULT_VALUE_CAP,
};
pub use volterra::{reproducing_integral, volterra_kernel};

use crate::error::{domain, Result};
use crate::hurst::HurstIndex;

/// `E[B_s B_t] = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
pub fn fbm_covariance(s: f64, t: f64, h: &HurstIndex) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return domain(format!("negative time in covariance ({s}, {t})"));
    }
    Ok(covariance_unchecked(s, t, h.value()))
}

#[inline]
pub(crate) fn covariance_unchecked(s: f64, t: f64, h: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_and_symmetry() {
        let h = HurstIndex::new(0.8).unwrap();
        assert_relative_eq!(fbm_covariance(0.7, 0.7, &h).unwrap(), 0.7f64.powf(1.6));
        assert_eq!(
            fbm_covariance(0.2, 0.9, &h).unwrap(),
            fbm_covariance(0.9, 0.2, &h).unwrap()
        );
    }

    #[test]
    fn hand_value_at_three_quarters() {
        let h = HurstIndex::new(0.75).unwrap();
        assert_relative_eq!(fbm_covariance(1.0, 2.0, &h).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(fbm_covariance(1.0, 2.0, &h).unwrap(), 1.414214, epsilon = 1e-6);
    }

    #[test]
    fn brownian_limit() {
        let eps = 1e-6;
        let h = HurstIndex::new(0.5 + eps).unwrap();
        for (s, t) in [(0.3, 0.8), (1.0, 2.5), (2.0, 0.5)] {
            let c = fbm_covariance(s, t, &h).unwrap();
            assert!((c - f64::min(s, t)).abs() < 10.0 * eps, "{s} {t} {c}");
        }
    }

    #[test]
    fn negative_time_rejected() {
        let h = HurstIndex::new(0.7).unwrap();
        assert!(fbm_covariance(-0.1, 1.0, &h).is_err());
    }
}
