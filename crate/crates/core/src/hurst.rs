use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, Result};

/// Normalizing constant of the Volterra kernel,
/// `(2H Γ(3/2−H) / (Γ(H+1/2) Γ(2−2H)))^{1/2}`.
///
/// Defined on the closed range `[1/2, 1)` so the Brownian value `κ = 1`
/// can be evaluated directly.
pub fn kappa(h: f64) -> f64 {
    (2.0 * h * gamma(1.5 - h) / (gamma(h + 0.5) * gamma(2.0 - 2.0 * h))).sqrt()
}

/// Hurst parameter restricted to the open interval (1/2, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstIndex {
    h: f64,
    variation_threshold: f64,
    p_bound: f64,
    alpha_h: f64,
    kappa_h: f64,
}

impl HurstIndex {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.5 && h < 1.0) {
            return domain(format!("Hurst index {h} outside (1/2, 1)"));
        }
        Ok(Self {
            h,
            variation_threshold: 2.0 * h / (3.0 * h - 1.0),
            p_bound: 2.0 * h / (1.0 - h),
            alpha_h: h * (2.0 * h - 1.0),
            kappa_h: kappa(h),
        })
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.h
    }

    /// `2H/(3H−1)`: variation order of `x ↦ 𝓛(x,t)`.
    pub fn variation_threshold(&self) -> f64 {
        self.variation_threshold
    }

    /// `2H/(1−H)`: upper bound on the variation order of Young integrands.
    pub fn p_bound(&self) -> f64 {
        self.p_bound
    }

    /// `H(2H−1)`.
    pub fn alpha_h(&self) -> f64 {
        self.alpha_h
    }

    pub fn kappa_h(&self) -> f64 {
        self.kappa_h
    }

    /// `2H−1`, the exponent of the time weight.
    #[inline]
    pub fn weight_exponent(&self) -> f64 {
        2.0 * self.h - 1.0
    }

    /// `2H s^{2H−1}` with `0^{2H−1} := 0`.
    #[inline]
    pub fn time_weight(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            2.0 * self.h * s.powf(self.weight_exponent())
        }
    }
}

impl TryFrom<f64> for HurstIndex {
    type Error = crate::error::FracError;
    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<HurstIndex> for f64 {
    fn from(h: HurstIndex) -> f64 {
        h.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_outside_open_interval() {
        for h in [0.5, 1.0, 0.2, 1.3, f64::NAN] {
            assert!(HurstIndex::new(h).is_err(), "{h}");
        }
    }

    #[test]
    fn derived_exponents() {
        let h = HurstIndex::new(0.75).unwrap();
        assert_relative_eq!(h.variation_threshold(), 1.2, epsilon = 1e-14);
        assert_relative_eq!(h.p_bound(), 6.0, epsilon = 1e-14);
        assert_relative_eq!(h.alpha_h(), 0.375, epsilon = 1e-14);
        for k in 1..100 {
            let h = HurstIndex::new(0.5 + k as f64 * 0.005).unwrap();
            assert!(h.variation_threshold() > 1.0 && h.variation_threshold() < 2.0);
            assert!(h.p_bound() > 2.0);
            assert!(h.kappa_h() > 0.0);
        }
    }

    #[test]
    fn kappa_is_one_for_brownian_motion() {
        assert_relative_eq!(kappa(0.5), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_time_weight_vanishes() {
        let h = HurstIndex::new(0.7).unwrap();
        assert_eq!(h.time_weight(0.0), 0.0);
        assert_relative_eq!(h.time_weight(1.0), 1.4);
    }
}
