use serde::{Deserialize, Serialize};

use super::{stride_for, weight_pow};
use crate::error::{domain, Result};
use crate::gaussian::SamplePath;
use crate::hurst::HurstIndex;
use crate::integration::RealFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerVariation {
    /// `Σ_k k^{2Hp−1} g(B_{t_k}) (ΔB_k)^{2p}`.
    pub sum: f64,
    /// `μ_{2p} ∫_0^t g(B_s) s^{2Hp−1} ds` along the full-resolution path.
    pub target: f64,
}

/// `E[Z^{2p}] = (2p−1)!!`.
pub fn gaussian_even_moment(p: u32) -> f64 {
    (1..=p).map(|i| f64::from(2 * i - 1)).product()
}

pub fn weighted_power_variation(
    path: &SamplePath<'_>,
    g: &dyn RealFunction,
    p: u32,
    n: usize,
    h: &HurstIndex,
) -> Result<PowerVariation> {
    if p == 0 {
        return domain("power variation order must be at least 1");
    }
    let stride = stride_for(path, n)?;
    let e = 2.0 * h.value() * f64::from(p);
    let v = path.values;
    let sum = (0..n)
        .map(|k| {
            let d = v[(k + 1) * stride] - v[k * stride];
            weight_pow(k, e - 1.0) * g.value(v[k * stride]) * d.powi(2 * p as i32)
        })
        .sum();
    // exact cell integrals of s^{e−1}, left-point values of g(B)
    let pts = path.grid.points();
    let quad: f64 = (0..path.grid.steps())
        .map(|j| g.value(v[j]) * (pts[j + 1].powf(e) - pts[j].powf(e)) / e)
        .sum();
    Ok(PowerVariation {
        sum,
        target: gaussian_even_moment(p) * quad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::grid::TimeGrid;
    use crate::integration::Elementary;

    #[test]
    fn even_moments() {
        assert_eq!(gaussian_even_moment(1), 1.0);
        assert_eq!(gaussian_even_moment(2), 3.0);
        assert_eq!(gaussian_even_moment(3), 15.0);
    }

    #[test]
    fn target_for_unit_integrand() {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(2.0, 64).unwrap();
        let e = generate_paths(&grid, h, 1, 1, GeneratorTag::Circulant).unwrap();
        let pv = weighted_power_variation(&e.path(0), &Elementary::constant(1.0), 1, 64, &h).unwrap();
        // ∫_0^t s^{2H−1} ds = t^{2H}/(2H)
        assert!((pv.target * 1.4 - 2f64.powf(1.4)).abs() < 1e-12);
    }

    #[test]
    fn resolution_must_divide() {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let e = generate_paths(&grid, h, 1, 1, GeneratorTag::Circulant).unwrap();
        let g = Elementary::constant(1.0);
        assert!(weighted_power_variation(&e.path(0), &g, 1, 128, &h).is_err());
        assert!(weighted_power_variation(&e.path(0), &g, 1, 48, &h).is_err());
    }
}
