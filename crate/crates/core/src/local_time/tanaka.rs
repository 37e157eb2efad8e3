use serde::{Deserialize, Serialize};

use super::{default_bandwidth, window_local_time, DEFAULT_BANDWIDTH_CONSTANT};
use crate::covariation::wick_ito_series;
use crate::error::{domain, Result};
use crate::gaussian::SamplePath;
use crate::hurst::HurstIndex;
use crate::integration::{Elementary, Mollified};

/// `𝓛(x,t) ≈ |B_t − x| − |x| − ∫_0^t sign(B_s − x) dB_s` next to the window
/// estimate at the same level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanakaSeries {
    pub level: f64,
    pub times: Vec<f64>,
    /// Reconstruction at the finest mollifier order.
    pub reconstruction: Vec<f64>,
    pub window: Vec<f64>,
    /// Terminal reconstruction per mollifier order.
    pub order_trace: Vec<f64>,
}

impl TanakaSeries {
    pub fn terminal(&self) -> f64 {
        *self.reconstruction.last().unwrap()
    }

    pub fn terminal_window(&self) -> f64 {
        *self.window.last().unwrap()
    }

    pub fn terminal_relative_error(&self) -> f64 {
        (self.terminal() - self.terminal_window()).abs() / self.terminal_window().abs()
    }

    /// Largest drop between consecutive points.
    pub fn max_decrease(&self) -> f64 {
        self.reconstruction
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

pub fn tanaka_reconstruct(
    path: &SamplePath<'_>,
    x: f64,
    h: &HurstIndex,
    orders: &[u32],
) -> Result<TanakaSeries> {
    if orders.is_empty() {
        return domain("Tanaka reconstruction needs at least one mollifier order");
    }
    let sign = Elementary::sign_at(x);
    let reconstruct = |order: u32| -> Result<Vec<f64>> {
        let g = Mollified::new(sign, order)?;
        let integral = wick_ito_series(path, &g, h)?;
        Ok(path
            .values
            .iter()
            .zip(&integral)
            .map(|(&b, &i)| (b - x).abs() - x.abs() - i)
            .collect())
    };
    let mut order_trace = Vec::with_capacity(orders.len());
    let mut reconstruction = Vec::new();
    for &m in orders {
        reconstruction = reconstruct(m)?;
        order_trace.push(*reconstruction.last().unwrap());
    }
    let eps = default_bandwidth(path.grid.steps(), h, DEFAULT_BANDWIDTH_CONSTANT);
    let window = window_local_time(path, x, eps, true, h)?;
    Ok(TanakaSeries {
        level: x,
        times: path.grid.points().to_vec(),
        reconstruction,
        window,
        order_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::grid::TimeGrid;

    #[test]
    fn level_above_path_reconstructs_zero() {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(1.0, 1 << 10).unwrap();
        let e = generate_paths(&grid, h, 1, 21, GeneratorTag::Circulant).unwrap();
        let p = e.path(0);
        let x = p.range().1 + 1.0;
        let s = tanaka_reconstruct(&p, x, &h, &[100]).unwrap();
        assert!(s.reconstruction.iter().all(|v| v.abs() < 1e-10));
        assert!(s.window.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_orders_rejected() {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let e = generate_paths(&grid, h, 1, 1, GeneratorTag::Circulant).unwrap();
        assert!(tanaka_reconstruct(&e.path(0), 0.0, &h, &[]).is_err());
    }
}
