use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Uniform time discretization `t_k = kT/n`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if steps == 0 {
            return domain("time grid needs at least one step");
        }
        let dt = horizon / steps as f64;
        let mut points: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        points[steps] = horizon;
        Ok(Self {
            horizon,
            steps,
            points,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Grid with every `stride`-th point; `stride` must divide `n`.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || self.steps % stride != 0 {
            return domain(format!(
                "stride {stride} does not divide {} steps",
                self.steps
            ));
        }
        Self::new(self.horizon, self.steps / stride)
    }

    /// Index of the grid point equal to `t` (within half a step).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if t < -1e-12 || t > self.horizon * (1.0 + 1e-12) {
            return domain(format!("time {t} outside [0, {}]", self.horizon));
        }
        let k = (t / self.dt()).round() as usize;
        Ok(k.min(self.steps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let g = TimeGrid::new(0.3, 7).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[7], 0.3);
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(1.0, 8).unwrap().coarsen(3).is_err());
    }
}
