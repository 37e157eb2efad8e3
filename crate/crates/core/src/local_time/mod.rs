//! Window estimators of the local time `L(x,t)` and the weighted local time
//! `𝓛(x,t) = 2H ∫_0^t δ(B_s − x) s^{2H−1} ds`, with the occupation check,
//! the Tanaka reconstruction and the spatial p-variation profile.

mod export;
mod occupation;
mod pvariation;
mod tanaka;

pub use export::FieldMetadata;
pub use occupation::{occupation_check, OccupationCheck};
pub use pvariation::{average_profiles, p_variation_profile, PVariationProfile};
pub use tanaka::{tanaka_reconstruct, TanakaSeries};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::SamplePath;
use crate::grid::TimeGrid;
use crate::hurst::HurstIndex;
use crate::integration::{Interpolation, SampledFunction2D};

/// Default bandwidth constant `c` in `ε = c·n^{−H}`.
pub const DEFAULT_BANDWIDTH_CONSTANT: f64 = 1.0;

/// `ε = c·n^{−H}`.
pub fn default_bandwidth(steps: usize, h: &HurstIndex, c: f64) -> f64 {
    c * (steps as f64).powf(-h.value())
}

/// Uniform grid of bin centers on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    lo: f64,
    hi: f64,
    bins: usize,
    centers: Vec<f64>,
}

impl SpaceGrid {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("space grid needs lo < hi, got [{lo}, {hi}]"));
        }
        if bins == 0 {
            return domain("space grid needs at least one bin");
        }
        let w = (hi - lo) / bins as f64;
        let centers = (0..bins).map(|i| lo + (i as f64 + 0.5) * w).collect();
        Ok(Self {
            lo,
            hi,
            bins,
            centers,
        })
    }

    /// `[min B − 3ε, max B + 3ε]` with `2^{⌈log₂ √n⌉}` bins.
    pub fn auto(path: &SamplePath<'_>, bandwidth: f64) -> Result<Self> {
        let n = path.grid.steps() as f64;
        let bins = 1usize << (n.sqrt().log2().ceil().max(0.0) as u32);
        Self::auto_with_bins(path, bandwidth, bins)
    }

    pub fn auto_with_bins(path: &SamplePath<'_>, bandwidth: f64, bins: usize) -> Result<Self> {
        let (lo, hi) = path.range();
        Self::new(lo - 3.0 * bandwidth, hi + 3.0 * bandwidth, bins)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }
}

/// Estimated local-time surface on bin centers × a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeField {
    space: SpaceGrid,
    grid: TimeGrid,
    /// `values[i * (m+1) + k]` for center `i` and time index `k`.
    values: Vec<f64>,
    weighted: bool,
    bandwidth: f64,
    hurst: HurstIndex,
}

/// Window estimator recorded at every grid point.
pub fn estimate_local_time(
    path: &SamplePath<'_>,
    space: &SpaceGrid,
    bandwidth: f64,
    weighted: bool,
    h: &HurstIndex,
) -> Result<LocalTimeField> {
    estimate_local_time_strided(path, space, bandwidth, weighted, h, 1)
}

/// Window estimator
/// `V[i][k] = (1/2ε) Σ_{j<k} 1{|B_{s_j} − x_i| < ε} w_j Δs`, with
/// `w_j = 2H s_j^{2H−1}` when weighted and `1` otherwise, recorded at every
/// `stride`-th grid point.
pub fn estimate_local_time_strided(
    path: &SamplePath<'_>,
    space: &SpaceGrid,
    bandwidth: f64,
    weighted: bool,
    h: &HurstIndex,
    stride: usize,
) -> Result<LocalTimeField> {
    if !(bandwidth > 0.0) {
        return domain(format!("bandwidth must be positive, got {bandwidth}"));
    }
    let grid = path.grid.coarsen(stride)?;
    let m = grid.steps();
    let cols = m + 1;
    let bins = space.bins;
    let w = space.width();
    let dt = path.grid.dt();
    let mut acc = vec![0.0; bins];
    let mut values = vec![0.0; bins * cols];
    let pts = path.grid.points();
    for j in 0..path.grid.steps() {
        let b = path.values[j];
        let weight = if weighted { h.time_weight(pts[j]) } else { 1.0 };
        if weight != 0.0 {
            let inc = weight * dt / (2.0 * bandwidth);
            let first = ((b - bandwidth - space.lo) / w - 0.5).ceil().max(0.0) as usize;
            let last = ((b + bandwidth - space.lo) / w - 0.5).floor();
            if last >= 0.0 {
                let last = (last as usize).min(bins - 1);
                for (i, a) in acc.iter_mut().enumerate().take(last + 1).skip(first) {
                    if (b - space.centers[i]).abs() < bandwidth {
                        *a += inc;
                    }
                }
            }
        }
        if (j + 1) % stride == 0 {
            let k = (j + 1) / stride;
            for (i, a) in acc.iter().enumerate() {
                values[i * cols + k] = *a;
            }
        }
    }
    Ok(LocalTimeField {
        space: space.clone(),
        grid,
        values,
        weighted,
        bandwidth,
        hurst: *h,
    })
}

/// Window estimate at a single level `x`, as a series over the path grid.
pub fn window_local_time(
    path: &SamplePath<'_>,
    x: f64,
    bandwidth: f64,
    weighted: bool,
    h: &HurstIndex,
) -> Result<Vec<f64>> {
    if !(bandwidth > 0.0) {
        return domain(format!("bandwidth must be positive, got {bandwidth}"));
    }
    let dt = path.grid.dt();
    let mut series = Vec::with_capacity(path.values.len());
    let mut acc = 0.0;
    series.push(0.0);
    for (j, (&b, &s)) in path.values.iter().zip(path.grid.points()).enumerate() {
        if j == path.grid.steps() {
            break;
        }
        if (b - x).abs() < bandwidth {
            let weight = if weighted { h.time_weight(s) } else { 1.0 };
            acc += weight * dt / (2.0 * bandwidth);
        }
        series.push(acc);
    }
    Ok(series)
}

impl LocalTimeField {
    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn hurst(&self) -> HurstIndex {
        self.hurst
    }

    #[inline]
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * (self.grid.steps() + 1) + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `x ↦ V(x, t_k)` over the bin centers.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.space.bins).map(|i| self.value(i, k)).collect()
    }

    /// Partition `[lo, centers…, hi]` with the field set to zero at both pads.
    pub fn padded_partition(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(self.space.bins + 2);
        let mut vs = Vec::with_capacity(self.space.bins + 2);
        xs.push(self.space.lo);
        vs.push(0.0);
        for (i, &c) in self.space.centers.iter().enumerate() {
            xs.push(c);
            vs.push(self.value(i, k));
        }
        xs.push(self.space.hi);
        vs.push(0.0);
        (xs, vs)
    }

    /// `Σ_i V(x_i, t_k)·w`.
    pub fn mass(&self, k: usize) -> f64 {
        self.column(k).iter().sum::<f64>() * self.space.width()
    }

    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.grid.index_of(t)
    }

    /// The field as a two-parameter function on the padded partition × time grid.
    pub fn to_sampled_2d(&self) -> Result<SampledFunction2D> {
        let (xs, _) = self.padded_partition(0);
        let cols = self.grid.steps() + 1;
        let mut values = vec![0.0; xs.len() * cols];
        for i in 0..self.space.bins {
            values[(i + 1) * cols..(i + 2) * cols]
                .copy_from_slice(&self.values[i * cols..(i + 1) * cols]);
        }
        Ok(SampledFunction2D::new(
            xs,
            self.grid.points().to_vec(),
            values,
            Interpolation::Linear,
            Interpolation::Linear,
            None,
        )?
        .mark_local_time(self.hurst))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};

    fn sample(n: usize, hv: f64, seed: u64) -> (crate::gaussian::PathEnsemble, HurstIndex) {
        let h = HurstIndex::new(hv).unwrap();
        let grid = TimeGrid::new(1.0, n).unwrap();
        (generate_paths(&grid, h, 1, seed, GeneratorTag::Circulant).unwrap(), h)
    }

    #[test]
    fn field_is_monotone_nonnegative_and_starts_at_zero() {
        let (e, h) = sample(1 << 10, 0.7, 3);
        let p = e.path(0);
        let eps = default_bandwidth(1 << 10, &h, 1.0);
        let space = SpaceGrid::auto(&p, eps).unwrap();
        let f = estimate_local_time(&p, &space, eps, true, &h).unwrap();
        let m = f.grid().steps();
        for i in 0..space.bins() {
            assert_eq!(f.value(i, 0), 0.0);
            for k in 0..m {
                assert!(f.value(i, k) >= 0.0);
                assert!(f.value(i, k) <= f.value(i, k + 1));
            }
        }
    }

    #[test]
    fn never_visited_levels_are_zero() {
        let (e, h) = sample(1 << 10, 0.7, 4);
        let p = e.path(0);
        let (lo, hi) = p.range();
        let eps = 0.01;
        let space = SpaceGrid::new(lo - 1.0, hi + 1.0, 64).unwrap();
        let f = estimate_local_time(&p, &space, eps, false, &h).unwrap();
        for (i, &c) in space.centers().iter().enumerate() {
            if c > hi + eps || c < lo - eps {
                assert_eq!(f.value(i, f.grid().steps()), 0.0, "center {c}");
            }
        }
    }

    #[test]
    fn strided_field_matches_full_field() {
        let (e, h) = sample(1 << 8, 0.8, 5);
        let p = e.path(0);
        let space = SpaceGrid::auto(&p, 0.05).unwrap();
        let full = estimate_local_time(&p, &space, 0.05, true, &h).unwrap();
        let coarse = estimate_local_time_strided(&p, &space, 0.05, true, &h, 4).unwrap();
        for i in 0..space.bins() {
            for k in 0..=coarse.grid().steps() {
                assert_eq!(coarse.value(i, k), full.value(i, 4 * k));
            }
        }
    }

    #[test]
    fn bad_bandwidth_rejected() {
        let (e, h) = sample(16, 0.7, 1);
        let p = e.path(0);
        let space = SpaceGrid::new(-1.0, 1.0, 4).unwrap();
        assert!(estimate_local_time(&p, &space, 0.0, true, &h).is_err());
        assert!(window_local_time(&p, 0.0, -1.0, true, &h).is_err());
    }

    #[test]
    fn auto_grid_bins() {
        let (e, _) = sample(1 << 14, 0.7, 1);
        let space = SpaceGrid::auto(&e.path(0), 0.01).unwrap();
        assert_eq!(space.bins(), 128);
    }
}
