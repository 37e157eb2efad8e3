use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::covariance_unchecked;
use super::volterra::volterra_kernel;
use crate::error::{FracError, Result};
use crate::grid::TimeGrid;
use crate::hurst::HurstIndex;
use crate::quadrature::GaussLegendre;
use crate::rng::path_stream;

/// Default cap on the number of stored `f64` values (1 GiB).
pub const DEFAULT_VALUE_CAP: usize = 1 << 27;

// Relative clipping threshold for negative circulant eigenvalues.
const EIGEN_CLIP: f64 = 1e-9;
// Inner quadrature steps for the kernel weights of the `volterra` generator.
const VOLTERRA_KERNEL_STEPS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorTag {
    Cholesky,
    Circulant,
    Volterra,
}

impl GeneratorTag {
    pub fn code(self) -> u8 {
        match self {
            Self::Cholesky => 0,
            Self::Circulant => 1,
            Self::Volterra => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Cholesky),
            1 => Some(Self::Circulant),
            2 => Some(Self::Volterra),
            _ => None,
        }
    }
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cholesky => "cholesky",
            Self::Circulant => "circulant",
            Self::Volterra => "volterra",
        })
    }
}

impl FromStr for GeneratorTag {
    type Err = FracError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(Self::Cholesky),
            "circulant" => Ok(Self::Circulant),
            "volterra" => Ok(Self::Volterra),
            other => Err(FracError::Domain(format!("unknown generator `{other}`"))),
        }
    }
}

/// A single path borrowed from an ensemble (or built from raw values).
#[derive(Debug, Clone, Copy)]
pub struct SamplePath<'a> {
    pub grid: &'a TimeGrid,
    pub values: &'a [f64],
}

impl<'a> SamplePath<'a> {
    pub fn new(grid: &'a TimeGrid, values: &'a [f64]) -> Result<Self> {
        if values.len() != grid.steps() + 1 {
            return Err(FracError::Domain(format!(
                "path has {} values for a grid of {} steps",
                values.len(),
                grid.steps()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `B̂_s = B_{T−s}` on the same grid.
    pub fn reversed_values(&self) -> Vec<f64> {
        self.values.iter().rev().copied().collect()
    }

    /// Every `stride`-th value, on the correspondingly coarsened grid.
    pub fn subsample(&self, stride: usize) -> Result<(TimeGrid, Vec<f64>)> {
        let grid = self.grid.coarsen(stride)?;
        let values = self.values.iter().step_by(stride).copied().collect();
        Ok((grid, values))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    grid: TimeGrid,
    hurst: HurstIndex,
    count: usize,
    paths: Vec<f64>,
    seed: u64,
    generator: GeneratorTag,
}

impl PathEnsemble {
    pub(crate) fn from_parts(
        grid: TimeGrid,
        hurst: HurstIndex,
        count: usize,
        paths: Vec<f64>,
        seed: u64,
        generator: GeneratorTag,
    ) -> Result<Self> {
        if paths.len() != count * (grid.steps() + 1) {
            return Err(FracError::Format(format!(
                "expected {} path values, got {}",
                count * (grid.steps() + 1),
                paths.len()
            )));
        }
        Ok(Self {
            grid,
            hurst,
            count,
            paths,
            seed,
            generator,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> HurstIndex {
        self.hurst
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> GeneratorTag {
        self.generator
    }

    /// Row-major values, one row of `n+1` per path.
    pub fn values(&self) -> &[f64] {
        &self.paths
    }

    pub fn path(&self, i: usize) -> SamplePath<'_> {
        let w = self.grid.steps() + 1;
        SamplePath {
            grid: &self.grid,
            values: &self.paths[i * w..(i + 1) * w],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = SamplePath<'_>> + '_ {
        (0..self.count).map(move |i| self.path(i))
    }
}

pub fn generate_paths(
    grid: &TimeGrid,
    h: HurstIndex,
    count: usize,
    seed: u64,
    method: GeneratorTag,
) -> Result<PathEnsemble> {
    generate_paths_capped(grid, h, count, seed, method, DEFAULT_VALUE_CAP)
}

/// As [`generate_paths`], refusing to allocate more than `value_cap` values.
pub fn generate_paths_capped(
    grid: &TimeGrid,
    h: HurstIndex,
    count: usize,
    seed: u64,
    method: GeneratorTag,
    value_cap: usize,
) -> Result<PathEnsemble> {
    if count == 0 {
        return Err(FracError::Domain("path count must be positive".into()));
    }
    let n = grid.steps();
    let width = n + 1;
    let total = count
        .checked_mul(width)
        .filter(|&v| v <= value_cap)
        .ok_or_else(|| {
            FracError::Resource(format!(
                "{count} paths × {width} points exceeds the cap of {value_cap} values"
            ))
        })?;
    if matches!(method, GeneratorTag::Cholesky | GeneratorTag::Volterra)
        && n.checked_mul(n).is_none_or(|v| v > value_cap)
    {
        return Err(FracError::Resource(format!(
            "{method} generator needs an {n}×{n} matrix, over the cap of {value_cap} values"
        )));
    }

    let mut paths = vec![0.0; total];
    match method {
        GeneratorTag::Circulant => {
            let sampler = CirculantSampler::new(n, h.value())?;
            let scale = grid.dt().powf(h.value());
            paths
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, row)| sampler.fill(row, scale, seed, i as u64));
        }
        GeneratorTag::Cholesky => {
            let factor = cholesky_factor(grid, h.value())?;
            paths
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, row)| lower_triangular_fill(&factor, row, seed, i as u64));
        }
        GeneratorTag::Volterra => {
            let weights = volterra_weights(grid, &h);
            paths
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, row)| lower_triangular_fill(&weights, row, seed, i as u64));
        }
    }
    PathEnsemble::from_parts(grid.clone(), h, count, paths, seed, method)
}

// Lower-triangular factor stored densely, row k holding the weights of B_{t_{k+1}}.
struct TriangularFactor {
    n: usize,
    rows: Vec<f64>,
}

fn lower_triangular_fill(factor: &TriangularFactor, row: &mut [f64], seed: u64, index: u64) {
    let mut rng = path_stream(seed, index);
    let z: Vec<f64> = (0..factor.n).map(|_| rng.sample(StandardNormal)).collect();
    row[0] = 0.0;
    for k in 0..factor.n {
        let w = &factor.rows[k * factor.n..k * factor.n + k + 1];
        row[k + 1] = w.iter().zip(&z).map(|(a, b)| a * b).sum();
    }
}

fn cholesky_factor(grid: &TimeGrid, h: f64) -> Result<TriangularFactor> {
    let n = grid.steps();
    let t = &grid.points()[1..];
    let cov = DMatrix::from_fn(n, n, |i, j| covariance_unchecked(t[i], t[j], h));
    let chol = cov.cholesky().ok_or_else(|| {
        FracError::Domain("covariance matrix is not numerically positive definite".into())
    })?;
    let l = chol.l();
    let mut rows = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            rows[i * n + j] = l[(i, j)];
        }
    }
    Ok(TriangularFactor { n, rows })
}

// Cell-averaged kernel: B_{t_k} ≈ Σ_j (1/√Δ ∫_{cell j} K(t_k,u) du) Z_j.
fn volterra_weights(grid: &TimeGrid, h: &HurstIndex) -> TriangularFactor {
    let n = grid.steps();
    let dt = grid.dt();
    let gl = GaussLegendre::new(4);
    let mut rows = vec![0.0; n * n];
    rows.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let t = grid.points()[k + 1];
        for (j, w) in row.iter_mut().enumerate().take(k + 1) {
            let lo = j as f64 * dt;
            let hi = if j == k { t } else { lo + dt };
            let integral = gl.integrate(lo, hi, |u| {
                volterra_kernel(t, u, h, VOLTERRA_KERNEL_STEPS).unwrap_or(0.0)
            });
            *w = integral / dt.sqrt();
        }
    });
    TriangularFactor { n, rows }
}

/// Davies–Harte sampler for unit-step fractional Gaussian noise.
struct CirculantSampler {
    n: usize,
    sqrt_eigen: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl CirculantSampler {
    fn new(n: usize, h: f64) -> Result<Self> {
        let m = 2 * n;
        let gamma = |k: f64| {
            let e = 2.0 * h;
            0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
        };
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let k = if j <= n { j } else { m - j };
                Complex::new(gamma(k as f64), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let tolerance = EIGEN_CLIP * max;
        let mut sqrt_eigen = Vec::with_capacity(m);
        for c in &row {
            if c.re < -tolerance {
                return Err(FracError::Embedding {
                    value: c.re,
                    tolerance: -tolerance,
                });
            }
            sqrt_eigen.push((c.re.max(0.0) / m as f64).sqrt());
        }
        Ok(Self { n, sqrt_eigen, fft })
    }

    fn fill(&self, row: &mut [f64], scale: f64, seed: u64, index: u64) {
        let mut rng = path_stream(seed, index);
        let mut buf: Vec<Complex<f64>> = self
            .sqrt_eigen
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        row[0] = 0.0;
        let mut acc = 0.0;
        for k in 0..self.n {
            acc += buf[k].re * scale;
            row[k + 1] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    #[test]
    fn paths_start_at_zero() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        for method in [GeneratorTag::Cholesky, GeneratorTag::Circulant, GeneratorTag::Volterra] {
            let e = generate_paths(&grid, h(0.7), 3, 1, method).unwrap();
            assert!(e.iter().all(|p| p.values[0] == 0.0), "{method}");
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let grid = TimeGrid::new(2.0, 32).unwrap();
        for method in [GeneratorTag::Cholesky, GeneratorTag::Circulant, GeneratorTag::Volterra] {
            let a = generate_paths(&grid, h(0.8), 4, 99, method).unwrap();
            let b = generate_paths(&grid, h(0.8), 4, 99, method).unwrap();
            assert_eq!(a, b);
            let c = generate_paths(&grid, h(0.8), 4, 100, method).unwrap();
            assert_ne!(a.values(), c.values());
        }
    }

    #[test]
    fn path_prefix_independent_of_count() {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let a = generate_paths(&grid, h(0.65), 2, 5, GeneratorTag::Circulant).unwrap();
        let b = generate_paths(&grid, h(0.65), 7, 5, GeneratorTag::Circulant).unwrap();
        assert_eq!(a.path(1).values, b.path(1).values);
    }

    #[test]
    fn resource_cap_enforced() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let r = generate_paths_capped(&grid, h(0.7), 50, 1, GeneratorTag::Circulant, 1000);
        assert!(matches!(r, Err(FracError::Resource(_))));
        let r = generate_paths_capped(&grid, h(0.7), 1, 1, GeneratorTag::Cholesky, 5000);
        assert!(matches!(r, Err(FracError::Resource(_))));
    }

    #[test]
    fn circulant_eigenvalues_nonnegative() {
        for hv in [0.51, 0.6, 0.75, 0.9, 0.99] {
            let s = CirculantSampler::new(1 << 10, hv).unwrap();
            assert!(s.sqrt_eigen.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn tag_round_trip() {
        for tag in [GeneratorTag::Cholesky, GeneratorTag::Circulant, GeneratorTag::Volterra] {
            assert_eq!(GeneratorTag::from_code(tag.code()), Some(tag));
            assert_eq!(tag.to_string().parse::<GeneratorTag>().unwrap(), tag);
        }
        assert!("hosking".parse::<GeneratorTag>().is_err());
    }
}
