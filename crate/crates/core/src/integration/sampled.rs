//! Piecewise-defined integrands on explicit breakpoint grids.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::function::{RealFunction, RealFunction2};
use crate::error::{domain, FracError, Result};
use crate::hurst::HurstIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Left-continuous steps: `f(x) = values[i]` on `(b_{i−1}, b_i]`.
    Step,
    Linear,
}

fn check_breaks(breaks: &[f64], what: &str) -> Result<()> {
    if breaks.is_empty() {
        return domain(format!("{what}: no breakpoints"));
    }
    if breaks.iter().any(|b| !b.is_finite()) {
        return domain(format!("{what}: non-finite breakpoint"));
    }
    if !breaks.windows(2).all(|w| w[0] < w[1]) {
        return domain(format!("{what}: breakpoints not strictly increasing"));
    }
    Ok(())
}

// Position of `x` relative to `breaks`: index `i` with breaks[i-1] < x <= breaks[i].
fn locate(breaks: &[f64], x: f64) -> usize {
    breaks.partition_point(|&b| b < x)
}

fn interpolate(breaks: &[f64], values: impl Fn(usize) -> f64, interp: Interpolation, x: f64) -> f64 {
    let n = breaks.len();
    let i = locate(breaks, x);
    if i == 0 {
        return values(0);
    }
    if i >= n {
        return values(n - 1);
    }
    match interp {
        Interpolation::Step => values(i),
        Interpolation::Linear => {
            let (b0, b1) = (breaks[i - 1], breaks[i]);
            let w = (x - b0) / (b1 - b0);
            values(i - 1) * (1.0 - w) + values(i) * w
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
    declared_p: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar1D {
    interpolation: Interpolation,
    declared_p: Option<f64>,
}

impl SampledFunction1D {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
        declared_p: Option<f64>,
    ) -> Result<Self> {
        check_breaks(&breakpoints, "SampledFunction1D")?;
        if breakpoints.len() != values.len() {
            return domain(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            ));
        }
        if let Some(p) = declared_p {
            if !(p >= 1.0) {
                return Err(FracError::VariationOrder(format!(
                    "declared variation order {p} < 1"
                )));
            }
        }
        let f = Self {
            breakpoints,
            values,
            interpolation,
            declared_p,
        };
        if let Some(p) = declared_p {
            if !f.p_variation_sum(p).is_finite() {
                return Err(FracError::VariationOrder(format!(
                    "non-finite {p}-variation over the breakpoint partition"
                )));
            }
        }
        Ok(f)
    }

    /// Samples `f` at `breaks`.
    pub fn sample(
        f: &dyn RealFunction,
        breaks: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let values = breaks.iter().map(|&x| f.value(x)).collect();
        Self::new(breaks, values, interpolation, f.declared_p())
    }

    /// Uniform breakpoints `lo + k(hi−lo)/m`, `k = 0..=m`.
    pub fn uniform_breaks(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        let h = (hi - lo) / m as f64;
        let mut b: Vec<f64> = (0..=m).map(|k| lo + k as f64 * h).collect();
        b[m] = hi;
        b
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn with_declared_p(mut self, p: Option<f64>) -> Result<Self> {
        self.declared_p = p;
        Self::new(self.breakpoints, self.values, self.interpolation, p)
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        self.breakpoints[0] <= lo + tol && *self.breakpoints.last().unwrap() >= hi - tol
    }

    /// `Σ |f(b_{i+1}) − f(b_i)|^p` over the breakpoint partition.
    pub fn p_variation_sum(&self, p: f64) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs().powf(p))
            .sum()
    }

    /// `a·f₁ + b·f₂` on shared breakpoints.
    pub fn combine(a: f64, f1: &Self, b: f64, f2: &Self) -> Result<Self> {
        if f1.breakpoints != f2.breakpoints || f1.interpolation != f2.interpolation {
            return domain("linear combination needs identical breakpoints and interpolation");
        }
        let values = f1
            .values
            .iter()
            .zip(&f2.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let p = match (f1.declared_p, f2.declared_p) {
            (Some(p1), Some(p2)) => Some(p1.max(p2)),
            _ => None,
        };
        Self::new(f1.breakpoints.clone(), values, f1.interpolation, p)
    }

    /// Writes `(breakpoint, value)` rows and a `.json` sidecar next to `path`.
    pub fn store(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["breakpoint", "value"])?;
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            w.write_record([format!("{b:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        let side = Sidecar1D {
            interpolation: self.interpolation,
            declared_p: self.declared_p,
        };
        let f = BufWriter::new(File::create(path.with_extension("json"))?);
        serde_json::to_writer_pretty(f, &side)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let side: Sidecar1D =
            serde_json::from_reader(BufReader::new(File::open(path.with_extension("json"))?))?;
        let mut r = csv::Reader::from_path(path)?;
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        for row in r.deserialize() {
            let (b, v): (f64, f64) = row?;
            breaks.push(b);
            values.push(v);
        }
        Self::new(breaks, values, side.interpolation, side.declared_p)
    }
}

impl RealFunction for SampledFunction1D {
    fn value(&self, x: f64) -> f64 {
        interpolate(&self.breakpoints, |i| self.values[i], self.interpolation, x)
    }

    fn is_smooth(&self) -> bool {
        self.interpolation == Interpolation::Linear
    }

    fn declared_p(&self) -> Option<f64> {
        self.declared_p
    }

    fn domain(&self) -> Option<(f64, f64)> {
        Some((self.breakpoints[0], *self.breakpoints.last().unwrap()))
    }

    fn derivative(&self, x: f64) -> f64 {
        match self.interpolation {
            Interpolation::Step => 0.0,
            Interpolation::Linear => {
                let n = self.breakpoints.len();
                if n < 2 {
                    return 0.0;
                }
                let i = locate(&self.breakpoints, x).clamp(1, n - 1);
                (self.values[i] - self.values[i - 1])
                    / (self.breakpoints[i] - self.breakpoints[i - 1])
            }
        }
    }

    fn step_jumps(&self) -> Option<(f64, Vec<(f64, f64)>)> {
        match self.interpolation {
            Interpolation::Linear if self.values.len() > 1 => None,
            _ => Some((
                self.values[0],
                self.values
                    .windows(2)
                    .zip(&self.breakpoints)
                    .filter(|(w, _)| w[1] != w[0])
                    .map(|(w, &b)| (b, w[1] - w[0]))
                    .collect(),
            )),
        }
    }
}

/// Variation orders `(p, q, γ)` of a two-parameter integrand: bounded
/// `p,q`-variation in `(x, s)` and `γ`-variation in `x` uniformly in `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationOrders {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

impl VariationOrders {
    pub const SMOOTH: Self = Self {
        p: 1.0,
        q: 1.0,
        gamma: 1.0,
    };

    /// `1 ≤ γ < 2H/(1−H)` and `2Hpq < 2Hq + 3H − 1` with `p, q ≥ 1`.
    pub fn check_admissible(&self, h: &HurstIndex) -> Result<()> {
        let hv = h.value();
        let ok_gamma = self.gamma >= 1.0 && self.gamma < h.p_bound();
        let ok_pq = self.p >= 1.0
            && self.q >= 1.0
            && 2.0 * hv * self.p * self.q < 2.0 * hv * self.q + 3.0 * hv - 1.0;
        if ok_gamma && ok_pq {
            Ok(())
        } else {
            Err(FracError::VariationOrder(format!(
                "orders (p={}, q={}, γ={}) inadmissible at H={hv}",
                self.p, self.q, self.gamma
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction2D {
    x_breaks: Vec<f64>,
    t_breaks: Vec<f64>,
    /// Row-major: `values[i * t_breaks.len() + j] = F(x_i, t_j)`.
    values: Vec<f64>,
    interp_x: Interpolation,
    interp_t: Interpolation,
    orders: Option<VariationOrders>,
    /// Set when the function is a weighted local-time field of an fBm with this index.
    local_time_of: Option<HurstIndex>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar2D {
    interp_x: Interpolation,
    interp_t: Interpolation,
    orders: Option<VariationOrders>,
}

impl SampledFunction2D {
    pub fn new(
        x_breaks: Vec<f64>,
        t_breaks: Vec<f64>,
        values: Vec<f64>,
        interp_x: Interpolation,
        interp_t: Interpolation,
        orders: Option<VariationOrders>,
    ) -> Result<Self> {
        check_breaks(&x_breaks, "SampledFunction2D x")?;
        check_breaks(&t_breaks, "SampledFunction2D t")?;
        if values.len() != x_breaks.len() * t_breaks.len() {
            return domain(format!(
                "expected {}×{} values, got {}",
                x_breaks.len(),
                t_breaks.len(),
                values.len()
            ));
        }
        Ok(Self {
            x_breaks,
            t_breaks,
            values,
            interp_x,
            interp_t,
            orders,
            local_time_of: None,
        })
    }

    pub fn sample(
        f: &dyn RealFunction2,
        x_breaks: Vec<f64>,
        t_breaks: Vec<f64>,
        interpolation: Interpolation,
        orders: Option<VariationOrders>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(x_breaks.len() * t_breaks.len());
        for &x in &x_breaks {
            for &t in &t_breaks {
                values.push(f.value(x, t));
            }
        }
        Self::new(x_breaks, t_breaks, values, interpolation, interpolation, orders)
    }

    pub(crate) fn mark_local_time(mut self, h: HurstIndex) -> Self {
        self.local_time_of = Some(h);
        self
    }

    pub fn x_breaks(&self) -> &[f64] {
        &self.x_breaks
    }

    pub fn t_breaks(&self) -> &[f64] {
        &self.t_breaks
    }

    pub fn orders(&self) -> Option<VariationOrders> {
        self.orders
    }

    pub fn local_time_of(&self) -> Option<HurstIndex> {
        self.local_time_of
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t_breaks.len() + j]
    }

    /// Rectangular increment `ΔF(x_i, t_j)` for `i, j ≥ 1`.
    #[inline]
    pub fn rect_increment(&self, i: usize, j: usize) -> f64 {
        self.at(i, j) - self.at(i - 1, j) - self.at(i, j - 1) + self.at(i - 1, j - 1)
    }

    pub fn covers(&self, x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64) -> bool {
        let tol = 1e-12;
        self.x_breaks[0] <= x_lo + tol
            && *self.x_breaks.last().unwrap() >= x_hi - tol
            && self.t_breaks[0] <= t_lo + tol
            && *self.t_breaks.last().unwrap() >= t_hi - tol
    }

    /// Long-format `(x, t, value)` rows plus a `.json` sidecar.
    pub fn store(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "t", "value"])?;
        for (i, x) in self.x_breaks.iter().enumerate() {
            for (j, t) in self.t_breaks.iter().enumerate() {
                w.write_record([format!("{x:e}"), format!("{t:e}"), format!("{:e}", self.at(i, j))])?;
            }
        }
        w.flush()?;
        let side = Sidecar2D {
            interp_x: self.interp_x,
            interp_t: self.interp_t,
            orders: self.orders,
        };
        let f = BufWriter::new(File::create(path.with_extension("json"))?);
        serde_json::to_writer_pretty(f, &side)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let side: Sidecar2D =
            serde_json::from_reader(BufReader::new(File::open(path.with_extension("json"))?))?;
        let mut r = csv::Reader::from_path(path)?;
        let mut xs: Vec<f64> = Vec::new();
        let mut ts: Vec<f64> = Vec::new();
        let mut values = Vec::new();
        for row in r.deserialize() {
            let (x, t, v): (f64, f64, f64) = row?;
            if xs.last() != Some(&x) {
                xs.push(x);
            }
            if xs.len() == 1 {
                ts.push(t);
            }
            values.push(v);
        }
        Self::new(xs, ts, values, side.interp_x, side.interp_t, side.orders)
    }
}

impl RealFunction2 for SampledFunction2D {
    fn value(&self, x: f64, s: f64) -> f64 {
        let nt = self.t_breaks.len();
        let along_t = |i: usize| {
            interpolate(&self.t_breaks, |j| self.values[i * nt + j], self.interp_t, s)
        };
        interpolate(&self.x_breaks, along_t, self.interp_x, x)
    }

    fn is_smooth(&self) -> bool {
        self.interp_x == Interpolation::Linear && self.interp_t == Interpolation::Linear
    }

    fn domain(&self) -> Option<((f64, f64), (f64, f64))> {
        Some((
            (self.x_breaks[0], *self.x_breaks.last().unwrap()),
            (self.t_breaks[0], *self.t_breaks.last().unwrap()),
        ))
    }

    fn orders(&self) -> Option<VariationOrders> {
        self.orders
    }
}
