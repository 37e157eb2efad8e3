//! Left-point Young sums against local time.

use serde::{Deserialize, Serialize};

use super::{RealFunction, RealFunction2, SampledFunction2D};
use crate::error::{domain, FracError, Result};
use crate::local_time::LocalTimeField;

/// Dyadic refinement levels used by default.
pub const YOUNG_LEVELS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungEstimate {
    /// Finest-level sum.
    pub value: f64,
    /// Sums from the coarsest to the finest level.
    pub trace: Vec<f64>,
    pub strides: Vec<usize>,
}

impl YoungEstimate {
    fn from_trace(trace: Vec<f64>, strides: Vec<usize>) -> Self {
        Self {
            value: *trace.last().unwrap(),
            trace,
            strides,
        }
    }

    /// `|trace[l+1] − trace[l]|`.
    pub fn gaps(&self) -> Vec<f64> {
        self.trace.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }
}

// Indices 0, s, 2s, … together with the last index.
fn strided(len: usize, stride: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}

fn dyadic_strides(levels: usize) -> Result<Vec<usize>> {
    if levels == 0 || levels > 20 {
        return domain(format!("refinement levels must be in 1..=20, got {levels}"));
    }
    Ok((0..levels).map(|l| 1usize << (levels - 1 - l)).collect())
}

fn check_young_order(f: &dyn RealFunction, field: &LocalTimeField) -> Result<()> {
    let bound = field.hurst().p_bound();
    match f.declared_p() {
        Some(p) if p >= bound => Err(FracError::VariationOrder(format!(
            "declared variation order {p} ≥ 2H/(1−H) = {bound}"
        ))),
        _ => Ok(()),
    }
}

/// `∫ f(x) V(dx, t)` as left-point sums on the padded partition.
pub fn young_integral_1d(
    f: &dyn RealFunction,
    field: &LocalTimeField,
    t: f64,
) -> Result<YoungEstimate> {
    young_integral_1d_levels(f, field, t, YOUNG_LEVELS)
}

/// As [`young_integral_1d`] over `levels` dyadic coarsenings of the centers.
/// An undeclared variation order is accepted: a sampled function has
/// finite variation of every order on its grid.
pub fn young_integral_1d_levels(
    f: &dyn RealFunction,
    field: &LocalTimeField,
    t: f64,
    levels: usize,
) -> Result<YoungEstimate> {
    check_young_order(f, field)?;
    let (xs, vs) = field.padded_partition(field.time_index(t)?);
    let strides = dyadic_strides(levels)?;
    let trace = strides
        .iter()
        .map(|&s| {
            let idx = strided(xs.len(), s);
            idx.windows(2)
                .map(|w| f.value(xs[w[0]]) * (vs[w[1]] - vs[w[0]]))
                .sum()
        })
        .collect();
    Ok(YoungEstimate::from_trace(trace, strides))
}

/// `−Σ V(x_{i+1}, t)(f(x_{i+1}) − f(x_i))` on the full padded partition:
/// the summation-by-parts form, equal to the finest Young sum to round-off.
pub fn young_ibp_1d(f: &dyn RealFunction, field: &LocalTimeField, t: f64) -> Result<f64> {
    check_young_order(f, field)?;
    let (xs, vs) = field.padded_partition(field.time_index(t)?);
    let fx: Vec<f64> = xs.iter().map(|&x| f.value(x)).collect();
    Ok(-(0..xs.len() - 1)
        .map(|i| vs[i + 1] * (fx[i + 1] - fx[i]))
        .sum::<f64>())
}

/// `−∫ V(x, t) f′(x) dx` by the midpoint rule on the bin centers.
pub fn local_time_against_derivative(
    f: &dyn RealFunction,
    field: &LocalTimeField,
    t: f64,
) -> Result<f64> {
    let k = field.time_index(t)?;
    let w = field.space().width();
    Ok(-field
        .space()
        .centers()
        .iter()
        .enumerate()
        .map(|(i, &x)| field.value(i, k) * f.derivative(x))
        .sum::<f64>()
        * w)
}

fn check_cover(g: &dyn RealFunction2, f: &SampledFunction2D) -> Result<()> {
    if let Some(((x0, x1), (t0, t1))) = g.domain() {
        let xb = f.x_breaks();
        let tb = f.t_breaks();
        if !(x0 <= xb[0] + 1e-12
            && x1 >= xb[xb.len() - 1] - 1e-12
            && t0 <= tb[0] + 1e-12
            && t1 >= tb[tb.len() - 1] - 1e-12)
        {
            return domain("integrand grid does not cover the integrator grid");
        }
    }
    Ok(())
}

fn check_admissible(g: &dyn RealFunction2, f: &SampledFunction2D) -> Result<()> {
    if let Some(h) = f.local_time_of() {
        match g.orders() {
            Some(o) => o.check_admissible(&h)?,
            None => {
                return Err(FracError::VariationOrder(
                    "integrand against local time declares no variation orders".into(),
                ))
            }
        }
    }
    Ok(())
}

/// `lim Σ_j Σ_i G(x_{i−1}, t_{j−1}) ΔF(x_i, t_j)`.
pub fn young_integral_2d(g: &dyn RealFunction2, f: &SampledFunction2D) -> Result<YoungEstimate> {
    young_integral_2d_levels(g, f, YOUNG_LEVELS)
}

/// As [`young_integral_2d`], coarsening both axes by the same dyadic stride.
pub fn young_integral_2d_levels(
    g: &dyn RealFunction2,
    f: &SampledFunction2D,
    levels: usize,
) -> Result<YoungEstimate> {
    check_cover(g, f)?;
    check_admissible(g, f)?;
    let strides = dyadic_strides(levels)?;
    let xb = f.x_breaks();
    let tb = f.t_breaks();
    let trace = strides
        .iter()
        .map(|&s| {
            let xi = strided(xb.len(), s);
            let tj = strided(tb.len(), s);
            let mut sum = 0.0;
            for a in xi.windows(2) {
                for b in tj.windows(2) {
                    let inc = f.at(a[1], b[1]) - f.at(a[0], b[1]) - f.at(a[1], b[0])
                        + f.at(a[0], b[0]);
                    if inc != 0.0 {
                        sum += g.value(xb[a[0]], tb[b[0]]) * inc;
                    }
                }
            }
            sum
        })
        .collect();
    Ok(YoungEstimate::from_trace(trace, strides))
}

/// Right side of the two-parameter integration by parts,
/// `∫∫ V(x,s) G(dx,ds) − ∫ V(x,t) G(dx,t)`, with `V` sampled at the
/// lower-left corner of each cell.
pub fn young_2d_ibp_rhs(g: &dyn RealFunction2, field: &LocalTimeField) -> Result<f64> {
    let (xs, _) = field.padded_partition(0);
    let tk = field.grid().points();
    let m = field.grid().steps();
    let v = |i: usize, k: usize| -> f64 {
        if i == 0 || i == xs.len() - 1 {
            0.0
        } else {
            field.value(i - 1, k)
        }
    };
    let gv: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| tk.iter().map(|&s| g.value(x, s)).collect())
        .collect();
    let mut area = 0.0;
    for i in 0..xs.len() - 1 {
        for k in 0..m {
            let inc = gv[i + 1][k + 1] - gv[i][k + 1] - gv[i + 1][k] + gv[i][k];
            area += v(i, k) * inc;
        }
    }
    let edge: f64 = (0..xs.len() - 1)
        .map(|i| v(i, m) * (gv[i + 1][m] - gv[i][m]))
        .sum();
    Ok(area - edge)
}

/// `−∫ dx ∫ ∂G/∂x(x, s) V(x, ds)` by the midpoint rule in `x` and left
/// points in `s`.
pub fn local_time_against_dx(g: &dyn RealFunction2, field: &LocalTimeField) -> Result<f64> {
    let tk = field.grid().points();
    let m = field.grid().steps();
    let w = field.space().width();
    let mut sum = 0.0;
    for (i, &x) in field.space().centers().iter().enumerate() {
        for k in 0..m {
            let inc = field.value(i, k + 1) - field.value(i, k);
            if inc != 0.0 {
                sum += g.d_dx(x, tk[k]) * inc;
            }
        }
    }
    Ok(-sum * w)
}
