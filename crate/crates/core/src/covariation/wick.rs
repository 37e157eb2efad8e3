//! Wick–Itô integrals as forward sums minus the correction
//! `H ∫ f′(B_s) s^{2H−1} ds`.
//!
//! The correction is evaluated cell by cell on the linearly interpolated
//! path: `∫_cell f′(B_s) ds = Δs · (f(B_{k+1}) − f(B_k)) / ΔB_k`, exact for
//! absolutely continuous `f`, with the weight integrated exactly per cell.
//! Non-smooth integrands go through the mollified limit.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::gaussian::SamplePath;
use crate::hurst::HurstIndex;
use crate::integration::{Mollified, RealFunction, RealFunction2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WickEstimate {
    pub value: f64,
    /// One entry per mollifier order; a single entry for smooth integrands.
    pub trace: Vec<f64>,
    pub orders: Vec<u32>,
}

impl WickEstimate {
    pub fn gaps(&self) -> Vec<f64> {
        self.trace.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }
}

// ∫_cell s^{2H−1} ds, or ∫_cell (T−s)^{2H−1} ds when reversed.
fn weight_cells(points: &[f64], h: &HurstIndex, reversed: bool) -> Vec<f64> {
    let e = 2.0 * h.value();
    let horizon = *points.last().unwrap();
    points
        .windows(2)
        .map(|w| {
            if reversed {
                ((horizon - w[0]).max(0.0).powf(e) - (horizon - w[1]).max(0.0).powf(e)) / e
            } else {
                (w[1].powf(e) - w[0].powf(e)) / e
            }
        })
        .collect()
}

const FLAT_STEP: f64 = 1e-13;

/// Partial sums over cells `from..to`, indexed from `from`.
/// `left[k] = f(B_k, s_k)`, `right[k] = f(B_{k+1}, s_k)`.
fn chord_series(
    values: &[f64],
    left: impl Fn(usize) -> f64,
    right: impl Fn(usize) -> f64,
    slope: impl Fn(usize) -> f64,
    cells: &[f64],
    h: &HurstIndex,
    from: usize,
    to: usize,
) -> Vec<f64> {
    let hv = h.value();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(to - from + 1);
    out.push(0.0);
    for k in from..to {
        let db = values[k + 1] - values[k];
        let fl = left(k);
        let chord = if db.abs() > FLAT_STEP * (1.0 + values[k].abs()) {
            (right(k) - fl) / db
        } else {
            slope(k)
        };
        acc += fl * db - hv * cells[k] * chord;
        out.push(acc);
    }
    out
}

fn require_smooth(f: &dyn RealFunction) -> Result<()> {
    if f.is_smooth() {
        Ok(())
    } else {
        Err(FracError::Contract(
            "non-smooth integrand needs mollifier orders".into(),
        ))
    }
}

fn series_1d(
    values: &[f64],
    points: &[f64],
    f: &dyn RealFunction,
    h: &HurstIndex,
    reversed: bool,
    from: usize,
) -> Vec<f64> {
    let fv: Vec<f64> = values.iter().map(|&x| f.value(x)).collect();
    let cells = weight_cells(points, h, reversed);
    chord_series(
        values,
        |k| fv[k],
        |k| fv[k + 1],
        |k| f.derivative(values[k]),
        &cells,
        h,
        from,
        values.len() - 1,
    )
}

/// `t_k ↦ ∫_0^{t_k} f(B_s) dB_s` for smooth `f`.
pub fn wick_ito_series(
    path: &SamplePath<'_>,
    f: &dyn RealFunction,
    h: &HurstIndex,
) -> Result<Vec<f64>> {
    require_smooth(f)?;
    Ok(series_1d(path.values, path.grid.points(), f, h, false, 0))
}

fn over_orders(
    f: &dyn RealFunction,
    orders: &[u32],
    eval: impl Fn(&dyn RealFunction) -> f64,
) -> Result<WickEstimate> {
    if f.is_smooth() {
        let v = eval(f);
        return Ok(WickEstimate {
            value: v,
            trace: vec![v],
            orders: Vec::new(),
        });
    }
    if orders.is_empty() {
        require_smooth(f)?;
    }
    let trace = orders
        .iter()
        .map(|&m| Ok(eval(&Mollified::new(f, m)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(WickEstimate {
        value: *trace.last().unwrap(),
        trace,
        orders: orders.to_vec(),
    })
}

/// `∫_0^T f(B_s) dB_s`; for non-smooth `f` the limit over `orders` of the
/// integrals of the mollified integrands.
pub fn wick_ito_integral(
    path: &SamplePath<'_>,
    f: &dyn RealFunction,
    h: &HurstIndex,
    orders: &[u32],
) -> Result<WickEstimate> {
    let pts = path.grid.points();
    over_orders(f, orders, |g| {
        *series_1d(path.values, pts, g, h, false, 0).last().unwrap()
    })
}

/// `∫_{T−t}^T f(B̂_s) dB̂_s` on the reversed path `B̂_s = B_{T−s}`, with the
/// correction weight `(T−s)^{2H−1}`.
pub fn reversed_wick_integral(
    path: &SamplePath<'_>,
    f: &dyn RealFunction,
    t: f64,
    h: &HurstIndex,
    orders: &[u32],
) -> Result<WickEstimate> {
    let k = path.grid.index_of(t)?;
    let rev = path.reversed_values();
    let pts = path.grid.points();
    let from = path.grid.steps() - k;
    over_orders(f, orders, |g| {
        *series_1d(&rev, pts, g, h, true, from).last().unwrap()
    })
}

/// `∫_0^t f(B_s, s) dB_s` for smooth `f`, or with `reversed` the integral
/// `∫_{T−t}^T f(B̂_s, T−s) dB̂_s` on the reversed path.
pub fn wick_ito_integral_2d(
    path: &SamplePath<'_>,
    f: &dyn RealFunction2,
    t: f64,
    h: &HurstIndex,
    reversed: bool,
) -> Result<f64> {
    if !f.is_smooth() {
        return Err(FracError::Contract(
            "two-parameter Wick integral needs a smooth integrand".into(),
        ));
    }
    let k = path.grid.index_of(t)?;
    let pts = path.grid.points();
    let horizon = path.grid.horizon();
    let n = path.grid.steps();
    let owned;
    let (values, from, to): (&[f64], usize, usize) = if reversed {
        owned = path.reversed_values();
        (&owned, n - k, n)
    } else {
        (path.values, 0, k)
    };
    let time = |j: usize| if reversed { horizon - pts[j] } else { pts[j] };
    let cells = weight_cells(pts, h, reversed);
    let series = chord_series(
        values,
        |j| f.value(values[j], time(j)),
        |j| f.value(values[j + 1], time(j)),
        |j| f.d_dx(values[j], time(j)),
        &cells,
        h,
        from,
        to,
    );
    Ok(*series.last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::grid::TimeGrid;
    use crate::integration::{Elementary, Product2, TimeConstant};
    use approx::assert_relative_eq;

    fn setup(n: usize, seed: u64) -> (crate::gaussian::PathEnsemble, HurstIndex) {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(1.0, n).unwrap();
        (generate_paths(&grid, h, 1, seed, GeneratorTag::Circulant).unwrap(), h)
    }

    #[test]
    fn unit_integrand_gives_the_path() {
        let (e, h) = setup(256, 1);
        let p = e.path(0);
        let s = wick_ito_series(&p, &Elementary::constant(1.0), &h).unwrap();
        for (a, b) in s.iter().zip(p.values) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_integrand_matches_discrete_ito() {
        // Σ B_k ΔB_k − t^{2H}/2 exactly, by the chord rule
        let (e, h) = setup(512, 2);
        let p = e.path(0);
        let v = wick_ito_integral(&p, &Elementary::identity(), &h, &[]).unwrap().value;
        let fwd: f64 = p.values.windows(2).map(|w| w[0] * (w[1] - w[0])).sum();
        assert_relative_eq!(v, fwd - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sign_needs_orders() {
        let (e, h) = setup(64, 3);
        assert!(matches!(
            wick_ito_integral(&e.path(0), &Elementary::sign_at(0.0), &h, &[]),
            Err(FracError::Contract(_))
        ));
        let w = wick_ito_integral(&e.path(0), &Elementary::sign_at(0.0), &h, &[10, 100]).unwrap();
        assert_eq!(w.trace.len(), 2);
        assert_eq!(w.value, w.trace[1]);
    }

    #[test]
    fn constant_sign_telescopes() {
        let (e, h) = setup(256, 4);
        let p = e.path(0);
        let a = p.range().1 + 1.0;
        let w = wick_ito_integral(&p, &Elementary::sign_at(a), &h, &[1000]).unwrap();
        assert_relative_eq!(w.value, -p.terminal(), epsilon = 1e-12);
    }

    #[test]
    fn two_parameter_agrees_with_one_parameter() {
        let (e, h) = setup(256, 5);
        let p = e.path(0);
        let f = Elementary::Sin { freq: 1.5 };
        let one = wick_ito_integral(&p, &f, &h, &[]).unwrap().value;
        let two = wick_ito_integral_2d(&p, &TimeConstant(f), 1.0, &h, false).unwrap();
        assert_relative_eq!(one, two, epsilon = 1e-12);
        let rev1 = reversed_wick_integral(&p, &f, 1.0, &h, &[]).unwrap().value;
        let rev2 = wick_ito_integral_2d(&p, &TimeConstant(f), 1.0, &h, true).unwrap();
        assert_relative_eq!(rev1, rev2, epsilon = 1e-12);
        // pure time integrand: no correction
        let g = Product2::new(Elementary::constant(1.0), Elementary::identity());
        let v = wick_ito_integral_2d(&p, &g, 1.0, &h, false).unwrap();
        let pts = p.grid.points();
        let fwd: f64 = (0..256).map(|k| pts[k] * (p.values[k + 1] - p.values[k])).sum();
        assert_relative_eq!(v, fwd, epsilon = 1e-12);
    }

    #[test]
    fn reversed_unit_integral() {
        let (e, h) = setup(128, 6);
        let p = e.path(0);
        let t = 0.25;
        let k = p.grid.index_of(t).unwrap();
        let w = reversed_wick_integral(&p, &Elementary::constant(1.0), t, &h, &[]).unwrap();
        // B̂_T − B̂_{T−t} = B_0 − B_t
        assert_relative_eq!(-w.value, p.values[k], epsilon = 1e-12);
    }
}
