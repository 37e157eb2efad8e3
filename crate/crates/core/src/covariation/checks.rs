use serde::{Deserialize, Serialize};

use super::wick::{reversed_wick_integral, wick_ito_integral, wick_ito_integral_2d};
use super::wqc::{wqc_sum, wqc_time_dependent};
use crate::error::{FracError, Result};
use crate::gaussian::SamplePath;
use crate::grid::TimeGrid;
use crate::hurst::HurstIndex;
use crate::integration::{
    young_integral_1d, young_integral_2d, RealFunction, RealFunction2, VariationOrders,
};
use crate::local_time::{window_local_time, LocalTimeField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItoResidualReport {
    /// `F(B_t) − F(0)`.
    pub lhs: f64,
    pub stochastic_term: f64,
    pub correction_term: f64,
    /// `∫ ∂F/∂t ds`; zero for time-independent `F`.
    pub drift_term: f64,
    pub residual: f64,
    pub path_count: usize,
}

impl ItoResidualReport {
    fn assemble(lhs: f64, stochastic: f64, correction: f64, drift: f64) -> Self {
        Self {
            lhs,
            stochastic_term: stochastic,
            correction_term: correction,
            drift_term: drift,
            residual: lhs - (drift + stochastic + correction),
            path_count: 1,
        }
    }

    pub fn relative_error(&self) -> f64 {
        self.residual.abs() / self.lhs.abs()
    }

    /// Termwise mean; `path_count` sums.
    pub fn mean(reports: &[Self]) -> Result<Self> {
        if reports.is_empty() {
            return Err(FracError::Domain("no reports to average".into()));
        }
        let n = reports.len() as f64;
        let avg = |g: fn(&Self) -> f64| reports.iter().map(g).sum::<f64>() / n;
        Ok(Self {
            lhs: avg(|r| r.lhs),
            stochastic_term: avg(|r| r.stochastic_term),
            correction_term: avg(|r| r.correction_term),
            drift_term: avg(|r| r.drift_term),
            residual: avg(|r| r.residual),
            path_count: reports.iter().map(|r| r.path_count).sum(),
        })
    }
}

/// Source of the second-order term in the Itô formula.
#[derive(Debug, Clone, Copy)]
pub enum IdentityForm<'a> {
    /// `H ∫ f′(B_s) s^{2H−1} ds`.
    Smooth,
    /// `−½ ∫ f(x) V(dx, t)`.
    LocalTime(&'a LocalTimeField),
    /// `½ [f(B), B]^{(W)}` at `n` steps.
    Covariation { n: usize },
    /// `½ Σ Δf(b_i) V(b_i, t)` over the jumps of a step integrand, with the
    /// weighted window estimate at each jump.
    Window { bandwidth: f64 },
}

/// `−∫ f(x) V(dx, t) = Σ Δf(b_i) V(b_i, t)` for piecewise-constant `f`.
fn window_covariation(
    path: &SamplePath<'_>,
    f: &dyn RealFunction,
    bandwidth: f64,
    h: &HurstIndex,
) -> Result<f64> {
    let Some((_, jumps)) = f.step_jumps() else {
        return Err(FracError::Contract(
            "window form needs a piecewise-constant integrand".into(),
        ));
    };
    let mut total = 0.0;
    for (b, d) in jumps {
        total += d * window_local_time(path, b, bandwidth, true, h)?.last().unwrap();
    }
    Ok(total)
}

fn left_weighted_time_integral(path: &SamplePath<'_>, h: &HurstIndex, g: impl Fn(usize) -> f64) -> f64 {
    let e = 2.0 * h.value();
    let pts = path.grid.points();
    (0..path.grid.steps())
        .map(|j| g(j) * (pts[j + 1].powf(e) - pts[j].powf(e)) / e)
        .sum()
}

/// Residual of `F(B_T) = F(0) + ∫ f(B) dB + correction` with `f = F′` a.e.
pub fn ito_formula_check(
    path: &SamplePath<'_>,
    antiderivative: &dyn RealFunction,
    f: &dyn RealFunction,
    h: &HurstIndex,
    form: IdentityForm<'_>,
    orders: &[u32],
) -> Result<ItoResidualReport> {
    let lhs = antiderivative.value(path.terminal()) - antiderivative.value(0.0);
    let stochastic = wick_ito_integral(path, f, h, orders)?.value;
    let correction = match form {
        IdentityForm::Smooth => {
            if !f.is_smooth() {
                return Err(FracError::Contract(
                    "smooth Itô correction needs a smooth integrand".into(),
                ));
            }
            h.value() * left_weighted_time_integral(path, h, |j| f.derivative(path.values[j]))
        }
        IdentityForm::LocalTime(field) => {
            -0.5 * young_integral_1d(f, field, path.grid.horizon())?.value
        }
        IdentityForm::Covariation { n } => 0.5 * wqc_sum(path, f, n, h)?,
        IdentityForm::Window { bandwidth } => 0.5 * window_covariation(path, f, bandwidth, h)?,
    };
    Ok(ItoResidualReport::assemble(lhs, stochastic, correction, 0.0))
}

/// `∂F/∂x` as a function of `(x, s)`.
struct Dx<'a>(&'a dyn RealFunction2);

impl RealFunction2 for Dx<'_> {
    fn value(&self, x: f64, s: f64) -> f64 {
        self.0.d_dx(x, s)
    }
    fn is_smooth(&self) -> bool {
        self.0.is_smooth()
    }
    fn orders(&self) -> Option<VariationOrders> {
        self.0.orders()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum TimeDependentForm<'a> {
    /// `H ∫ ∂²F/∂x²(B_s, s) s^{2H−1} ds`.
    Smooth,
    /// `−½ ∫∫ ∂F/∂x(x, s) V(dx, ds)`.
    LocalTime(&'a LocalTimeField),
}

/// Residual of
/// `F(B_T, T) = F(0, 0) + ∫ ∂F/∂t ds + ∫ ∂F/∂x dB + correction`.
pub fn ito_time_dependent_check(
    path: &SamplePath<'_>,
    big_f: &dyn RealFunction2,
    h: &HurstIndex,
    form: TimeDependentForm<'_>,
) -> Result<ItoResidualReport> {
    let horizon = path.grid.horizon();
    let v = path.values;
    let pts = path.grid.points();
    let lhs = big_f.value(path.terminal(), horizon) - big_f.value(0.0, 0.0);
    let drift: f64 = (0..path.grid.steps())
        .map(|j| {
            0.5 * (big_f.d_dt(v[j], pts[j]) + big_f.d_dt(v[j + 1], pts[j + 1])) * (pts[j + 1] - pts[j])
        })
        .sum();
    let dx = Dx(big_f);
    let stochastic = wick_ito_integral_2d(path, &dx, horizon, h, false)?;
    let correction = match form {
        TimeDependentForm::Smooth => {
            h.value() * left_weighted_time_integral(path, h, |j| dx.d_dx(v[j], pts[j]))
        }
        TimeDependentForm::LocalTime(field) => {
            -0.5 * young_integral_2d(&dx, &field.to_sampled_2d()?)?.value
        }
    };
    Ok(ItoResidualReport::assemble(lhs, stochastic, correction, drift))
}

/// `lhs = −∫_{T−t}^T f(B̂) dB̂` against `rhs = ∫_0^t f(B) dB + covariation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversalCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub forward_term: f64,
    pub covariation_term: f64,
}

impl ReversalCheck {
    fn new(reversed: f64, forward: f64, covariation: f64) -> Self {
        Self {
            lhs: -reversed,
            rhs: forward + covariation,
            forward_term: forward,
            covariation_term: covariation,
        }
    }

    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// `|lhs − rhs| / (|lhs| + |rhs|)`.
    pub fn relative_error(&self) -> f64 {
        self.residual().abs() / (self.lhs.abs() + self.rhs.abs())
    }
}

fn truncated(path: &SamplePath<'_>, t: f64) -> Result<(TimeGrid, usize)> {
    let k = path.grid.index_of(t)?;
    if k == 0 {
        return Err(FracError::Domain("time-reversal window must be positive".into()));
    }
    Ok((TimeGrid::new(path.grid.points()[k], k)?, k))
}

/// Where the covariation term of the time-reversal identity comes from.
/// The local-time variants give the form `∫ f dV = ∫ f dB + ∫ f(B̂) dB̂`.
#[derive(Debug, Clone, Copy)]
pub enum CovariationSource<'a> {
    /// Discrete weighted covariation at full resolution.
    Discrete,
    /// `−∫ f dV(·, t)` as a Young integral against the field.
    Field(&'a LocalTimeField),
    /// `Σ Δf(b_i) V(b_i, t)` from window estimates at the jumps of `f`.
    Window { bandwidth: f64 },
}

pub fn time_reversal_check(
    path: &SamplePath<'_>,
    f: &dyn RealFunction,
    t: f64,
    h: &HurstIndex,
    orders: &[u32],
    source: CovariationSource<'_>,
) -> Result<ReversalCheck> {
    let (grid, k) = truncated(path, t)?;
    let head = SamplePath::new(&grid, &path.values[..=k])?;
    let reversed = reversed_wick_integral(path, f, t, h, orders)?.value;
    let forward = wick_ito_integral(&head, f, h, orders)?.value;
    let covariation = match source {
        CovariationSource::Discrete => wqc_sum(&head, f, k, h)?,
        CovariationSource::Field(fld) => -young_integral_1d(f, fld, t)?.value,
        CovariationSource::Window { bandwidth } => window_covariation(&head, f, bandwidth, h)?,
    };
    Ok(ReversalCheck::new(reversed, forward, covariation))
}

/// Time reversal for `f(x, s)`:
/// `−∫_{T−t}^T f(B̂_s, T−s) dB̂_s = ∫_0^t f(B_s, s) dB_s + [f(B,·), B]^{(W)}_t`.
pub fn time_reversal_check_2d(
    path: &SamplePath<'_>,
    f: &dyn RealFunction2,
    t: f64,
    h: &HurstIndex,
) -> Result<ReversalCheck> {
    let (grid, k) = truncated(path, t)?;
    let head = SamplePath::new(&grid, &path.values[..=k])?;
    let reversed = wick_ito_integral_2d(path, f, t, h, true)?;
    let forward = wick_ito_integral_2d(&head, f, grid.horizon(), h, false)?;
    let covariation = wqc_time_dependent(&head, f, k, h, None)?.value;
    Ok(ReversalCheck::new(reversed, forward, covariation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::integration::{Elementary, Product2, TimeConstant};
    use approx::assert_relative_eq;

    fn setup(n: usize, seed: u64) -> (crate::gaussian::PathEnsemble, HurstIndex) {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(1.0, n).unwrap();
        (generate_paths(&grid, h, 1, seed, GeneratorTag::Circulant).unwrap(), h)
    }

    #[test]
    fn one_sided_tanaka_is_exact() {
        let (e, h) = setup(1024, 1);
        let p = e.path(0);
        let a = p.range().1 + 0.5;
        let r = ito_formula_check(
            &p,
            &Elementary::abs_at(a),
            &Elementary::sign_at(a),
            &h,
            IdentityForm::Covariation { n: 1024 },
            &[100, 1000],
        )
        .unwrap();
        assert!(r.residual.abs() < 1e-10, "{}", r.residual);
    }

    #[test]
    fn smooth_quadratic_residual_is_discretization_sized() {
        let (e, h) = setup(1 << 14, 2);
        let p = e.path(0);
        let r = ito_formula_check(
            &p,
            &Elementary::monomial(0.5, 2),
            &Elementary::identity(),
            &h,
            IdentityForm::Smooth,
            &[],
        )
        .unwrap();
        // ½ Σ (ΔB)² remains
        let qv: f64 = p.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        assert_relative_eq!(r.residual, 0.5 * qv, epsilon = 1e-10);
    }

    #[test]
    fn pure_drift_has_no_residual() {
        let (e, h) = setup(256, 3);
        let f = Product2::new(Elementary::constant(1.0), Elementary::identity());
        let r = ito_time_dependent_check(&e.path(0), &f, &h, TimeDependentForm::Smooth).unwrap();
        assert!(r.residual.abs() < 1e-8, "{}", r.residual);
    }

    #[test]
    fn constant_reversal_is_exact() {
        let (e, h) = setup(512, 4);
        let p = e.path(0);
        for t in [0.5, 1.0] {
            let c = time_reversal_check(&p, &Elementary::constant(1.0), t, &h, &[], CovariationSource::Discrete).unwrap();
            let k = p.grid.index_of(t).unwrap();
            assert_relative_eq!(c.lhs, p.values[k], epsilon = 1e-12);
            assert_relative_eq!(c.rhs, p.values[k], epsilon = 1e-12);
            assert_eq!(c.covariation_term, 0.0);
        }
    }

    #[test]
    fn reversal_2d_matches_1d_for_time_constant() {
        let (e, h) = setup(512, 5);
        let p = e.path(0);
        let f = Elementary::identity();
        let a = time_reversal_check(&p, &f, 0.75, &h, &[], CovariationSource::Discrete).unwrap();
        let b = time_reversal_check_2d(&p, &TimeConstant(f), 0.75, &h).unwrap();
        assert_relative_eq!(a.lhs, b.lhs, epsilon = 1e-12);
        assert_relative_eq!(a.rhs, b.rhs, epsilon = 1e-12);
    }

    #[test]
    fn mean_of_reports() {
        let a = ItoResidualReport::assemble(1.0, 0.5, 0.25, 0.0);
        let b = ItoResidualReport::assemble(3.0, 0.5, 0.25, 1.0);
        let m = ItoResidualReport::mean(&[a, b]).unwrap();
        assert_eq!(m.path_count, 2);
        assert_relative_eq!(m.residual, 0.5 * (a.residual + b.residual));
    }
}
