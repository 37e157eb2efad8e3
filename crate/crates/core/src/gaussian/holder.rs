//! Second moment `H(2H−1) ∫∫ |s−r|^{2H−2} P(B_s ∈ (a,b], B_r ∈ (a,b]) ds dr`.

use statrs::function::erf::erf;

use crate::error::{domain, Result};
use crate::hurst::HurstIndex;
use crate::quadrature::GaussLegendre;

use super::covariance_unchecked;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorMoment {
    pub moment: f64,
    /// `moment / (b−a)^{1+α}`.
    pub bound_ratio: f64,
}

// Geometric panels on (0, 1]: [2^{-k-1}, 2^{-k}] for k < levels, plus [0, 2^{-levels}].
const GRADED_LEVELS: usize = 40;
const INNER_POINTS: usize = 8;
const SPACE_PANELS: usize = 8;

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn graded(gl: &GaussLegendre, scale: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut total = gl.integrate(0.0, scale * 0.5f64.powi(GRADED_LEVELS as i32), &mut f);
    for k in 0..GRADED_LEVELS {
        let hi = scale * 0.5f64.powi(k as i32);
        total += gl.integrate(0.5 * hi, hi, &mut f);
    }
    total
}

// P(B_s ∈ (a,b], B_r ∈ (a,b]) for s > r > 0, by conditioning on B_r.
fn rectangle_probability(s: f64, r: f64, a: f64, b: f64, h: f64, gl: &GaussLegendre) -> f64 {
    let var_r = r.powf(2.0 * h);
    let var_s = s.powf(2.0 * h);
    let mu = covariance_unchecked(s, r, h);
    let slope = mu / var_r;
    let cond_sd = (var_s - mu * mu / var_r).max(0.0).sqrt();
    let sd_r = var_r.sqrt();
    let density = |y: f64| {
        (-(y * y) / (2.0 * var_r)).exp() / (sd_r * (2.0 * std::f64::consts::PI).sqrt())
    };
    let panel = (b - a) / SPACE_PANELS as f64;
    let mut total = 0.0;
    for p in 0..SPACE_PANELS {
        let lo = a + p as f64 * panel;
        total += gl.integrate(lo, lo + panel, |y| {
            let m = slope * y;
            let inner = if cond_sd > 0.0 {
                normal_cdf((b - m) / cond_sd) - normal_cdf((a - m) / cond_sd)
            } else {
                f64::from(u8::from(m > a && m <= b))
            };
            density(y) * inner
        });
    }
    total
}

/// Second moment of `∫_0^t 1_{(a,b]}(B_s) dB_s` restricted to its
/// deterministic part, with its ratio to `(b−a)^{1+α}`.
///
/// With `u = s − r = t v^{1/(2H−1)}` the weight `u^{2H−2} du` becomes a
/// constant, leaving `2H t^{2H−1} ∫_0^1 ∫_0^{t−u} P(r+u, r) dr dv`; both
/// remaining integrals use geometrically graded Gauss–Legendre panels.
pub fn indicator_second_moment(
    a: f64,
    b: f64,
    t: f64,
    h: &HurstIndex,
    alpha: f64,
) -> Result<IndicatorMoment> {
    let hv = h.value();
    let alpha_max = (2.0 * hv - 1.0) / hv;
    if !(alpha > 0.0 && alpha < alpha_max) {
        return domain(format!("α = {alpha} outside (0, {alpha_max})"));
    }
    if !(a <= b) {
        return domain(format!("need a ≤ b, got ({a}, {b})"));
    }
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    if a == b {
        return Ok(IndicatorMoment {
            moment: 0.0,
            bound_ratio: 0.0,
        });
    }
    let gl = GaussLegendre::new(INNER_POINTS);
    let power = 1.0 / (2.0 * hv - 1.0);
    let outer = graded(&gl, 1.0, |v| {
        let u = t * v.powf(power);
        let span = t - u;
        if span <= 0.0 {
            return 0.0;
        }
        graded(&gl, span, |r| {
            if r <= 0.0 {
                return 0.0;
            }
            rectangle_probability(r + u, r, a, b, hv, &gl)
        })
    });
    let moment = 2.0 * hv * t.powf(2.0 * hv - 1.0) * outer;
    Ok(IndicatorMoment {
        moment,
        bound_ratio: moment / (b - a).powf(1.0 + alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h75() -> HurstIndex {
        HurstIndex::new(0.75).unwrap()
    }

    #[test]
    fn empty_interval_has_zero_moment() {
        let m = indicator_second_moment(0.3, 0.3, 1.0, &h75(), 0.5).unwrap();
        assert_eq!(m.moment, 0.0);
    }

    #[test]
    fn alpha_range_enforced() {
        assert!(indicator_second_moment(0.0, 0.1, 1.0, &h75(), 0.7).is_err());
        assert!(indicator_second_moment(0.0, 0.1, 1.0, &h75(), 0.0).is_err());
    }

    #[test]
    fn rectangle_probability_matches_tensor_rule() {
        // brute-force tensor rule on the joint density
        let gl = GaussLegendre::new(32);
        let (s, r, a, b, h) = (1.0, 0.4, -0.2, 0.5, 0.7);
        let p = rectangle_probability(s, r, a, b, h, &GaussLegendre::new(8));
        let vs = s.powf(2.0 * h);
        let vr = r.powf(2.0 * h);
        let c = covariance_unchecked(s, r, h);
        let det = vs * vr - c * c;
        let brute = gl.integrate_composite(a, b, 4, |x| {
            gl.integrate_composite(a, b, 4, |y| {
                let q = (vr * x * x - 2.0 * c * x * y + vs * y * y) / det;
                (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
            })
        });
        assert!((p - brute).abs() < 1e-9, "{p} vs {brute}");
    }

    #[test]
    fn moment_nondecreasing_in_t() {
        let h = h75();
        let m: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&t| indicator_second_moment(0.1, 0.3, t, &h, 0.5).unwrap().moment)
            .collect();
        assert!(m[0] <= m[1] && m[1] <= m[2], "{m:?}");
    }
}
