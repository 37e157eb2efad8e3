//! The Volterra kernel `K_H(t,u)` with `B^H_t = ∫_0^t K_H(t,u) dB_u`.

use crate::error::{domain, Result};
use crate::hurst::HurstIndex;

/// `K_H(t,u) = κ_H (H−½) ∫_u^t (τ/u)^{H−½} (τ−u)^{H−3/2} dτ`, the integral of
/// the kernel's `t`-derivative from the diagonal where `K_H(u,u) = 0`.
///
/// The substitution `w = (τ−u)^{H−½}` removes the endpoint singularity; the
/// remaining smooth integrand is summed with the midpoint rule on
/// `quad_steps` cells.
pub fn volterra_kernel(t: f64, u: f64, h: &HurstIndex, quad_steps: usize) -> Result<f64> {
    if !(u > 0.0 && u < t) {
        return domain(format!("kernel needs 0 < u < t, got u={u}, t={t}"));
    }
    if quad_steps == 0 {
        return domain("quad_steps must be positive");
    }
    Ok(kernel_unchecked(t, u, h, quad_steps))
}

fn kernel_unchecked(t: f64, u: f64, h: &HurstIndex, quad_steps: usize) -> f64 {
    let a = h.value() - 0.5;
    let inv_a = 1.0 / a;
    let upper = (t - u).powf(a);
    let dw = upper / quad_steps as f64;
    let sum: f64 = (0..quad_steps)
        .map(|k| {
            let w = (k as f64 + 0.5) * dw;
            ((u + w.powf(inv_a)) / u).powf(a)
        })
        .sum();
    h.kappa_h() * sum * dw
}

/// `∫_0^{min(s,t)} K_H(t,u) K_H(s,u) du`, which reproduces the covariance.
///
/// `[0, m/2]` is mapped by `u ∝ y^{1/(2−2H)}` to absorb the `u^{1−2H}`
/// growth of the product, `[m/2, m]` by `m−u ∝ y^{1/(H+½)}` to absorb the
/// `(m−u)^{H−½}` edge of the shorter kernel; both halves use
/// `quad_steps/2` midpoint nodes, and every kernel value is itself
/// evaluated with `quad_steps` cells.
pub fn reproducing_integral(s: f64, t: f64, h: &HurstIndex, quad_steps: usize) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) {
        return domain(format!("reproducing integral needs positive times, got ({s}, {t})"));
    }
    if quad_steps < 2 {
        return domain("quad_steps must be at least 2");
    }
    let (short, long) = if s <= t { (s, t) } else { (t, s) };
    let hv = h.value();
    let half = 0.5 * short;
    let m = quad_steps / 2;
    let dy = 1.0 / m as f64;
    let product = |u: f64| {
        let k_short = kernel_unchecked(short, u, h, quad_steps);
        let k_long = if long == short {
            k_short
        } else {
            kernel_unchecked(long, u, h, quad_steps)
        };
        k_short * k_long
    };

    let beta = 1.0 / (2.0 - 2.0 * hv);
    let left: f64 = (0..m)
        .map(|k| {
            let y = (k as f64 + 0.5) * dy;
            let u = half * y.powf(beta);
            let jac = half * beta * y.powf(beta - 1.0);
            product(u) * jac
        })
        .sum::<f64>()
        * dy;

    let gamma = 1.0 / (hv + 0.5);
    let right: f64 = (0..m)
        .map(|k| {
            let y = (k as f64 + 0.5) * dy;
            let u = short - half * y.powf(gamma);
            let jac = half * gamma * y.powf(gamma - 1.0);
            product(u) * jac
        })
        .sum::<f64>()
        * dy;
    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::fbm_covariance;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn kernel_positive() {
        for hv in [0.55, 0.7, 0.95] {
            let h = HurstIndex::new(hv).unwrap();
            for &(t, u) in &[(1.0, 0.001), (1.0, 0.5), (1.0, 0.999_999), (3.0, 2.0)] {
                assert!(volterra_kernel(t, u, &h, 256).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn kernel_domain() {
        let h = HurstIndex::new(0.7).unwrap();
        assert!(volterra_kernel(1.0, 1.0, &h, 16).is_err());
        assert!(volterra_kernel(1.0, 0.0, &h, 16).is_err());
        assert!(volterra_kernel(1.0, 1.5, &h, 16).is_err());
    }

    #[test]
    fn kernel_matches_gauss_legendre_oracle() {
        // independent route: composite Gauss–Legendre after τ − u = r⁴
        let h = HurstIndex::new(0.8).unwrap();
        let (t, u) = (1.0, 0.3);
        let a = 0.3;
        let gl = GaussLegendre::new(64);
        let oracle = h.kappa_h()
            * a
            * gl.integrate_composite(0.0, (t - u as f64).powf(0.25), 64, |r| {
                let tau = u + r.powi(4);
                (tau / u).powf(a) * 4.0 * r.powf(4.0 * a - 1.0)
            });
        let k = volterra_kernel(t, u, &h, 4096).unwrap();
        assert!((k - oracle).abs() / oracle < 1e-4, "{k} vs {oracle}");
    }

    #[test]
    fn reproduces_covariance_at_half_one() {
        let h = HurstIndex::new(0.7).unwrap();
        let r = reproducing_integral(0.5, 1.0, &h, 1 << 12).unwrap();
        let c = fbm_covariance(0.5, 1.0, &h).unwrap();
        assert!((r - c).abs() / c < 1e-3, "{r} vs {c}");
    }
}
