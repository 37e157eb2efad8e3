//! The operators `Γ*_{H,t}` and `ΓΓ*`, and the variance of Wiener integrals
//! of deterministic integrands.
//!
//! All three discretize `[0,t]` into `resolution` equal cells and integrate
//! the power singularities exactly cell by cell; only the smooth factors
//! are frozen at cell midpoints.

use crate::error::{domain, Result};
use crate::hurst::HurstIndex;
use crate::integration::{Interpolation, RealFunction, SampledFunction1D};

/// Reference quadrature resolution.
pub const QUAD_RESOLUTION: usize = 1 << 12;

fn check_cover(g: &dyn RealFunction, t: f64, resolution: usize) -> Result<()> {
    if !(t > 0.0) {
        return domain(format!("interval end must be positive, got {t}"));
    }
    if resolution == 0 {
        return domain("resolution must be positive");
    }
    if let Some((lo, hi)) = g.domain() {
        let tol = 1e-12 * (1.0 + t);
        if lo > tol || hi < t - tol {
            return domain(format!("function on [{lo}, {hi}] does not cover [0, {t}]"));
        }
    }
    Ok(())
}

// ψ_j = (H−½)κ_H ∫_{u_j}^t m^{H−½}(m−u_j)^{H−3/2} g(m) dm at cell midpoints u_j,
// so that Γ*g(u_j) = u_j^{½−H} ψ_j.
fn gamma_star_core(g: &dyn RealFunction, t: f64, h: &HurstIndex, n: usize) -> (Vec<f64>, Vec<f64>) {
    let a = h.value() - 0.5;
    let dx = t / n as f64;
    let mids: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) * dx).collect();
    let smooth = |m: f64| m.powf(a) * g.value(m);
    let phi_cells: Vec<f64> = mids.iter().map(|&m| smooth(m)).collect();
    // exact ∫ (m−u)^{a−1} dm over the cell `d` cells to the right of u's cell
    let scale = dx.powf(a) / a;
    let far: Vec<f64> = (0..n)
        .map(|d| {
            let d = d as f64;
            scale * ((d + 0.5).powf(a) - (d - 0.5).max(0.0).powf(a))
        })
        .collect();
    let near = scale * 0.5f64.powf(a);
    let c = a * h.kappa_h();
    let psi = (0..n)
        .map(|j| {
            let half_mid = mids[j] + 0.25 * dx;
            let mut acc = smooth(half_mid) * near;
            for k in j + 1..n {
                acc += phi_cells[k] * far[k - j];
            }
            c * acc
        })
        .collect();
    (mids, psi)
}

/// `Γ*_{H,t} g(u) = (H−½)κ_H u^{½−H} ∫_u^t m^{H−½}(m−u)^{H−3/2} g(m) dm`,
/// sampled at the midpoints of `resolution` cells of `(0, t]`.
pub fn gamma_star(
    g: &dyn RealFunction,
    t: f64,
    h: &HurstIndex,
    resolution: usize,
) -> Result<SampledFunction1D> {
    check_cover(g, t, resolution)?;
    let a = h.value() - 0.5;
    let (mids, psi) = gamma_star_core(g, t, h, resolution);
    let values = mids.iter().zip(&psi).map(|(u, p)| u.powf(-a) * p).collect();
    SampledFunction1D::new(mids, values, Interpolation::Linear, None)
}

/// `∫_0^t (Γ*_{H,t} g)(u)² du`, integrating the `u^{1−2H}` factor exactly.
pub fn gamma_star_norm_sq(
    g: &dyn RealFunction,
    t: f64,
    h: &HurstIndex,
    resolution: usize,
) -> Result<f64> {
    check_cover(g, t, resolution)?;
    let (_, psi) = gamma_star_core(g, t, h, resolution);
    let b = 2.0 - 2.0 * h.value();
    let dx = t / resolution as f64;
    Ok(psi
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let lo = j as f64 * dx;
            let w = ((lo + dx).powf(b) - lo.powf(b)) / b;
            w * p * p
        })
        .sum())
}

// ∫_lo^hi |s−u|^{e−1} du with e = 2H−1 > 0.
fn power_cell(s: f64, lo: f64, hi: f64, e: f64) -> f64 {
    if s <= lo {
        ((hi - s).powf(e) - (lo - s).powf(e)) / e
    } else if s >= hi {
        ((s - lo).powf(e) - (s - hi).powf(e)) / e
    } else {
        ((s - lo).powf(e) + (hi - s).powf(e)) / e
    }
}

/// `(ΓΓ* f)(s) = H(2H−1) ∫_0^t |s−u|^{2H−2} f(u) du`, sampled at the
/// `resolution + 1` cell edges of `[0, t]`.
pub fn gamma_gamma_star(
    f: &dyn RealFunction,
    t: f64,
    h: &HurstIndex,
    resolution: usize,
) -> Result<SampledFunction1D> {
    check_cover(f, t, resolution)?;
    let n = resolution;
    let dx = t / n as f64;
    let e = h.weight_exponent();
    let f_mid: Vec<f64> = (0..n).map(|k| f.value((k as f64 + 0.5) * dx)).collect();
    let edges = SampledFunction1D::uniform_breaks(0.0, t, n);
    let values = edges
        .iter()
        .map(|&s| {
            let acc: f64 = f_mid
                .iter()
                .enumerate()
                .map(|(k, fk)| {
                    let lo = k as f64 * dx;
                    fk * power_cell(s, lo, lo + dx, e)
                })
                .sum();
            h.alpha_h() * acc
        })
        .collect();
    SampledFunction1D::new(edges, values, Interpolation::Linear, None)
}

/// `α_H ∫_0^T ∫_0^T g(s) g(r) |s−r|^{2H−2} ds dr`.
///
/// `g` is frozen at cell midpoints and the kernel is integrated exactly over
/// each pair of cells, which gives the fractional-Gaussian-noise
/// autocovariance `½((d+1)^{2H} − 2d^{2H} + |d−1|^{2H}) Δ^{2H}` at cell
/// offset `d`.
pub fn deterministic_wick_variance(
    g: &dyn RealFunction,
    horizon: f64,
    h: &HurstIndex,
    resolution: usize,
) -> Result<f64> {
    check_cover(g, horizon, resolution)?;
    let n = resolution;
    let dx = horizon / n as f64;
    let e = 2.0 * h.value();
    let gamma: Vec<f64> = (0..n)
        .map(|d| {
            let d = d as f64;
            0.5 * ((d + 1.0).powf(e) - 2.0 * d.powf(e) + (d - 1.0).abs().powf(e))
        })
        .collect();
    let gv: Vec<f64> = (0..n).map(|k| g.value((k as f64 + 0.5) * dx)).collect();
    let mut total = 0.0;
    for (j, gj) in gv.iter().enumerate() {
        if *gj == 0.0 {
            continue;
        }
        let mut row = gamma[0] * gj;
        for (k, gk) in gv.iter().enumerate().skip(j + 1) {
            row += 2.0 * gamma[k - j] * gk;
        }
        total += gj * row;
    }
    Ok((total * dx.powf(e)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::Elementary;
    use approx::assert_relative_eq;

    fn hi(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    #[test]
    fn gamma_star_of_zero_vanishes() {
        let z = Elementary::constant(0.0);
        let out = gamma_star(&z, 1.0, &hi(0.7), 64).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gamma_star_is_linear() {
        let h = hi(0.65);
        let g1 = Elementary::identity();
        let g2 = Elementary::Sin { freq: 3.0 };
        let a = gamma_star(&g1, 1.0, &h, 128).unwrap();
        let b = gamma_star(&g2, 1.0, &h, 128).unwrap();
        let c = gamma_star(&Combo(&g1, &g2), 1.0, &h, 128).unwrap();
        for i in 0..128 {
            let lin = 2.0 * a.values()[i] - 0.5 * b.values()[i];
            assert_relative_eq!(c.values()[i], lin, max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    struct Combo<'a>(&'a Elementary, &'a Elementary);
    impl RealFunction for Combo<'_> {
        fn value(&self, x: f64) -> f64 {
            2.0 * self.0.value(x) - 0.5 * self.1.value(x)
        }
        fn is_smooth(&self) -> bool {
            true
        }
    }

    #[test]
    fn isometry_for_constant() {
        for hv in [0.6, 0.75, 0.9] {
            let h = hi(hv);
            let one = Elementary::constant(1.0);
            let n2 = gamma_star_norm_sq(&one, 1.0, &h, QUAD_RESOLUTION).unwrap();
            assert!((n2 - 1.0).abs() < 1e-3, "H={hv}: {n2}");
            let v = deterministic_wick_variance(&one, 1.0, &h, QUAD_RESOLUTION).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn wick_variance_of_constant_scales_with_horizon() {
        let h = hi(0.7);
        let v = deterministic_wick_variance(&Elementary::constant(1.0), 2.5, &h, 256).unwrap();
        assert_relative_eq!(v, 2.5f64.powf(1.4), max_relative = 1e-10);
        let z = deterministic_wick_variance(&Elementary::constant(0.0), 2.5, &h, 256).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn gamma_gamma_star_closed_form() {
        let h = hi(0.75);
        let out = gamma_gamma_star(&Elementary::constant(1.0), 1.0, &h, 1024).unwrap();
        assert_relative_eq!(out.value(0.5), 1.06066, epsilon = 1e-5);
        assert_relative_eq!(out.value(0.5), 1.5 * 0.5f64.sqrt(), epsilon = 1e-12);
        let v = out.values();
        for i in 0..v.len() {
            assert_relative_eq!(v[i], v[v.len() - 1 - i], max_relative = 1e-12);
        }
        let zero = gamma_gamma_star(&Elementary::constant(0.0), 1.0, &h, 64).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uncovered_domain_rejected() {
        let g = SampledFunction1D::new(vec![0.0, 0.5], vec![1.0, 1.0], Interpolation::Linear, None)
            .unwrap();
        assert!(gamma_star(&g, 1.0, &hi(0.7), 16).is_err());
        assert!(deterministic_wick_variance(&g, 1.0, &hi(0.7), 16).is_err());
    }
}
