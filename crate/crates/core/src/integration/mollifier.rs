//! The one-sided bump `ρ(x) = c·exp(1/((x−1)²−1))` on `(0, 2)` and the
//! mollified functions `g_n(x) = ∫_0^2 ρ(z) g(x − z/n) dz`.

use std::sync::OnceLock;

use super::{Interpolation, RealFunction, SampledFunction1D};
use crate::error::{domain, Result};
use crate::quadrature::GaussLegendre;

/// Gauss–Legendre order used for the normalization and every convolution.
pub const MOLLIFIER_NODES: usize = 64;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(MOLLIFIER_NODES))
}

fn bump(x: f64) -> f64 {
    let d = (x - 1.0) * (x - 1.0) - 1.0;
    if d < 0.0 {
        (1.0 / d).exp()
    } else {
        0.0
    }
}

fn normalization() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / rule().integrate(0.0, 2.0, bump))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    order: u32,
    c: f64,
}

impl Mollifier {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return domain("mollifier order must be positive");
        }
        Ok(Self {
            order,
            c: normalization(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    /// `ρ(z)`.
    pub fn density(&self, z: f64) -> f64 {
        self.c * bump(z)
    }

    /// `ρ_n(x) = n ρ(n x)`, supported on `(0, 2/n)`.
    pub fn scaled_density(&self, x: f64) -> f64 {
        let n = f64::from(self.order);
        n * self.density(n * x)
    }

    /// `R(u) = ∫_0^u ρ`, clamped to `[0, 1]`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= 2.0 {
            1.0
        } else {
            (self.c * rule().integrate(0.0, u, bump)).clamp(0.0, 1.0)
        }
    }

    /// `g_n(x)`. Piecewise-constant `g` goes through the exact step form
    /// `g(−∞) + Σ Δ_i R(n(x − b_i))`; anything else through the quadrature rule.
    pub fn apply(&self, g: &dyn RealFunction, x: f64) -> f64 {
        match g.step_jumps() {
            Some((base, jumps)) => self.apply_steps(base, &jumps, x),
            None => self.convolve(|y| g.value(y), x),
        }
    }

    fn apply_steps(&self, base: f64, jumps: &[(f64, f64)], x: f64) -> f64 {
        let n = f64::from(self.order);
        base + jumps
            .iter()
            .map(|&(b, d)| d * self.cdf(n * (x - b)))
            .sum::<f64>()
    }

    fn convolve(&self, g: impl Fn(f64) -> f64, x: f64) -> f64 {
        let n = f64::from(self.order);
        rule()
            .mapped(0.0, 2.0)
            .map(|(z, w)| w * self.density(z) * g(x - z / n))
            .sum()
    }
}

/// Lazily evaluated `g_n`.
#[derive(Debug, Clone)]
pub struct Mollified<F> {
    inner: F,
    mollifier: Mollifier,
    jumps: Option<(f64, Vec<(f64, f64)>)>,
}

impl<F: RealFunction> Mollified<F> {
    pub fn new(inner: F, order: u32) -> Result<Self> {
        let jumps = inner.step_jumps();
        Ok(Self {
            inner,
            mollifier: Mollifier::new(order)?,
            jumps,
        })
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn mollifier(&self) -> Mollifier {
        self.mollifier
    }
}

impl<F: RealFunction> RealFunction for Mollified<F> {
    fn value(&self, x: f64) -> f64 {
        match &self.jumps {
            Some((base, jumps)) => self.mollifier.apply_steps(*base, jumps, x),
            None => self.mollifier.convolve(|y| self.inner.value(y), x),
        }
    }

    fn is_smooth(&self) -> bool {
        true
    }

    fn declared_p(&self) -> Option<f64> {
        self.inner.declared_p()
    }

    fn domain(&self) -> Option<(f64, f64)> {
        let shift = 2.0 / f64::from(self.mollifier.order);
        self.inner.domain().map(|(lo, hi)| (lo + shift, hi))
    }

    fn derivative(&self, x: f64) -> f64 {
        match &self.jumps {
            Some((_, jumps)) => jumps
                .iter()
                .map(|&(b, d)| d * self.mollifier.scaled_density(x - b))
                .sum(),
            None => self.mollifier.convolve(|y| self.inner.derivative(y), x),
        }
    }
}

/// `g_n` sampled on the breakpoints of `g`, linearly interpolated.
pub fn mollify(g: &SampledFunction1D, n: u32) -> Result<SampledFunction1D> {
    let m = Mollified::new(g, n)?;
    let values = g.breakpoints().iter().map(|&x| m.value(x)).collect();
    SampledFunction1D::new(
        g.breakpoints().to_vec(),
        values,
        Interpolation::Linear,
        g.declared_p(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::Elementary;
    use approx::assert_relative_eq;

    #[test]
    fn unit_mass_by_an_independent_rule() {
        let m = Mollifier::new(1).unwrap();
        let mass = GaussLegendre::new(20).integrate_composite(0.0, 2.0, 40, |z| m.density(z));
        assert_relative_eq!(mass, 1.0, epsilon = 1e-10);
        assert_eq!(m.cdf(-1.0), 0.0);
        assert_eq!(m.cdf(2.0), 1.0);
        assert_relative_eq!(m.cdf(1.0), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn support_of_scaled_density() {
        let m = Mollifier::new(100).unwrap();
        assert_eq!(m.scaled_density(-1e-9), 0.0);
        assert_eq!(m.scaled_density(0.02), 0.0);
        assert!(m.scaled_density(0.01) > 0.0);
    }

    #[test]
    fn constants_are_fixed() {
        let k = Mollified::new(Elementary::Cos { freq: 0.0 }, 7).unwrap();
        assert_relative_eq!(k.value(0.3), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn sign_away_from_the_jump_and_at_it() {
        let g = Mollified::new(Elementary::sign_at(0.0), 100).unwrap();
        for x in [-1.0, -0.0201, 0.0201, 0.5] {
            assert!((g.value(x) - Elementary::sign_at(0.0).value(x)).abs() < 1e-6);
        }
        assert_eq!(g.value(0.0), -1.0);
    }

    #[test]
    fn sampled_step_through_mollify() {
        // left-continuous: −1 up to and including 0
        let breaks = SampledFunction1D::uniform_breaks(-1.0, 1.0, 200);
        let values = breaks.iter().map(|&x| if x <= 0.0 { -1.0 } else { 1.0 }).collect();
        let sign = SampledFunction1D::new(breaks, values, Interpolation::Step, Some(1.0)).unwrap();
        let g = mollify(&sign, 100).unwrap();
        assert_eq!(g.value(0.0), -1.0);
        assert!((g.value(0.5) - 1.0).abs() < 1e-12);
        assert!(g.values().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn smooth_input_goes_through_quadrature_and_converges() {
        let s = Elementary::Sin { freq: 3.0 };
        let mut prev = f64::INFINITY;
        for n in [10, 100, 1000] {
            let err = (Mollified::new(s, n).unwrap().value(0.4) - s.value(0.4)).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 5e-3);
    }

    #[test]
    fn step_derivative_integrates_to_jump() {
        let g = Mollified::new(Elementary::sign_at(0.1), 50).unwrap();
        let total = GaussLegendre::new(32).integrate_composite(0.1, 0.1 + 0.04, 8, |x| g.derivative(x));
        assert_relative_eq!(total, 2.0, epsilon = 1e-10);
    }
}
