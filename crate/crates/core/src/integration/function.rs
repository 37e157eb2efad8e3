//! Integrands: the function traits shared by every module, plus a small
//! family of closed-form integrands used by the experiments.

use serde::{Deserialize, Serialize};

use super::sampled::VariationOrders;

/// A real function of one variable.
pub trait RealFunction: Send + Sync {
    fn value(&self, x: f64) -> f64;

    /// Whether the function is absolutely continuous, so that chord
    /// quotients of its values integrate its derivative exactly.
    fn is_smooth(&self) -> bool;

    /// Claimed variation order, if any.
    fn declared_p(&self) -> Option<f64> {
        None
    }

    /// Interval on which the function is defined; `None` for the whole line.
    fn domain(&self) -> Option<(f64, f64)> {
        None
    }

    fn derivative(&self, x: f64) -> f64 {
        let h = 1e-6 * (1.0 + x.abs());
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }

    /// For piecewise-constant functions: the value at `−∞` and the
    /// `(location, jump)` list. Values at the jump points are ignored.
    fn step_jumps(&self) -> Option<(f64, Vec<(f64, f64)>)> {
        None
    }
}

/// A real function of space and time.
pub trait RealFunction2: Send + Sync {
    fn value(&self, x: f64, s: f64) -> f64;

    fn is_smooth(&self) -> bool;

    fn domain(&self) -> Option<((f64, f64), (f64, f64))> {
        None
    }

    /// Declared variation orders, if any.
    fn orders(&self) -> Option<VariationOrders> {
        None
    }

    /// `∂/∂x`, central difference unless overridden.
    fn d_dx(&self, x: f64, s: f64) -> f64 {
        let h = 1e-6 * (1.0 + x.abs());
        (self.value(x + h, s) - self.value(x - h, s)) / (2.0 * h)
    }

    /// `∂/∂s`, central difference unless overridden.
    fn d_dt(&self, x: f64, s: f64) -> f64 {
        let h = 1e-6 * (1.0 + s.abs());
        (self.value(x, s + h) - self.value(x, s - h)) / (2.0 * h)
    }
}

impl<F: RealFunction + ?Sized> RealFunction for &F {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn is_smooth(&self) -> bool {
        (**self).is_smooth()
    }
    fn declared_p(&self) -> Option<f64> {
        (**self).declared_p()
    }
    fn domain(&self) -> Option<(f64, f64)> {
        (**self).domain()
    }
    fn derivative(&self, x: f64) -> f64 {
        (**self).derivative(x)
    }
    fn step_jumps(&self) -> Option<(f64, Vec<(f64, f64)>)> {
        (**self).step_jumps()
    }
}

/// Closed-form integrands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Elementary {
    /// `coef · x^power`.
    Monomial { coef: f64, power: i32 },
    /// `|x − shift|`.
    Abs { shift: f64 },
    /// `sign(x − shift)`, with `sign(0) = 0`.
    Sign { shift: f64 },
    /// `1{x > shift}`.
    Heaviside { shift: f64 },
    /// `sin(freq · x)`.
    Sin { freq: f64 },
    /// `cos(freq · x)`.
    Cos { freq: f64 },
}

impl Elementary {
    pub const fn constant(c: f64) -> Self {
        Self::Monomial { coef: c, power: 0 }
    }

    pub const fn identity() -> Self {
        Self::Monomial { coef: 1.0, power: 1 }
    }

    pub const fn monomial(coef: f64, power: i32) -> Self {
        Self::Monomial { coef, power }
    }

    pub const fn sign_at(shift: f64) -> Self {
        Self::Sign { shift }
    }

    pub const fn abs_at(shift: f64) -> Self {
        Self::Abs { shift }
    }
}

impl RealFunction for Elementary {
    fn value(&self, x: f64) -> f64 {
        match *self {
            Self::Monomial { coef, power } => coef * x.powi(power),
            Self::Abs { shift } => (x - shift).abs(),
            Self::Sign { shift } => {
                let d = x - shift;
                if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::Heaviside { shift } => f64::from(u8::from(x > shift)),
            Self::Sin { freq } => (freq * x).sin(),
            Self::Cos { freq } => (freq * x).cos(),
        }
    }

    fn is_smooth(&self) -> bool {
        !matches!(self, Self::Sign { .. } | Self::Heaviside { .. })
    }

    fn declared_p(&self) -> Option<f64> {
        Some(1.0)
    }

    fn derivative(&self, x: f64) -> f64 {
        match *self {
            Self::Monomial { coef, power } => {
                if power == 0 {
                    0.0
                } else {
                    coef * power as f64 * x.powi(power - 1)
                }
            }
            Self::Abs { shift } => Self::Sign { shift }.value(x),
            Self::Sign { .. } | Self::Heaviside { .. } => 0.0,
            Self::Sin { freq } => freq * (freq * x).cos(),
            Self::Cos { freq } => -freq * (freq * x).sin(),
        }
    }

    fn step_jumps(&self) -> Option<(f64, Vec<(f64, f64)>)> {
        match *self {
            Self::Sign { shift } => Some((-1.0, vec![(shift, 2.0)])),
            Self::Heaviside { shift } => Some((0.0, vec![(shift, 1.0)])),
            Self::Monomial { coef, power: 0 } => Some((coef, Vec::new())),
            _ => None,
        }
    }
}

/// `u(x) · v(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Product2 {
    pub space: Elementary,
    pub time: Elementary,
}

impl Product2 {
    pub const fn new(space: Elementary, time: Elementary) -> Self {
        Self { space, time }
    }
}

impl RealFunction2 for Product2 {
    fn value(&self, x: f64, s: f64) -> f64 {
        self.space.value(x) * self.time.value(s)
    }

    fn is_smooth(&self) -> bool {
        self.space.is_smooth() && self.time.is_smooth()
    }

    fn d_dx(&self, x: f64, s: f64) -> f64 {
        self.space.derivative(x) * self.time.value(s)
    }

    fn d_dt(&self, x: f64, s: f64) -> f64 {
        self.space.value(x) * self.time.derivative(s)
    }

    // every closed form here has locally bounded variation
    fn orders(&self) -> Option<VariationOrders> {
        Some(VariationOrders::SMOOTH)
    }
}

/// A one-variable function viewed as constant in time.
#[derive(Debug, Clone, Copy)]
pub struct TimeConstant<F>(pub F);

impl<F: RealFunction> RealFunction2 for TimeConstant<F> {
    fn value(&self, x: f64, _s: f64) -> f64 {
        self.0.value(x)
    }

    fn is_smooth(&self) -> bool {
        self.0.is_smooth()
    }

    fn d_dx(&self, x: f64, _s: f64) -> f64 {
        self.0.derivative(x)
    }

    fn d_dt(&self, _x: f64, _s: f64) -> f64 {
        0.0
    }

    fn orders(&self) -> Option<VariationOrders> {
        self.0.declared_p().map(|p| VariationOrders {
            p: 1.0,
            q: 1.0,
            gamma: p,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn elementary_values_and_derivatives() {
        let sq = Elementary::monomial(0.5, 2);
        assert_relative_eq!(sq.value(3.0), 4.5);
        assert_relative_eq!(sq.derivative(3.0), 3.0);
        assert_eq!(Elementary::sign_at(0.0).value(0.0), 0.0);
        assert_eq!(Elementary::sign_at(1.0).value(0.5), -1.0);
        assert!(!Elementary::sign_at(0.0).is_smooth());
        assert!(Elementary::abs_at(0.0).is_smooth());
        let s = Elementary::Sin { freq: 2.0 };
        let h = 1e-6;
        let fd = (s.value(0.3 + h) - s.value(0.3 - h)) / (2.0 * h);
        assert_relative_eq!(s.derivative(0.3), fd, max_relative = 1e-8);
    }

    #[test]
    fn product_partials() {
        let f = Product2::new(Elementary::monomial(1.0, 2), Elementary::identity());
        assert_relative_eq!(f.value(2.0, 3.0), 12.0);
        assert_relative_eq!(f.d_dx(2.0, 3.0), 12.0);
    }
}
