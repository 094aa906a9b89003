//! Collapse profiles `F : ℝ → (−∞, 0]`, zero up to a glue point and equal to an
//! elementary base beyond a second point.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::smooth::smooth_step_d;

/// Any profile usable as the `F` in `H = z·F(−log ρ)`.
pub trait Profile: Send + Sync {
    /// `(F(u), F′(u))`.
    fn eval(&self, u: f64) -> (f64, f64);

    fn value(&self, u: f64) -> f64 {
        self.eval(u).0
    }

    /// `F ≡ 0` on `(−∞, u0]`.
    fn vanishes_below(&self) -> f64;

    /// `(u*, c)` when `F ≡ c` on `[u*, ∞)`.
    fn constant_tail(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Elementary base used beyond the glue region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Base {
    /// `−u^β`, `0 < β < 1`.
    Power(f64),
    /// `−u`.
    Linear,
    /// `−u·log u`.
    LogLinear,
}

impl Base {
    pub fn eval(&self, u: f64) -> (f64, f64) {
        match *self {
            Base::Power(b) => {
                let p = u.powf(b);
                (-p, -b * p / u)
            }
            Base::Linear => (-u, -1.0),
            Base::LogLinear => {
                let l = u.ln();
                (-u * l, -(l + 1.0))
            }
        }
    }
}

/// `F(u) = 0` for `u ≤ u0`, `base(u)·S((u−u0)/(u1−u0))` on `(u0, u1)` and `base(u)` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseProfile {
    pub base: Base,
    pub u0: f64,
    pub u1: f64,
}

impl CollapseProfile {
    pub fn new(base: Base, u0: f64, u1: f64) -> Result<Self> {
        if !(u0.is_finite() && u1.is_finite() && u1 > u0) {
            return Err(Error::InvalidParameter("glue points need u0 < u1".into()));
        }
        match base {
            Base::Power(b) if !(b > 0.0 && b < 1.0) => {
                return Err(Error::InvalidParameter("power base needs an exponent in (0, 1)".into()));
            }
            Base::Power(_) | Base::Linear if u0 <= 0.0 => {
                return Err(Error::InvalidParameter("glue point u0 must be positive".into()));
            }
            Base::LogLinear if u0 < 1.0 => {
                return Err(Error::InvalidParameter("log-linear base needs u0 >= 1".into()));
            }
            _ => {}
        }
        Ok(Self { base, u0, u1 })
    }

    /// `F(u) = −√u` glued on `[1, 2]`.
    pub fn sqrt() -> Self {
        Self { base: Base::Power(0.5), u0: 1.0, u1: 2.0 }
    }

    /// `F(u) = −u` glued on `[1, 2]`.
    pub fn linear() -> Self {
        Self { base: Base::Linear, u0: 1.0, u1: 2.0 }
    }

    /// `F(u) = −u·log u` glued on `[7, 8]`.
    pub fn log_linear() -> Self {
        Self { base: Base::LogLinear, u0: 7.0, u1: 8.0 }
    }

    pub fn width(&self) -> f64 {
        self.u1 - self.u0
    }
}

impl Profile for CollapseProfile {
    fn eval(&self, u: f64) -> (f64, f64) {
        if u <= self.u0 {
            return (0.0, 0.0);
        }
        let (b, db) = self.base.eval(u);
        if u >= self.u1 {
            return (b, db);
        }
        let w = self.width();
        let (s, ds) = smooth_step_d((u - self.u0) / w);
        (b * s, db * s + b * ds / w)
    }

    fn vanishes_below(&self) -> f64 {
        self.u0
    }
}
