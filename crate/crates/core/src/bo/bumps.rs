//! The auxiliary pair `(u, v)`: `u ≡ 1` on `[−1+ε, 1−ε]` with support in `(−1, 1)`,
//! `v` supported in `(−δ, δ)` with `v(0) = 0`, `v′(0) = −1`.


use crate::error::{Error, Result};
use crate::smooth::smooth_step_d;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpPair {
    pub eps: f64,
    pub delta: f64,
}

/// `(plateau(r), plateau′(r))`.
fn plateau_d(r: f64) -> (f64, f64) {
    let (s, ds) = smooth_step_d(2.0 * (1.0 - r.abs()));
    (s, -2.0 * r.signum() * ds)
}

/// Fraction of `δ` beyond which `v` vanishes.
const V_REACH: f64 = 0.9;

impl BumpPair {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter("bump pair needs 0 < ε < 1 and δ > 0".into()));
        }
        Ok(Self { eps, delta })
    }

    /// `u(x) = S((1 − ε/2 − |x|)/(ε/2))` with derivative.
    pub fn u(&self, x: f64) -> (f64, f64) {
        let h = 0.5 * self.eps;
        let (s, ds) = smooth_step_d((1.0 - h - x.abs()) / h);
        (s, -x.signum() * ds / h)
    }

    /// `v(s) = −s·plateau(s/(0.9δ))` with derivative.
    pub fn v(&self, s: f64) -> (f64, f64) {
        let w = V_REACH * self.delta;
        let (p, dp) = plateau_d(s / w);
        (-s * p, -p - s * dp / w)
    }

    /// Half-width of the support of `u`.
    pub fn u_reach(&self) -> f64 {
        1.0 - 0.5 * self.eps
    }

    /// Half-width of the support of `v`.
    pub fn v_reach(&self) -> f64 {
        V_REACH * self.delta
    }

    /// `(sup|u|, sup|u′|, sup|v|, sup|v′|)` on `samples`-point grids.
    pub fn sups(&self, samples: usize) -> (f64, f64, f64, f64) {
        let (mut a, mut b, mut c, mut d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..=samples {
            let x = -1.0 + 2.0 * i as f64 / samples as f64;
            let (u, du) = self.u(x);
            let (v, dv) = self.v(x * self.delta);
            a = a.max(u.abs());
            b = b.max(du.abs());
            c = c.max(v.abs());
            d = d.max(dv.abs());
        }
        (a, b, c, d)
    }

    /// `C = 2·sup|u|·sup|v′|`, the constant in the stage bound `max‖X‖ < C·2^{−k}`.
    pub fn stage_constant(&self) -> f64 {
        let (su, _, _, sdv) = self.sups(20_000);
        2.0 * su * sdv
    }

    /// Grid check of the normalization and support conditions.
    pub fn verify(&self, samples: usize) -> bool {
        let mut ok = self.v(0.0).0 == 0.0 && (self.v(0.0).1 + 1.0).abs() < 1e-15;
        for i in 0..=samples {
            let r = -1.0 + 2.0 * i as f64 / samples as f64;
            if r.abs() <= 1.0 - self.eps {
                ok &= self.u(r).0 == 1.0;
            }
            if r.abs() >= self.u_reach() {
                ok &= self.u(r).0 == 0.0;
            }
            if r.abs() >= V_REACH {
                ok &= self.v(r * self.delta).0 == 0.0;
            }
        }
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_conditions_and_derivatives() {
        let b = BumpPair::new(0.2, 0.5).unwrap();
        assert!(b.verify(4001));
        for x in [-0.95, -0.5, 0.87, 0.93] {
            let h = 1e-7;
            let fd = (b.u(x + h).0 - b.u(x - h).0) / (2.0 * h);
            assert!((fd - b.u(x).1).abs() < 1e-5);
        }
        for s in [-0.4, -0.2, 0.0, 0.3, 0.44] {
            let h = 1e-7;
            let fd = (b.v(s + h).0 - b.v(s - h).0) / (2.0 * h);
            assert!((fd - b.v(s).1).abs() < 1e-5, "{s}");
        }
        assert!(b.stage_constant() > 2.0);
    }
}
