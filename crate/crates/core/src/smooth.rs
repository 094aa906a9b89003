//! Smooth steps, bumps and mollifier kernels built from `e^{−1/t}`.

use num_traits::Float;

/// `e^{−a/t}` for `t > 0`, else 0, with its derivative.
#[inline]
fn flat(t: f64, a: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else {
        let e = (-a / t).exp();
        (e, a * e / (t * t))
    }
}

/// Smooth step `S(t) = h(t) / (h(t) + h(1−t))`, `h(t) = e^{−1/t}`.
/// `S ≡ 0` on `(−∞, 0]`, `S ≡ 1` on `[1, ∞)`, flat to all orders at both ends.
pub fn smooth_step(t: f64) -> f64 {
    smooth_step_d(t).0
}

/// `(S(t), S′(t))`.
pub fn smooth_step_d(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let (a, da) = flat(t, 1.0);
    let (b, db) = flat(1.0 - t, 1.0);
    let s = a + b;
    (a / s, (da * b + a * db) / (s * s))
}

/// Unnormalized bump `e^{−1/(1−s²)}` on `(−1, 1)` with derivative.
pub fn bump_d(s: f64) -> (f64, f64) {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        return (0.0, 0.0);
    }
    let e = (-1.0 / q).exp();
    (e, e * (-2.0 * s) / (q * q))
}

pub fn bump(s: f64) -> f64 {
    bump_d(s).0
}

/// `∫_{−1}^{1} e^{−1/(1−s²)} ds`.
pub const BUMP_MASS: f64 = 0.443_993_816_168_079_4;

/// Normalized 1-D mollifier of half-width `eps`: `η_ε(s) = bump(s/ε) / (ε·BUMP_MASS)`.
pub fn mollifier(s: f64, eps: f64) -> f64 {
    bump(s / eps) / (eps * BUMP_MASS)
}

pub fn mollifier_d(s: f64, eps: f64) -> (f64, f64) {
    let (b, db) = bump_d(s / eps);
    let c = eps * BUMP_MASS;
    (b / c, db / (c * eps))
}

const CUT_RATE: f64 = 0.55;
const CUT_WEIGHT: f64 = 0.6;

/// Step used by the `β_k` cutoff: `σ ≡ 0` on `(−∞, 1]`, `σ ≡ 1` on `[2, ∞)`.
///
/// Built from `e^{−a/t}` with an asymmetric weight so that `(rσ(r))′` stays in `[0, 3]`;
/// the symmetric step overshoots to about 3.75.
pub fn cutoff_step_d(r: f64) -> (f64, f64) {
    if r <= 1.0 {
        return (0.0, 0.0);
    }
    if r >= 2.0 {
        return (1.0, 0.0);
    }
    let (a, da) = flat(r - 1.0, CUT_RATE);
    let (b0, db0) = flat(2.0 - r, CUT_RATE);
    let b = CUT_WEIGHT * b0;
    let db = -CUT_WEIGHT * db0;
    let s = a + b;
    (a / s, (da * b - a * db) / (s * s))
}

/// The cutoff `β_k(s) = s·σ(k|s|)` with derivative `σ(r) + rσ′(r)`, `r = k|s|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCutoff {
    pub k: u32,
}

impl BetaCutoff {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1, "cutoff index must be positive");
        Self { k }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let (sig, _) = cutoff_step_d(self.k as f64 * s.abs());
        s * sig
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let r = self.k as f64 * s.abs();
        let (sig, dsig) = cutoff_step_d(r);
        sig + r * dsig
    }

    /// `(min β′, max β′)` on a uniform grid over `[−3/k, 3/k]`.
    pub fn slope_range(&self, samples: usize) -> (f64, f64) {
        let w = 3.0 / self.k as f64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=samples {
            let s = -w + 2.0 * w * i as f64 / samples as f64;
            let d = self.derivative(s);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }
}
