//! Smooth approximants `ψ_m` of the collapse map: the flow of `z·F(β_m(−log ρ))`
//! where `β_m` freezes the argument of `F` beyond a cut depending on `m`.
//!
//! `ψ_m` agrees with the collapse map on `{ρ ≥ e^{−m}}`, is linear near the zero
//! section, and its conformal factor is within `e^{tF(m)/2}` of the collapse one.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use super::flow::{CollapseField, CollapseMap};
use super::gcalc::GCalculus;
use super::profile::{CollapseProfile, Profile};
use super::weight::RadialWeight;
use crate::error::{Error, Result};
use crate::flow::IntegratorConfig;
use crate::quad::gk15;
use crate::smooth::smooth_step;

const RAMP_NODES: usize = 256;

/// `R(w) = ∫₀^w (1 − S(v)) dv` on `[0, 1]`; `R(1) = 1/2` by the symmetry of `S`.
#[derive(Debug, Clone)]
struct Ramp {
    cum: Vec<f64>,
}

impl Ramp {
    fn new() -> Self {
        let mut cum = alloc::vec![0.0; RAMP_NODES + 1];
        let h = 1.0 / RAMP_NODES as f64;
        let mut f = |v: f64| 1.0 - smooth_step(v);
        for i in 0..RAMP_NODES {
            cum[i + 1] = cum[i] + gk15(&mut f, i as f64 * h, (i + 1) as f64 * h).0;
        }
        Self { cum }
    }

    fn eval(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return w;
        }
        if w >= 1.0 {
            return self.cum[RAMP_NODES];
        }
        let h = 1.0 / RAMP_NODES as f64;
        let i = ((w / h) as usize).min(RAMP_NODES - 1);
        let lo = i as f64 * h;
        self.cum[i] + gk15(&mut |v: f64| 1.0 - smooth_step(v), lo, w).0
    }
}

/// `F∘β_m` with `β_m(u) = u` for `u ≤ a`, `β_m(u) = a + R(u − a)` beyond,
/// so that `0 ≤ β_m′ ≤ 1` and `F∘β_m ≡ F(a + 1/2)` on `[a + 1, ∞)`.
#[derive(Debug, Clone)]
pub struct TruncatedProfile {
    pub base: CollapseProfile,
    pub cut: f64,
    ramp: Ramp,
}

impl TruncatedProfile {
    pub fn new(base: CollapseProfile, cut: f64) -> Self {
        Self { base, cut, ramp: Ramp::new() }
    }

    /// `(β_m(u), β_m′(u))`.
    pub fn beta(&self, u: f64) -> (f64, f64) {
        if u <= self.cut {
            return (u, 1.0);
        }
        let w = u - self.cut;
        (self.cut + self.ramp.eval(w), 1.0 - smooth_step(w))
    }

    pub fn tail_value(&self) -> f64 {
        self.base.value(self.cut + self.ramp.eval(1.0))
    }
}

impl Profile for TruncatedProfile {
    fn eval(&self, u: f64) -> (f64, f64) {
        let (b, db) = self.beta(u);
        let (f, df) = self.base.eval(b);
        (f, df * db)
    }

    fn vanishes_below(&self) -> f64 {
        self.base.u0
    }

    fn constant_tail(&self) -> Option<(f64, f64)> {
        Some((self.cut + 1.0, self.tail_value()))
    }
}

/// The `m`-th approximant at time `t`.
#[derive(Clone)]
pub struct ApproximantStage {
    pub m: f64,
    pub t: f64,
    /// `a_m = G⁻¹(G(m) − d_y t)`.
    pub cut: f64,
    /// The constant `c_m` such that `ψ_m = (x⃗, e^{c_m t}y⃗, e^{c_m t}z)` near the zero section.
    pub tail: f64,
    pub profile: Arc<TruncatedProfile>,
    pub map: CollapseMap,
}

impl ApproximantStage {
    /// `e^{tF(m)/2}`, the bound on `|f_m − f|`.
    pub fn factor_bound(&self) -> f64 {
        (self.t * self.profile.base.value(self.m) / 2.0).exp()
    }

    /// `ψ_m` coincides with the collapse map where `−log ρ ≤ m`.
    pub fn agrees_at(&self, p: &[f64]) -> bool {
        self.map.field.weight.neg_log_rho(p) <= self.m
    }
}

pub fn build_approximant(profile: CollapseProfile, weight: RadialWeight, m: f64, t: f64, cfg: IntegratorConfig) -> Result<ApproximantStage> {
    if !(t > 0.0) || !(m > profile.u1) {
        return Err(Error::InvalidParameter("approximant needs t > 0 and m beyond the glue region".into()));
    }
    let calc = GCalculus::new(profile);
    let cut = calc.g_inv(calc.g(m)? - weight.d_y as f64 * t)?;
    let trunc = Arc::new(TruncatedProfile::new(profile, cut));
    let tail = trunc.tail_value();
    let field = Arc::new(CollapseField::new(trunc.clone(), weight));
    Ok(ApproximantStage { m, t, cut, tail, profile: trunc, map: CollapseMap::new(field, t, cfg) })
}
