//! Sampled diagnostics: profile assumptions, tangency order of the wall map, and
//! contact-volume ratios of shrinking boxes.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use super::profile::Profile;
use super::weight::RadialWeight;
use crate::coords::{Cuboid, Point};
use crate::error::{Error, Result};
use crate::form::contact_volume;
use crate::pullback::{image_volume, sampled_factor, DiffeoSample, FactorSource, Quadrature, VolumeEstimate};
use crate::quad;

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Verdicts on the five profile assumptions, sampled on `[u0 − 1, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub horizon: f64,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn log_grid(a: f64, b: f64, k: usize) -> impl Iterator<Item = f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..=k).map(move |i| (la + (lb - la) * i as f64 / k as f64).exp())
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// `Decays` when the tail samples vanish or their log-log slope is at most −1/4.
fn decays(horizon: f64, g: impl Fn(f64) -> f64) -> (bool, String) {
    let us: Vec<f64> = log_grid(horizon / 100.0, horizon, 40).collect();
    let vals: Vec<f64> = us.iter().map(|&u| g(u).abs()).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return (false, "non-finite sample".into());
    }
    if vals.last() == Some(&0.0) {
        return (true, "vanishes at horizon".into());
    }
    let pairs: Vec<(f64, f64)> = us.iter().zip(&vals).filter(|(_, v)| **v > 0.0).map(|(u, v)| (u.ln(), v.ln())).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let s = slope(&xs, &ys);
    (s <= -0.25, alloc::format!("tail log-log slope {s:.3}, last |value| {:.3e}", vals[vals.len() - 1]))
}

/// Sampled checks of: `F′ ≤ 0`; `F = 0` exactly on `u ≤ u0`; `∫^∞ du/F = −∞`;
/// `e^{(1/d_y − 1/d_z)u}F′(u) → 0`; `F′/F → 0`.
pub fn check_assumptions(profile: &dyn Profile, weight: &RadialWeight, horizon: f64) -> Result<AssumptionReport> {
    let u0 = profile.vanishes_below();
    if !(horizon > u0 + 2.0) {
        return Err(Error::InvalidParameter("horizon must exceed the glue point".into()));
    }
    let mut grid: Vec<f64> = (0..=400).map(|i| u0 - 1.0 + 3.0 * i as f64 / 400.0).collect();
    grid.extend(log_grid(u0 + 2.0, horizon, 400));
    let mut checks = Vec::new();

    let worst = grid.iter().map(|&u| profile.eval(u).1).fold(f64::NEG_INFINITY, f64::max);
    checks.push(AssumptionCheck { name: "monotone", pass: worst <= 0.0, detail: alloc::format!("max F' = {worst:.3e}") });

    let zero_ok = grid.iter().filter(|&&u| u <= u0).all(|&u| profile.value(u) == 0.0);
    let neg_ok = grid.iter().filter(|&&u| u >= u0 + 0.02).all(|&u| profile.value(u) < 0.0);
    checks.push(AssumptionCheck {
        name: "support",
        pass: zero_ok && neg_ok,
        detail: alloc::format!("zero below u0: {zero_ok}, negative beyond: {neg_ok}"),
    });

    // increments of ∫ du/|F| over e-fold intervals must not decay geometrically
    let lo = (u0 + 2.0).max(1.0);
    let steps = (horizon / lo).ln().floor().max(2.0) as usize;
    let incr: Vec<f64> = (0..steps)
        .map(|k| {
            let a = lo * (k as f64).exp();
            quad::adaptive(|v| -1.0 / profile.value(v), a, a * core::f64::consts::E, 0.0, 1e-10, 2000).value
        })
        .collect();
    let ratio = incr[incr.len() - 1] / incr[incr.len() - 2];
    let total: f64 = incr.iter().sum();
    checks.push(AssumptionCheck {
        name: "divergence",
        pass: ratio >= 0.8,
        detail: alloc::format!("∫ du/|F| up to horizon = {total:.4}, last increment ratio {ratio:.3}"),
    });

    let rate = 1.0 / weight.d_y as f64 - 1.0 / weight.d_z as f64;
    let (pass, detail) = decays(horizon, |u| (rate * u).exp() * profile.eval(u).1);
    checks.push(AssumptionCheck { name: "weighted-slope", pass, detail });

    let (pass, detail) = decays(horizon, |u| {
        let (f, df) = profile.eval(u);
        df / f
    });
    checks.push(AssumptionCheck { name: "log-slope", pass, detail });
    Ok(AssumptionReport { horizon, checks })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencyWindow {
    pub width: f64,
    /// Fitted slope of `log|g(z)|` against `log|z|` over `|z| ∈ [w/2, w]`; `+∞` if `g ≡ 0` there.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangencyReport {
    pub windows: Vec<TangencyWindow>,
}

impl TangencyReport {
    /// Slopes strictly increase as the window shrinks.
    pub fn increasing(&self) -> bool {
        self.windows.windows(2).all(|w| w[1].slope > w[0].slope)
    }

    pub fn final_slope(&self) -> f64 {
        self.windows.last().map_or(f64::NAN, |w| w.slope)
    }
}

/// Estimates the order of contact of a wall map with the zero map at `z = 0` from
/// `log|g|`, over a ladder of shrinking windows sampled on both signs.
pub fn tangency_order(log_abs: impl Fn(f64) -> Result<f64>, ladder: &[f64], samples: usize) -> Result<TangencyReport> {
    let samples = samples.max(2);
    let mut windows = Vec::with_capacity(ladder.len());
    for &w in ladder {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for s in log_grid(w / 2.0, w, samples - 1) {
            for z in [s, -s] {
                xs.push(s.ln());
                ys.push(log_abs(z)?);
            }
        }
        let slope = if ys.iter().all(|&y| y == f64::NEG_INFINITY) {
            f64::INFINITY
        } else if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("wall map sample"));
        } else {
            slope(&xs, &ys)
        };
        windows.push(TangencyWindow { width: w, slope });
    }
    Ok(TangencyReport { windows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessRow {
    pub half_width: f64,
    pub volume: VolumeEstimate,
    pub reference: f64,
    pub ratio: f64,
    pub f_sup: f64,
    pub f_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub center: Vec<f64>,
    pub rows: Vec<BoundednessRow>,
}

impl BoundednessReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ratio < w[0].ratio)
    }

    /// Last ratio over first.
    pub fn decay(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.ratio / a.ratio,
            _ => f64::NAN,
        }
    }

    /// Ratios stay above half the first one.
    pub fn ratio_bounded_below(&self) -> bool {
        let first = self.rows.first().map_or(0.0, |r| r.ratio);
        self.rows.iter().all(|r| r.ratio >= 0.5 * first)
    }

    /// `sup|f|` stays below twice the first one.
    pub fn factor_bounded(&self) -> bool {
        let first = self.rows.first().map_or(0.0, |r| r.f_sup);
        self.rows.iter().all(|r| r.f_sup <= 2.0 * first)
    }
}

/// `Vol_α(ψ(B_r)) / Vol_α(B_r)` and the range of `|f_ψ|` for boxes of shrinking half-width around `center`.
pub fn boundedness_diagnostics(
    psi: &DiffeoSample,
    center: &[f64],
    half_widths: &[f64],
    per_axis: usize,
    src: FactorSource,
) -> Result<BoundednessReport> {
    let n = psi.space.n();
    let mut rows = Vec::with_capacity(half_widths.len());
    for &r in half_widths {
        let b = Cuboid::centered(center, r);
        let volume = image_volume(psi, &b, Quadrature::Grid { per_axis }, src)?;
        let reference = contact_volume(n, &b);
        let (mut f_sup, mut f_inf) = (0.0f64, f64::INFINITY);
        for p in b.midpoints(per_axis) {
            if let Some(f) = sampled_factor(psi, &Point::from_vec(p), src) {
                f_sup = f_sup.max(f.abs());
                f_inf = f_inf.min(f.abs());
            }
        }
        rows.push(BoundednessRow { half_width: r, volume, reference, ratio: volume.value / reference, f_sup, f_inf });
    }
    Ok(BoundednessReport { center: center.to_vec(), rows })
}
