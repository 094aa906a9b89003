//! `G(u) = ∫_{u1}^{u} dv / F(v)` and its inverse.
//!
//! Beyond the glue point `u1` both are closed form. On the glue region `G` is
//! positive and blows up at `u0`; it is tabulated on a mesh graded towards `u0`
//! down to `u0 + (u1 − u0)/500` and inverted by safeguarded Newton.

use alloc::vec::Vec;

use num_traits::Float;

use super::profile::{Base, CollapseProfile, Profile};
use crate::error::{Error, Result};
use crate::quad;

const TABLE_NODES: usize = 240;
const TABLE_DEPTH: f64 = 500.0;

#[derive(Debug, Clone)]
pub struct GCalculus {
    pub profile: CollapseProfile,
    nodes: Vec<f64>,
    /// `cum[i] = ∫_{nodes[i]}^{u1} dv/|F(v)| = G(nodes[i])`.
    cum: Vec<f64>,
}

impl GCalculus {
    pub fn new(profile: CollapseProfile) -> Self {
        let w = profile.width();
        let nodes: Vec<f64> = (0..=TABLE_NODES)
            .map(|k| {
                if k == TABLE_NODES {
                    profile.u1
                } else {
                    let tau = TABLE_DEPTH.powf(k as f64 / TABLE_NODES as f64) / TABLE_DEPTH;
                    profile.u0 + w * tau
                }
            })
            .collect();
        let mut cum = alloc::vec![0.0; nodes.len()];
        for i in (0..TABLE_NODES).rev() {
            cum[i] = cum[i + 1] + Self::glue_integral(&profile, nodes[i], nodes[i + 1]);
        }
        Self { profile, nodes, cum }
    }

    fn glue_integral(profile: &CollapseProfile, a: f64, b: f64) -> f64 {
        quad::adaptive(|v| -1.0 / profile.value(v), a, b, 0.0, 1e-14, 4000).value
    }

    /// Lower end of the tabulated glue region.
    pub fn table_floor(&self) -> f64 {
        self.nodes[0]
    }

    /// `G(table_floor())`, the largest value `G⁻¹` accepts.
    pub fn g_max(&self) -> f64 {
        self.cum[0]
    }

    pub fn g(&self, u: f64) -> Result<f64> {
        let p = &self.profile;
        if u.is_nan() {
            return Err(Error::NonFinite("G argument"));
        }
        if u >= p.u1 {
            return Ok(match p.base {
                Base::Power(b) => -(u.powf(1.0 - b) - p.u1.powf(1.0 - b)) / (1.0 - b),
                Base::Linear => -(u / p.u1).ln(),
                Base::LogLinear => -(u.ln() / p.u1.ln()).ln(),
            });
        }
        if u < self.nodes[0] {
            return Err(Error::OutOfTableRange { value: u, lo: self.nodes[0], hi: f64::INFINITY });
        }
        let i = self.nodes.partition_point(|&v| v <= u).clamp(1, self.nodes.len() - 1);
        Ok(self.cum[i] + Self::glue_integral(p, u, self.nodes[i]))
    }

    /// `G⁻¹(s)` with values in `[table_floor(), ∞)`.
    pub fn g_inv(&self, s: f64) -> Result<f64> {
        let p = &self.profile;
        if s.is_nan() {
            return Err(Error::NonFinite("G⁻¹ argument"));
        }
        if s <= 0.0 {
            let u = match p.base {
                Base::Power(b) => (p.u1.powf(1.0 - b) - (1.0 - b) * s).powf(1.0 / (1.0 - b)),
                Base::Linear => p.u1 * (-s).exp(),
                Base::LogLinear => (p.u1.ln() * (-s).exp()).exp(),
            };
            if !u.is_finite() {
                return Err(Error::OutOfTableRange { value: s, lo: f64::NEG_INFINITY, hi: self.cum[0] });
            }
            return Ok(u);
        }
        if s > self.cum[0] {
            return Err(Error::OutOfTableRange { value: s, lo: f64::NEG_INFINITY, hi: self.cum[0] });
        }
        // cum is decreasing: find cum[i] >= s >= cum[i+1]
        let j = self.cum.partition_point(|&c| c >= s).clamp(1, self.cum.len() - 1);
        let (mut lo, mut hi) = (self.nodes[j - 1], self.nodes[j]);
        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.g(u)? - s;
            if r.abs() <= 1e-15 * s {
                break;
            }
            if r > 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            // G′ = 1/F
            let step = u - r * p.value(u);
            u = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(u)
    }

    /// `(G⁻¹(G(u) − d_z t), G⁻¹(G(u) − d_y t))`, the envelope of `−log ρ` after time `t`.
    pub fn bihari_envelope(&self, u: f64, t: f64, d_y: u32, d_z: u32) -> Result<(f64, f64)> {
        if u <= self.profile.u0 {
            return Ok((u, u));
        }
        let g = self.g(u)?;
        Ok((self.g_inv(g - d_z as f64 * t)?, self.g_inv(g - d_y as f64 * t)?))
    }
}
