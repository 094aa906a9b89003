//! Radial weights `ρ(y⃗, z) = Σ yⱼ^{d_y} + z^{d_z}` around the zero section.

use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialWeight {
    pub n: usize,
    pub d_y: u32,
    pub d_z: u32,
}

/// `log(e^a + e^b)` without overflow; `−∞` entries are neutral.
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl RadialWeight {
    pub fn new(n: usize, d_y: u32, d_z: u32) -> Result<Self> {
        if n == 0 || d_y % 2 != 0 || d_z % 2 != 0 || d_z < 2 || d_y < d_z {
            return Err(Error::InvalidParameter(alloc::format!(
                "radial weight needs even exponents with d_y >= d_z >= 2 (got d_y = {d_y}, d_z = {d_z})"
            )));
        }
        Ok(Self { n, d_y, d_z })
    }

    /// `Σ yⱼ² + z²`.
    pub fn square(n: usize) -> Self {
        Self { n, d_y: 2, d_z: 2 }
    }

    /// `Σ yⱼ⁴ + z²`.
    pub fn quartic(n: usize) -> Self {
        Self { n, d_y: 4, d_z: 2 }
    }

    fn y<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.n..2 * self.n]
    }

    fn z(&self, p: &[f64]) -> f64 {
        p[2 * self.n]
    }

    /// `ρ_y(y⃗) = Σ yⱼ^{d_y}`.
    pub fn rho_y(&self, y: &[f64]) -> f64 {
        y.iter().map(|v| v.powi(self.d_y as i32)).sum()
    }

    /// `ρ` at a flat point.
    pub fn rho(&self, p: &[f64]) -> f64 {
        self.rho_y(self.y(p)) + self.z(p).powi(self.d_z as i32)
    }

    /// `log ρ`, accurate even where `ρ` itself underflows.
    pub fn log_rho(&self, p: &[f64]) -> f64 {
        let mut acc = f64::NEG_INFINITY;
        for &v in self.y(p) {
            if v != 0.0 {
                acc = log_add(acc, self.d_y as f64 * v.abs().ln());
            }
        }
        let z = self.z(p);
        if z != 0.0 {
            acc = log_add(acc, self.d_z as f64 * z.abs().ln());
        }
        acc
    }

    /// `u = −log ρ`; `+∞` on the zero section.
    pub fn neg_log_rho(&self, p: &[f64]) -> f64 {
        -self.log_rho(p)
    }

    /// `(∂ρ/∂yⱼ)/ρ` into `out[..n]` and returns `(∂ρ/∂z)/ρ`, computed in log space.
    pub fn log_gradient(&self, p: &[f64], out: &mut [f64]) -> f64 {
        let lr = self.log_rho(p);
        let ratio = |v: f64, d: u32| {
            if v == 0.0 {
                0.0
            } else {
                d as f64 * v.signum() * ((d - 1) as f64 * v.abs().ln() - lr).exp()
            }
        };
        for (j, &v) in self.y(p).iter().enumerate() {
            out[j] = ratio(v, self.d_y);
        }
        ratio(self.z(p), self.d_z)
    }

    /// `d_z z^{d_z} / ρ ∈ [0, d_z]`.
    pub fn z_share(&self, p: &[f64]) -> f64 {
        let z = self.z(p);
        if z == 0.0 {
            return 0.0;
        }
        self.d_z as f64 * (self.d_z as f64 * z.abs().ln() - self.log_rho(p)).exp()
    }

    pub fn on_zero_section(&self, p: &[f64]) -> bool {
        self.y(p).iter().all(|&v| v == 0.0) && self.z(p) == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneity_and_log_space() {
        let w = RadialWeight::quartic(2);
        let y = [0.3, -0.7];
        let t: f64 = 1.7;
        assert!((w.rho_y(&[t * y[0], t * y[1]]) - t.powi(4) * w.rho_y(&y)).abs() < 1e-12);
        let p = [0.0, 0.0, 0.3, -0.7, 0.2];
        assert!((w.log_rho(&p) - w.rho(&p).ln()).abs() < 1e-14);
        let tiny = [0.0, 0.0, 1e-200, 0.0, 3e-200];
        let expect = 2.0 * 3e-200f64.ln();
        assert!((w.log_rho(&tiny) - expect).abs() < 1e-9);
        assert_eq!(w.neg_log_rho(&[0.5, 0.1, 0.0, 0.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn gradient_ratios() {
        let w = RadialWeight::square(1);
        let p = [0.1, 0.3, 0.4];
        let mut g = [0.0];
        let gz = w.log_gradient(&p, &mut g);
        let rho = 0.25;
        assert!((g[0] - 0.6 / rho).abs() < 1e-12);
        assert!((gz - 0.8 / rho).abs() < 1e-12);
        assert!((w.z_share(&p) - 2.0 * 0.16 / rho).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(RadialWeight::new(1, 2, 4).is_err());
        assert!(RadialWeight::new(1, 3, 2).is_err());
        assert!(RadialWeight::new(1, 4, 2).is_ok());
    }
}
