//! Continuous compactly supported targets `F : U → (−1, 1)` for the graph construction.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use crate::coords::Cuboid;
use crate::error::{Error, Result};
use crate::smooth::smooth_step;

type TargetFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// `F` together with a box `K` outside which it vanishes.
#[derive(Clone)]
pub struct TargetProfile {
    f: Arc<TargetFn>,
    pub support: Cuboid,
    /// `max|F|` on the validation grid.
    pub sup_abs: f64,
}

impl core::fmt::Debug for TargetProfile {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TargetProfile").field("support", &self.support).field("sup_abs", &self.sup_abs).finish()
    }
}

/// Cutoff equal to 1 on `|r| ≤ 1/2` and 0 on `|r| ≥ 1`.
pub fn plateau(r: f64) -> f64 {
    smooth_step(2.0 * (1.0 - r.abs()))
}

impl TargetProfile {
    /// Validates `max|F| < 1` and `F = 0` off `support` on a grid of `per_axis` points
    /// over the support enlarged by a quarter of its width.
    pub fn new(support: Cuboid, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, per_axis: usize) -> Result<Self> {
        let f: Arc<TargetFn> = Arc::new(f);
        let pad: Vec<f64> = support.lo.iter().zip(&support.hi).map(|(l, h)| 0.25 * (h - l)).collect();
        let outer = Cuboid {
            lo: support.lo.iter().zip(&pad).map(|(l, p)| l - p).collect(),
            hi: support.hi.iter().zip(&pad).map(|(h, p)| h + p).collect(),
        };
        let mut sup: f64 = 0.0;
        for w in outer.grid(per_axis.max(3)).chain(support.grid(per_axis.max(3))) {
            let v = f(&w);
            if !v.is_finite() {
                return Err(Error::NonFinite("target value"));
            }
            if !support.contains(&w) && v != 0.0 {
                return Err(Error::SupportViolation { value: v });
            }
            sup = sup.max(v.abs());
        }
        if sup >= 1.0 {
            return Err(Error::Precondition(alloc::format!("target must satisfy max|F| < 1 (found {sup})")));
        }
        Ok(Self { f, support, sup_abs: sup })
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        if !self.support.contains(w) {
            return 0.0;
        }
        (self.f)(w)
    }

    /// `F ≡ 0` on `[−1, 1]^dim`.
    pub fn zero(dim: usize) -> Self {
        Self { f: Arc::new(|_| 0.0), support: Cuboid::centered(&alloc::vec![0.0; dim], 1.0), sup_abs: 0.0 }
    }

    /// `a·∛z·Π plateau(wⱼ/r)` with `z` the last coordinate: continuous, with a vertical
    /// tangency at the origin whose inverse `s ↦ (s/a)³` is smooth.
    pub fn cube_root(dim: usize, amplitude: f64, radius: f64) -> Result<Self> {
        let support = Cuboid::centered(&alloc::vec![0.0; dim], radius);
        Self::new(
            support,
            move |w| {
                let z = w[w.len() - 1];
                amplitude * z.cbrt() * w.iter().map(|c| plateau(c / radius)).product::<f64>()
            },
            65,
        )
    }

    /// Tent `a·Π max(0, 1 − |wⱼ|/r)`.
    pub fn tent(dim: usize, amplitude: f64, radius: f64) -> Result<Self> {
        let support = Cuboid::centered(&alloc::vec![0.0; dim], radius);
        Self::new(support, move |w| amplitude * w.iter().map(|c| (1.0 - c.abs() / radius).max(0.0)).product::<f64>(), 65)
    }

    /// Multilinear interpolation of tabulated samples; zero outside the table.
    pub fn from_samples(grid: GridInterpolant) -> Result<Self> {
        let support = grid.hull();
        let per_axis = grid.axes.iter().map(|a| a.len()).max().unwrap_or(2) * 2;
        let g = Arc::new(grid);
        Self::new(support, move |w| g.eval(w), per_axis.min(257))
    }
}

/// Multilinear interpolant on a tensor grid; values are stored with the first axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInterpolant {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl GridInterpolant {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.len() < 2 || a.windows(2).any(|w| !(w[1] > w[0]))) {
            return Err(Error::InvalidParameter("grid axes need at least two strictly increasing nodes".into()));
        }
        let count: usize = axes.iter().map(|a| a.len()).product();
        if values.len() != count {
            return Err(Error::DimensionMismatch { expected: count, found: values.len() });
        }
        Ok(Self { axes, values })
    }

    pub fn hull(&self) -> Cuboid {
        Cuboid { lo: self.axes.iter().map(|a| a[0]).collect(), hi: self.axes.iter().map(|a| a[a.len() - 1]).collect() }
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        let d = self.axes.len();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for (a, &c) in self.axes.iter().zip(w) {
            if c < a[0] || c > a[a.len() - 1] {
                return 0.0;
            }
            let i = a.partition_point(|&v| v <= c).clamp(1, a.len() - 1) - 1;
            base.push(i);
            frac.push((c - a[i]) / (a[i + 1] - a[i]));
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let (mut weight, mut idx, mut stride) = (1.0, 0usize, 1usize);
            for j in 0..d {
                let up = (corner >> j) & 1;
                weight *= if up == 1 { frac[j] } else { 1.0 - frac[j] };
                idx += (base[j] + up) * stride;
                stride *= self.axes[j].len();
            }
            if weight != 0.0 {
                acc += weight * self.values[idx];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_reproduces_bilinear() {
        let axes = alloc::vec![alloc::vec![0.0, 1.0, 3.0], alloc::vec![-1.0, 1.0]];
        let f = |x: f64, y: f64| 2.0 * x - y + 0.5 * x * y;
        let mut values = Vec::new();
        for &y in &axes[1] {
            for &x in &axes[0] {
                values.push(f(x, y));
            }
        }
        let g = GridInterpolant::new(axes, values).unwrap();
        for (x, y) in [(0.3, 0.2), (2.5, -0.7), (3.0, 1.0)] {
            assert!((g.eval(&[x, y]) - f(x, y)).abs() < 1e-12);
        }
        assert_eq!(g.eval(&[3.5, 0.0]), 0.0);
    }

    #[test]
    fn targets_validate() {
        let t = TargetProfile::cube_root(1, 0.5, 0.5).unwrap();
        assert!(t.sup_abs < 0.5);
        assert_eq!(t.eval(&[0.7]), 0.0);
        assert!((t.eval(&[0.001]) - 0.05).abs() < 1e-12);
        assert!(TargetProfile::tent(1, 1.2, 0.5).is_err());
        let c = Cuboid::centered(&[0.0], 0.5);
        assert!(TargetProfile::new(c, |w| 0.1 * w[0], 9).is_err());
    }
}
