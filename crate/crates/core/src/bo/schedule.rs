//! Smoothing schedule `F₀ ≡ 0, F₁, F₂, …` converging uniformly to the target with
//! `max|F_k − F_{k−1}| < 2^{−k}`.
//!
//! `F_k = λ_k·M_{ε_k}F` with `λ_k = 1 − 2^{−k}`, where `M_ε` is the normalized discrete
//! convolution of the target with the tensor mollifier of half-width `ε`, sampled on the
//! lattice `(ε/r)ℤ^d`:
//! `M_εF(w) = Σ_v F(v)η_ε(w − v) / Σ_v η_ε(w − v)`.
//! Widths halve from a start fitted to the modulus of continuity of `F` until the
//! increment bound holds on a verification grid.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::target::TargetProfile;
use crate::coords::Cuboid;
use crate::error::{Error, Result};
use crate::smooth::mollifier_d;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleOptions {
    /// Lattice nodes per mollifier half-width.
    pub nodes_per_width: usize,
    /// Verification grid points per axis (1-D grids are refined to half the width).
    pub verify_per_axis: usize,
    /// Smallest width tried before giving up.
    pub min_width: f64,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self { nodes_per_width: 6, verify_per_axis: 33, min_width: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct SmoothingSchedule {
    pub target: TargetProfile,
    pub options: ScheduleOptions,
    /// `ε_k` for `k = 1..=k_max` (index `k − 1`).
    pub widths: Vec<f64>,
    /// Measured `max|F_k − F_{k−1}|` on the verification grids.
    pub increments: Vec<f64>,
    /// Measured `max|F_k|`.
    pub sups: Vec<f64>,
    /// Verification grid size per axis used for each `k`.
    pub grids: Vec<usize>,
    /// Common support `K + ε₁` of every `F_k`.
    pub support: Cuboid,
}

pub fn lambda(k: usize) -> f64 {
    1.0 - 0.5f64.powi(k as i32)
}

/// Normalized discrete mollification `M_εF(w)` and its gradient.
fn mollify(target: &TargetProfile, eps: f64, r: usize, w: &[f64], grad: Option<&mut [f64]>) -> f64 {
    let d = w.len();
    let h = eps / r as f64;
    // per-axis lattice windows with kernel values and derivatives
    let mut lo = vec![0i64; d];
    let mut ker: Vec<Vec<(f64, f64)>> = Vec::with_capacity(d);
    for j in 0..d {
        let a = ((w[j] - eps) / h).ceil() as i64;
        let b = ((w[j] + eps) / h).floor() as i64;
        lo[j] = a;
        ker.push((a..=b).map(|i| mollifier_d(w[j] - i as f64 * h, eps)).collect());
    }
    let den: Vec<f64> = ker.iter().map(|k| k.iter().map(|e| e.0).sum()).collect();
    let dden: Vec<f64> = ker.iter().map(|k| k.iter().map(|e| e.1).sum()).collect();
    let mut num = 0.0;
    let mut dnum = vec![0.0; d];
    let mut idx = vec![0usize; d];
    let mut v = vec![0.0; d];
    'outer: loop {
        let mut weight = 1.0;
        for j in 0..d {
            v[j] = (lo[j] + idx[j] as i64) as f64 * h;
            weight *= ker[j][idx[j]].0;
        }
        if weight > 0.0 {
            let fv = target.eval(&v);
            if fv != 0.0 {
                num += fv * weight;
                for j in 0..d {
                    let mut p = fv * ker[j][idx[j]].1;
                    for i in 0..d {
                        if i != j {
                            p *= ker[i][idx[i]].0;
                        }
                    }
                    dnum[j] += p;
                }
            }
        }
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < ker[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    let dtot: f64 = den.iter().product();
    if let Some(g) = grad {
        for j in 0..d {
            let ddj = dden[j] * den.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, x)| x).product::<f64>();
            g[j] = (dnum[j] * dtot - num * ddj) / (dtot * dtot);
        }
    }
    num / dtot
}

impl SmoothingSchedule {
    pub fn k_max(&self) -> usize {
        self.widths.len()
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// `F_k(w)`; `F₀ ≡ 0`.
    pub fn eval(&self, k: usize, w: &[f64]) -> f64 {
        if k == 0 {
            return 0.0;
        }
        lambda(k) * mollify(&self.target, self.widths[k - 1], self.options.nodes_per_width, w, None)
    }

    /// `F_k(w)` with its gradient.
    pub fn eval_grad(&self, k: usize, w: &[f64], grad: &mut [f64]) -> f64 {
        if k == 0 {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return 0.0;
        }
        let l = lambda(k);
        let v = mollify(&self.target, self.widths[k - 1], self.options.nodes_per_width, w, Some(grad));
        grad.iter_mut().for_each(|g| *g *= l);
        l * v
    }

    /// `G_k = F_k − F_{k−1}` with gradient.
    pub fn increment_grad(&self, k: usize, w: &[f64], grad: &mut [f64]) -> f64 {
        let mut g2 = vec![0.0; w.len()];
        let a = self.eval_grad(k, w, grad);
        let b = self.eval_grad(k - 1, w, &mut g2);
        for (g, h) in grad.iter_mut().zip(&g2) {
            *g -= h;
        }
        a - b
    }

    pub fn increment(&self, k: usize, w: &[f64]) -> f64 {
        self.eval(k, w) - self.eval(k - 1, w)
    }

    /// Per-axis size of the verification grid for width `eps`.
    pub fn grid_size(&self, eps: f64) -> usize {
        grid_size(&self.support, eps, self.options.verify_per_axis)
    }

    /// Verification grid for stage `k`.
    pub fn verification_grid(&self, k: usize) -> Vec<Vec<f64>> {
        let m = self.grids[k - 1];
        self.support.grid(m).collect()
    }
}

fn grid_size(support: &Cuboid, eps: f64, base: usize) -> usize {
    if support.dim() == 1 {
        let width = support.hi[0] - support.lo[0];
        base.max((2.0 * width / eps).ceil() as usize + 1).min(1 << 16)
    } else {
        base
    }
}

/// Largest `ε` on a halving ladder whose sampled modulus of continuity is below `tol`.
fn fitted_start(target: &TargetProfile, tol: f64, min_width: f64) -> f64 {
    let k = &target.support;
    let mut eps = 0.25 * k.lo.iter().zip(&k.hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min);
    let pts: Vec<Vec<f64>> = k.grid(if k.dim() == 1 { 257 } else { 9 }).collect();
    while eps > min_width {
        let mut worst: f64 = 0.0;
        for p in &pts {
            let f0 = target.eval(p);
            for j in 0..p.len() {
                let mut q = p.clone();
                q[j] += eps;
                worst = worst.max((target.eval(&q) - f0).abs());
            }
        }
        if worst <= tol {
            break;
        }
        eps *= 0.5;
    }
    eps
}

/// Builds `F₁, …, F_{k_max}`.
pub fn mollify_sequence(target: TargetProfile, k_max: usize, options: ScheduleOptions) -> Result<SmoothingSchedule> {
    if options.nodes_per_width < 2 || !(options.min_width > 0.0) {
        return Err(Error::InvalidParameter("schedule needs at least two nodes per width and a positive floor".into()));
    }
    let slack = 1.0 - target.sup_abs;
    let start = fitted_start(&target, 0.25 * slack, options.min_width);
    let support = Cuboid {
        lo: target.support.lo.iter().map(|l| l - start).collect(),
        hi: target.support.hi.iter().map(|h| h + start).collect(),
    };
    let mut s = SmoothingSchedule {
        target,
        options,
        widths: Vec::new(),
        increments: Vec::new(),
        sups: Vec::new(),
        grids: Vec::new(),
        support,
    };
    let mut eps = start;
    for k in 1..=k_max {
        loop {
            if eps < options.min_width {
                return Err(Error::BudgetExhausted(alloc::format!(
                    "no mollification width >= {:e} meets the 2^-{k} increment bound; use a smaller k_max",
                    options.min_width
                )));
            }
            s.widths.push(eps);
            let m = s.grid_size(eps);
            let (mut inc, mut sup) = (0.0f64, 0.0f64);
            for w in s.support.grid(m) {
                let a = s.eval(k, &w);
                inc = inc.max((a - s.eval(k - 1, &w)).abs());
                sup = sup.max(a.abs());
            }
            if inc < 0.5f64.powi(k as i32) {
                s.increments.push(inc);
                s.sups.push(sup);
                s.grids.push(m);
                break;
            }
            s.widths.pop();
            eps *= 0.5;
        }
        eps *= 0.5;
    }
    Ok(s)
}
