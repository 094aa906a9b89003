//! Stage Hamiltonians `H_{kℓ} = u(x₁)·v(ℓy₁)/ℓ·G_k(w)` with `w = (x₂…xₙ, y₂…yₙ, z)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;


use super::bumps::BumpPair;
use super::schedule::SmoothingSchedule;
use crate::coords::Cuboid;
use crate::field::ScalarField;
use crate::flow::vector_field_into;

/// The coordinates `w ∈ U` of a flat point.
pub fn u_coords(n: usize, p: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(2 * n - 1);
    w.extend_from_slice(&p[1..n]);
    w.extend_from_slice(&p[n + 1..2 * n]);
    w.push(p[2 * n]);
    w
}

/// The flat point with `x₁ = a`, `y₁ = b` and the given `w`.
pub fn from_u_coords(n: usize, a: f64, b: f64, w: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; 2 * n + 1];
    p[0] = a;
    p[n] = b;
    p[1..n].copy_from_slice(&w[..n - 1]);
    p[n + 1..2 * n].copy_from_slice(&w[n - 1..2 * n - 2]);
    p[2 * n] = w[2 * n - 2];
    p
}

#[derive(Clone)]
pub struct StageField {
    pub n: usize,
    pub k: usize,
    pub ell: f64,
    pub schedule: Arc<SmoothingSchedule>,
    pub bumps: BumpPair,
}

impl StageField {
    pub fn new(n: usize, k: usize, ell: f64, schedule: Arc<SmoothingSchedule>, bumps: BumpPair) -> Self {
        assert_eq!(schedule.dim(), 2 * n - 1, "target lives on U of dimension 2n − 1");
        Self { n, k, ell, schedule, bumps }
    }

    /// `V_G` on `U` for the form `dz − Σ_{j≥2} yⱼdxⱼ`, written into U-coordinates.
    fn v_g(&self, w: &[f64], g: f64, dg: &[f64]) -> Vec<f64> {
        let m = self.n - 1;
        let mut out = vec![0.0; 2 * m + 1];
        let gz = dg[2 * m];
        let mut zc = g;
        for j in 0..m {
            out[j] = -dg[m + j];
            out[m + j] = dg[j] + w[m + j] * gz;
            zc -= w[m + j] * dg[m + j];
        }
        out[2 * m] = zc;
        out
    }

    /// `X_{H_{kℓ}}` from its displayed product form:
    /// `u·v(ℓy₁)/ℓ·V_G − u·v′(ℓy₁)·y₁·G ∂_z − u·v′(ℓy₁)·G ∂_{x₁} + v(ℓy₁)/ℓ·(u′G + u·y₁·∂G/∂z) ∂_{y₁}`.
    pub fn product_form(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        let w = u_coords(n, p);
        let mut dg = vec![0.0; w.len()];
        let g = self.schedule.increment_grad(self.k, &w, &mut dg);
        let (u, du) = self.bumps.u(p[0]);
        let y1 = p[n];
        let (v, dv) = self.bumps.v(self.ell * y1);
        let vg = self.v_g(&w, g, &dg);
        let c = u * v / self.ell;
        let mut x = vec![0.0; 2 * n + 1];
        let m = n - 1;
        for j in 0..m {
            x[1 + j] = c * vg[j];
            x[n + 1 + j] = c * vg[m + j];
        }
        x[2 * n] = c * vg[2 * m] - u * dv * y1 * g;
        x[0] = -u * dv * g;
        x[n] = v / self.ell * (du * g + u * y1 * dg[2 * m]);
        x
    }

    /// `X_H` through the generic contact Hamiltonian formula.
    pub fn generic_form(&self, p: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; p.len()];
        let mut out = vec![0.0; p.len()];
        vector_field_into(self, 0.0, p, &mut grad, &mut out);
        out
    }
}

impl ScalarField for StageField {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, _t: f64, p: &[f64]) -> f64 {
        let (u, _) = self.bumps.u(p[0]);
        let (v, _) = self.bumps.v(self.ell * p[self.n]);
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        let w = u_coords(self.n, p);
        u * v / self.ell * self.schedule.increment(self.k, &w)
    }

    fn gradient(&self, _t: f64, p: &[f64], grad: &mut [f64]) {
        let n = self.n;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (u, du) = self.bumps.u(p[0]);
        let (v, dv) = self.bumps.v(self.ell * p[n]);
        if (u == 0.0 && du == 0.0) || (v == 0.0 && dv == 0.0) {
            return;
        }
        let w = u_coords(n, p);
        let mut dg = vec![0.0; w.len()];
        let g = self.schedule.increment_grad(self.k, &w, &mut dg);
        let c = u * v / self.ell;
        grad[0] = du * v / self.ell * g;
        grad[n] = u * dv * g;
        for j in 0..n - 1 {
            grad[1 + j] = c * dg[j];
            grad[n + 1 + j] = c * dg[n - 1 + j];
        }
        grad[2 * n] = c * dg[2 * n - 2];
    }

    fn support(&self) -> Option<Cuboid> {
        Some(self.support_box())
    }
}

impl StageField {
    /// Closed box containing the support: `|x₁| ≤ 1 − ε/2`, `|y₁| ≤ 0.9δ/ℓ`, `w ∈ K`.
    pub fn support_box(&self) -> Cuboid {
        let n = self.n;
        let k = &self.schedule.support;
        let a = self.bumps.u_reach();
        let b = self.bumps.v_reach() / self.ell;
        Cuboid { lo: from_u_coords(n, -a, -b, &k.lo), hi: from_u_coords(n, a, b, &k.hi) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bo::schedule::{mollify_sequence, ScheduleOptions};
    use crate::bo::target::TargetProfile;
    use crate::field::fd_gradient;

    fn stage(n: usize) -> StageField {
        let t = TargetProfile::tent(2 * n - 1, 0.6, 0.5).unwrap();
        let s = Arc::new(mollify_sequence(t, 3, ScheduleOptions { verify_per_axis: 9, ..Default::default() }).unwrap());
        StageField::new(n, 2, 3.0, s, BumpPair::new(0.3, 0.5).unwrap())
    }

    #[test]
    fn coordinates_round_trip() {
        let p = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(u_coords(2, &p), alloc::vec![2.0, 4.0, 5.0]);
        assert_eq!(from_u_coords(2, 1.0, 3.0, &[2.0, 4.0, 5.0]), p.to_vec());
    }

    #[test]
    fn gradient_and_two_vector_field_paths_agree() {
        for n in [1, 2] {
            let h = stage(n);
            let p: Vec<f64> = (0..2 * n + 1).map(|i| [0.2, 0.05, -0.1, 0.08, 0.1][i] * if i == n { 0.3 } else { 1.0 }).collect();
            let mut g = vec![0.0; p.len()];
            let mut fd = vec![0.0; p.len()];
            h.gradient(0.0, &p, &mut g);
            fd_gradient(|q| h.value(0.0, q), &p, 1e-7, &mut fd);
            for i in 0..p.len() {
                assert!((g[i] - fd[i]).abs() < 1e-6, "n={n} i={i}: {} {}", g[i], fd[i]);
            }
            let a = h.product_form(&p);
            let b = h.generic_form(&p);
            for i in 0..p.len() {
                assert!((a[i] - b[i]).abs() < 1e-12, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn restriction_to_hypersurface() {
        let h = stage(1);
        let p = [0.1, 0.0, 0.2];
        let x = h.generic_form(&p);
        let g = h.schedule.increment(2, &[0.2]);
        assert!((x[0] - g).abs() < 1e-15 && x[1] == 0.0 && x[2] == 0.0);
        assert_eq!(h.value(0.0, &[0.1, 0.5, 0.2]), 0.0);
    }
}
