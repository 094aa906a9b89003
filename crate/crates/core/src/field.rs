//! Time-dependent scalar fields `H(t, ·)` with gradient oracles.
//!
//! Fields work on flat coordinate slices `[x⃗, y⃗, z]`; the gradient is written
//! into a slice of the same layout.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use crate::coords::Cuboid;
use crate::smooth::BetaCutoff;

/// Shared handle to a field.
pub type FieldRef = Arc<dyn ScalarField>;

pub trait ScalarField: Send + Sync {
    /// Half-dimension `n`; points have `2n + 1` coordinates.
    fn n(&self) -> usize;

    fn value(&self, t: f64, p: &[f64]) -> f64;

    /// Writes `(∂H/∂x⃗, ∂H/∂y⃗, ∂H/∂z)` into `grad`. Defaults to central differences.
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        fd_gradient(|q| self.value(t, q), p, self.grad_step(), grad);
    }

    /// Relative step of the finite-difference gradient.
    fn grad_step(&self) -> f64 {
        1e-6
    }

    /// Closed box outside which the field vanishes, or `None` for global support.
    fn support(&self) -> Option<Cuboid> {
        None
    }

    /// For fields singular along a locus, a nonnegative measure of the distance to it.
    /// Integrators stop once it drops below their floor.
    fn singular_weight(&self, _p: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        (**self).value(t, p)
    }
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        (**self).gradient(t, p, grad)
    }
    fn grad_step(&self) -> f64 {
        (**self).grad_step()
    }
    fn support(&self) -> Option<Cuboid> {
        (**self).support()
    }
    fn singular_weight(&self, p: &[f64]) -> Option<f64> {
        (**self).singular_weight(p)
    }
}

/// Central-difference gradient with per-coordinate step `h·max(1, |pᵢ|)`.
pub fn fd_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, p: &[f64], h: f64, grad: &mut [f64]) {
    let mut q = p.to_vec();
    for i in 0..p.len() {
        let hi = h * p[i].abs().max(1.0);
        q[i] = p[i] + hi;
        let fp = f(&q);
        q[i] = p[i] - hi;
        let fm = f(&q);
        q[i] = p[i];
        grad[i] = (fp - fm) / (2.0 * hi);
    }
}

pub fn gradient_vec<H: ScalarField + ?Sized>(h: &H, t: f64, p: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; p.len()];
    h.gradient(t, p, &mut g);
    g
}

/// `H ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub n: usize,
    pub c: f64,
}

impl ScalarField for Constant {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, _: f64, _: &[f64]) -> f64 {
        self.c
    }
    fn gradient(&self, _: f64, _: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
    }
}

type ValueFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// Field from closures, with an optional analytic gradient and declared support.
#[derive(Clone)]
pub struct FnField {
    n: usize,
    value: Arc<ValueFn>,
    grad: Option<Arc<GradFn>>,
    support: Option<Cuboid>,
    h_grad: f64,
}

impl FnField {
    pub fn new(n: usize, value: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { n, value: Arc::new(value), grad: None, support: None, h_grad: 1e-6 }
    }

    pub fn with_gradient(mut self, grad: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    /// Declares a support box; evaluation outside it returns exactly 0.
    pub fn with_support(mut self, support: Cuboid) -> Self {
        self.support = Some(support);
        self
    }

    pub fn with_grad_step(mut self, h: f64) -> Self {
        self.h_grad = h;
        self
    }

    fn outside(&self, p: &[f64]) -> bool {
        self.support.as_ref().is_some_and(|s| !s.contains(p))
    }
}

impl core::fmt::Debug for FnField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnField")
            .field("n", &self.n)
            .field("analytic_gradient", &self.grad.is_some())
            .field("support", &self.support)
            .finish()
    }
}

impl ScalarField for FnField {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        if self.outside(p) {
            0.0
        } else {
            (self.value)(t, p)
        }
    }
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        if self.outside(p) {
            grad.fill(0.0);
            return;
        }
        match &self.grad {
            Some(g) => g(t, p, grad),
            None => fd_gradient(|q| (self.value)(t, q), p, self.h_grad, grad),
        }
    }
    fn grad_step(&self) -> f64 {
        self.h_grad
    }
    fn support(&self) -> Option<Cuboid> {
        self.support.clone()
    }
}

/// Monomial `c · ∏ pᵢ^{eᵢ}` in the flat coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub exps: Vec<u32>,
}

/// Autonomous polynomial with exact gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<Monomial>) -> Self {
        assert!(terms.iter().all(|m| m.exps.len() == 2 * n + 1), "exponent vector length must be 2n+1");
        Self { n, terms }
    }

    /// The coordinate function with flat index `i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut exps = vec![0; 2 * n + 1];
        exps[i] = 1;
        Self::new(n, vec![Monomial { coef: 1.0, exps }])
    }

    /// All monomials of total degree `≤ degree` with coefficients uniform in `[−scale, scale]`.
    pub fn random<R: Rng + ?Sized>(n: usize, degree: u32, scale: f64, rng: &mut R) -> Self {
        let dim = 2 * n + 1;
        let mut terms = Vec::new();
        let mut exps = vec![0u32; dim];
        loop {
            let total: u32 = exps.iter().sum();
            if total <= degree {
                terms.push(Monomial { coef: rng.gen_range(-scale..=scale), exps: exps.clone() });
            }
            // odometer over exponent vectors in [0, degree]^dim
            let mut i = 0;
            loop {
                if i == dim {
                    return Self { n, terms };
                }
                exps[i] += 1;
                if exps[i] <= degree {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|m| m.exps.iter().sum()).max().unwrap_or(0)
    }
}

impl ScalarField for Polynomial {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, _: f64, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|m| m.coef * m.exps.iter().zip(p).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
            .sum()
    }
    fn gradient(&self, _: f64, p: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
        for m in &self.terms {
            for i in 0..p.len() {
                if m.exps[i] == 0 {
                    continue;
                }
                let mut v = m.coef * m.exps[i] as f64;
                for (j, (&e, &x)) in m.exps.iter().zip(p).enumerate() {
                    let e = if j == i { e - 1 } else { e };
                    v *= x.powi(e as i32);
                }
                grad[i] += v;
            }
        }
    }
}

/// `β_k ∘ H`.
#[derive(Clone)]
pub struct CutoffField {
    pub inner: FieldRef,
    pub beta: BetaCutoff,
}

impl ScalarField for CutoffField {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        self.beta.eval(self.inner.value(t, p))
    }
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        let d = self.beta.derivative(self.inner.value(t, p));
        self.inner.gradient(t, p, grad);
        grad.iter_mut().for_each(|g| *g *= d);
    }
    fn support(&self) -> Option<Cuboid> {
        self.inner.support()
    }
}

/// Pointwise product `f · H`.
#[derive(Clone)]
pub struct ProductField {
    pub f: FieldRef,
    pub h: FieldRef,
}

impl ScalarField for ProductField {
    fn n(&self) -> usize {
        self.h.n()
    }
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        self.f.value(t, p) * self.h.value(t, p)
    }
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        let (fv, hv) = (self.f.value(t, p), self.h.value(t, p));
        let mut gf = vec![0.0; p.len()];
        self.f.gradient(t, p, &mut gf);
        self.h.gradient(t, p, grad);
        for (g, a) in grad.iter_mut().zip(&gf) {
            *g = fv * *g + hv * a;
        }
    }
    fn support(&self) -> Option<Cuboid> {
        self.h.support()
    }
}

/// Sum of fields.
#[derive(Clone)]
pub struct SumField {
    pub parts: Vec<FieldRef>,
}

impl ScalarField for SumField {
    fn n(&self) -> usize {
        self.parts[0].n()
    }
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        self.parts.iter().map(|h| h.value(t, p)).sum()
    }
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
        let mut g = vec![0.0; p.len()];
        for h in &self.parts {
            h.gradient(t, p, &mut g);
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
    }
    fn support(&self) -> Option<Cuboid> {
        let boxes: Option<Vec<Cuboid>> = self.parts.iter().map(|h| h.support()).collect();
        let boxes = boxes?;
        let dim = boxes.first()?.dim();
        let lo = (0..dim).map(|i| boxes.iter().map(|b| b.lo[i]).fold(f64::INFINITY, f64::min)).collect();
        let hi = (0..dim).map(|i| boxes.iter().map(|b| b.hi[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
        Some(Cuboid { lo, hi })
    }
}

/// `c · H`.
#[derive(Clone)]
pub struct ScaledField {
    pub inner: FieldRef,
    pub c: f64,
}

impl ScalarField for ScaledField {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        self.c * self.inner.value(t, p)
    }
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        self.inner.gradient(t, p, grad);
        grad.iter_mut().for_each(|g| *g *= self.c);
    }
    fn support(&self) -> Option<Cuboid> {
        self.inner.support()
    }
    fn singular_weight(&self, p: &[f64]) -> Option<f64> {
        self.inner.singular_weight(p)
    }
}

/// Time reparametrization `H_φ(t, p) = φ′(t)·H(φ(t), p)`, which generates `t ↦ ψ^{φ(t)}`.
#[derive(Clone)]
pub struct ReparamField {
    pub inner: FieldRef,
    pub phi: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
}

impl ScalarField for ReparamField {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        let (s, ds) = (self.phi)(t);
        ds * self.inner.value(s, p)
    }
    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        let (s, ds) = (self.phi)(t);
        self.inner.gradient(s, p, grad);
        grad.iter_mut().for_each(|g| *g *= ds);
    }
    fn support(&self) -> Option<Cuboid> {
        self.inner.support()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn polynomial_gradient_matches_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = Polynomial::random(2, 3, 1.0, &mut rng);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.terms().len(), 56); // C(5+3, 3)
        let x = [0.3, -0.2, 0.5, 0.1, -0.4];
        let mut g = [0.0; 5];
        let mut fd = [0.0; 5];
        p.gradient(0.0, &x, &mut g);
        fd_gradient(|q| p.value(0.0, q), &x, 1e-6, &mut fd);
        for i in 0..5 {
            assert!((g[i] - fd[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn support_is_hard() {
        let b = Cuboid::centered(&[0.0, 0.0, 0.0], 1.0);
        let h = FnField::new(1, |_, p| 1.0 + p[0]).with_support(b);
        assert_eq!(h.value(0.0, &[2.0, 0.0, 0.0]), 0.0);
        let mut g = [1.0; 3];
        h.gradient(0.0, &[2.0, 0.0, 0.0], &mut g);
        assert_eq!(g, [0.0; 3]);
        assert_eq!(h.value(0.0, &[0.5, 0.0, 0.0]), 1.5);
    }
}
