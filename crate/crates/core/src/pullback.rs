//! Sampled maps, the numerical test of `ψ*α = fα`, and contact-volume quadrature.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coords::{AmbientSpace, Cuboid, Point};
use crate::error::{Error, Result};
use crate::form::factorial;

/// Image of a point, with the log-conformal factor when the map knows it.
#[derive(Debug, Clone, PartialEq)]
pub struct MapValue {
    pub point: Vec<f64>,
    /// `log f` where available; `−∞` encodes a vanishing factor.
    pub log_f: Option<f64>,
}

/// A map of the ambient space evaluated pointwise on flat coordinates.
pub trait PointMap: Send + Sync {
    fn n(&self) -> usize;
    fn apply(&self, p: &[f64]) -> Result<MapValue>;
}

/// Identity map.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl PointMap for Identity {
    fn n(&self) -> usize {
        self.0
    }
    fn apply(&self, p: &[f64]) -> Result<MapValue> {
        Ok(MapValue { point: p.to_vec(), log_f: Some(0.0) })
    }
}

type MapFn = dyn Fn(&[f64]) -> Result<MapValue> + Send + Sync;

/// Map from a closure.
#[derive(Clone)]
pub struct FnMap {
    n: usize,
    f: Arc<MapFn>,
}

impl FnMap {
    pub fn new(n: usize, f: impl Fn(&[f64]) -> Result<MapValue> + Send + Sync + 'static) -> Self {
        Self { n, f: Arc::new(f) }
    }

    /// A map given only by its point evaluator; no conformal factor attached.
    pub fn points(n: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self::new(n, move |p| Ok(MapValue { point: f(p), log_f: None }))
    }
}

impl PointMap for FnMap {
    fn n(&self) -> usize {
        self.n
    }
    fn apply(&self, p: &[f64]) -> Result<MapValue> {
        (self.f)(p)
    }
}

/// `maps[last] ∘ … ∘ maps[0]`.
#[derive(Clone)]
pub struct Composite {
    maps: Vec<Arc<dyn PointMap>>,
}

impl Composite {
    pub fn new(maps: Vec<Arc<dyn PointMap>>) -> Self {
        Self { maps }
    }
}

impl PointMap for Composite {
    fn n(&self) -> usize {
        self.maps.first().map_or(0, |m| m.n())
    }
    fn apply(&self, p: &[f64]) -> Result<MapValue> {
        let mut cur = MapValue { point: p.to_vec(), log_f: Some(0.0) };
        for m in &self.maps {
            let next = m.apply(&cur.point)?;
            cur.log_f = match (cur.log_f, next.log_f) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
            cur.point = next.point;
        }
        Ok(cur)
    }
}

/// A sampled candidate contactomorphism: evaluator plus finite-difference step.
#[derive(Clone)]
pub struct DiffeoSample {
    pub space: AmbientSpace,
    pub map: Arc<dyn PointMap>,
    pub h: f64,
}

impl DiffeoSample {
    pub fn new(space: AmbientSpace, map: Arc<dyn PointMap>, h: f64) -> Self {
        assert!(h > 0.0, "finite-difference step must be positive");
        Self { space, map, h }
    }

    /// Step `10⁻⁵ · diam(domain)`, the default scale for finite differences.
    pub fn default_step(domain: &Cuboid) -> f64 {
        1e-5 * domain.diameter()
    }

    pub fn identity(space: AmbientSpace, h: f64) -> Self {
        let n = space.n();
        Self::new(space, Arc::new(Identity(n)), h)
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        let v = self.map.apply(p.as_slice())?;
        let q = Point::from_vec(v.point);
        if !q.is_finite() {
            return Err(Error::NonFinite("map image"));
        }
        if !self.space.contains(&q) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.space.normalize(&q))
    }

    pub fn apply_value(&self, p: &Point) -> Result<MapValue> {
        self.map.apply(p.as_slice())
    }
}

/// `(f_hat, residual)` of the pullback test at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackResidual {
    pub f_hat: f64,
    pub residual: f64,
}

/// Jacobian by central differences; column `i` is `∂ψ/∂pᵢ`.
pub fn fd_jacobian(psi: &DiffeoSample, p: &Point) -> Result<Vec<Vec<f64>>> {
    let d = p.dim();
    let mut cols = Vec::with_capacity(d);
    let mut q = p.clone();
    for i in 0..d {
        q[i] = p[i] + psi.h;
        let fp = psi.apply(&q)?;
        q[i] = p[i] - psi.h;
        let fm = psi.apply(&q)?;
        q[i] = p[i];
        let diff = psi.space.difference(&fm, &fp);
        cols.push(diff.as_slice().iter().map(|c| c / (2.0 * psi.h)).collect());
    }
    Ok(cols)
}

/// Least-squares `f` with `(Dψ_p)ᵀ α_{ψ(p)} ≈ f α_p` and the relative mismatch.
pub fn pullback_residual(psi: &DiffeoSample, p: &Point) -> Result<PullbackResidual> {
    let n = p.n();
    let q = psi.apply(p)?;
    let jac = fd_jacobian(psi, p)?;
    // α_q = dz − Σ yⱼ(q) dxⱼ applied to each column
    let c: Vec<f64> = jac
        .iter()
        .map(|col| col[2 * n] - (0..n).map(|j| q.y()[j] * col[j]).sum::<f64>())
        .collect();
    let mut a = vec![0.0; 2 * n + 1];
    for j in 0..n {
        a[j] = -p.y()[j];
    }
    a[2 * n] = 1.0;
    let aa: f64 = a.iter().map(|v| v * v).sum();
    let f_hat = c.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>() / aa;
    let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rn = c.iter().zip(&a).map(|(x, y)| (x - f_hat * y).powi(2)).sum::<f64>().sqrt();
    Ok(PullbackResidual { f_hat, residual: rn / cn.max(1.0) })
}

/// Where the pointwise conformal factor comes from during volume quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorSource {
    /// Finite-difference pullback at each sample.
    #[default]
    Pullback,
    /// The log-factor reported by the map, falling back to the pullback.
    Reported,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature {
    /// Tensor midpoint rule with this many cells per axis; the error is
    /// estimated against the rule with half as many cells.
    Grid { per_axis: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub error: f64,
    pub samples: usize,
    pub skipped: usize,
}

impl VolumeEstimate {
    pub fn skip_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.skipped as f64 / self.samples as f64
        }
    }
}

/// Pointwise conformal factor, `None` where it cannot be evaluated.
pub fn sampled_factor(psi: &DiffeoSample, p: &Point, src: FactorSource) -> Option<f64> {
    if src == FactorSource::Reported {
        if let Ok(MapValue { log_f: Some(l), .. }) = psi.apply_value(p) {
            if !l.is_nan() {
                return Some(l.exp());
            }
        }
    }
    match pullback_residual(psi, p) {
        Ok(r) if r.f_hat.is_finite() => Some(r.f_hat),
        _ => None,
    }
}

/// Quadrature of `∫_box |f_ψ|^{n+1} dμ_α`, the contact volume of `ψ(box)`.
pub fn image_volume(psi: &DiffeoSample, b: &Cuboid, quad: Quadrature, src: FactorSource) -> Result<VolumeEstimate> {
    let n = psi.space.n();
    if b.dim() != 2 * n + 1 {
        return Err(Error::DimensionMismatch { expected: 2 * n + 1, found: b.dim() });
    }
    let density = factorial(n);
    let vol = b.lebesgue_volume();
    if vol == 0.0 {
        return Ok(VolumeEstimate { value: 0.0, error: 0.0, samples: 0, skipped: 0 });
    }
    let integrand = |p: &[f64]| sampled_factor(psi, &Point::from_slice(p), src).map(|f| f.abs().powi(n as i32 + 1) * density);
    match quad {
        Quadrature::Grid { per_axis } => {
            let per_axis = per_axis.max(2);
            let mean = |m: usize, skipped: &mut usize, count: &mut usize| {
                let (mut s, mut k) = (0.0, 0usize);
                for p in b.midpoints(m) {
                    *count += 1;
                    match integrand(&p) {
                        Some(v) => {
                            s += v;
                            k += 1;
                        }
                        None => *skipped += 1,
                    }
                }
                if k == 0 { f64::NAN } else { s / k as f64 }
            };
            let (mut skipped, mut count) = (0, 0);
            let fine = mean(per_axis, &mut skipped, &mut count);
            let (mut s2, mut c2) = (0, 0);
            let coarse = mean(per_axis / 2, &mut s2, &mut c2);
            if fine.is_nan() {
                return Err(Error::NonFinite("every quadrature sample"));
            }
            let err = if coarse.is_nan() { f64::INFINITY } else { (fine - coarse).abs() * vol };
            Ok(VolumeEstimate { value: fine * vol, error: err, samples: count, skipped })
        }
        Quadrature::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut s, mut s2, mut k, mut skipped) = (0.0, 0.0, 0usize, 0usize);
            let mut p = vec![0.0; b.dim()];
            for _ in 0..samples {
                for (i, c) in p.iter_mut().enumerate() {
                    *c = rng.gen_range(b.lo[i]..b.hi[i]);
                }
                match integrand(&p) {
                    Some(v) => {
                        s += v;
                        s2 += v * v;
                        k += 1;
                    }
                    None => skipped += 1,
                }
            }
            if k == 0 {
                return Err(Error::NonFinite("every quadrature sample"));
            }
            let mean = s / k as f64;
            let var = (s2 / k as f64 - mean * mean).max(0.0);
            Ok(VolumeEstimate { value: mean * vol, error: vol * (var / k as f64).sqrt(), samples, skipped })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dilation(t: f64) -> FnMap {
        let e = t.exp();
        FnMap::new(1, move |p| Ok(MapValue { point: vec![p[0], e * p[1], e * p[2]], log_f: Some(t) }))
    }

    #[test]
    fn identity_pullback() {
        let psi = DiffeoSample::identity(AmbientSpace::euclidean(2), 1e-5);
        let r = pullback_residual(&psi, &Point::new(&[0.1, 0.2], &[0.3, -0.4], 0.5)).unwrap();
        assert!((r.f_hat - 1.0).abs() < 1e-10 && r.residual < 1e-10);
    }

    #[test]
    fn dilation_pullback_and_volume() {
        let psi = DiffeoSample::new(AmbientSpace::euclidean(1), Arc::new(dilation(1.0)), 1e-5);
        let r = pullback_residual(&psi, &Point::new(&[0.3], &[0.7], -0.2)).unwrap();
        assert!((r.f_hat - core::f64::consts::E).abs() < 1e-8 && r.residual < 1e-8);
        let b = Cuboid::centered(&[0.0; 3], 0.5);
        let v = image_volume(&psi, &b, Quadrature::Grid { per_axis: 4 }, FactorSource::Pullback).unwrap();
        assert!((v.value - 2f64.exp()).abs() < 1e-6);
        assert_eq!(v.skipped, 0);
    }

    #[test]
    fn torus_translation_is_strict() {
        let shift = FnMap::points(1, |p| vec![p[0] + 0.3, p[1], p[2]]);
        let psi = DiffeoSample::new(AmbientSpace::torus(1), Arc::new(shift), 1e-5);
        // the image of 0.85 wraps; differences must use the minimal representative
        let r = pullback_residual(&psi, &Point::new(&[0.7], &[0.2], 0.1)).unwrap();
        assert!((r.f_hat - 1.0).abs() < 1e-9 && r.residual < 1e-9);
    }
}
