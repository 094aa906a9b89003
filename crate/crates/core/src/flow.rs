//! Contact Hamiltonian vector fields and their flows with the log-conformal
//! factor integrated alongside the position.
//!
//! For `φ_H^t` with `φ*α = fα` one has `d/dt log f = (∂H/∂z)∘φ^t`, so the flow is
//! solved as a `(2n+2)`-dimensional system whose last entry is `L = log f`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::coords::{AmbientSpace, Cuboid, Point, Tangent};
use crate::error::{Error, Result};
use crate::field::{FieldRef, ScalarField};
use crate::ode::{self, Method, OdeOptions, OdeStatus};
use crate::pullback::{self, DiffeoSample, MapValue, PointMap};

/// Writes `X_H` at `(t, p)` into `out` and returns `(H, ∂H/∂z)`.
///
/// `X_H = −Σ H_{yⱼ}∂_{xⱼ} + Σ (H_{xⱼ} + yⱼH_z)∂_{yⱼ} + (H − Σ yⱼH_{yⱼ})∂_z`.
pub fn vector_field_into<H: ScalarField + ?Sized>(h: &H, t: f64, p: &[f64], grad: &mut [f64], out: &mut [f64]) -> (f64, f64) {
    let n = (p.len() - 1) / 2;
    let hv = h.value(t, p);
    h.gradient(t, p, grad);
    let hz = grad[2 * n];
    let mut zc = hv;
    for j in 0..n {
        let (hx, hy, y) = (grad[j], grad[n + j], p[n + j]);
        out[j] = -hy;
        out[n + j] = hx + y * hz;
        zc -= y * hy;
    }
    out[2 * n] = zc;
    (hv, hz)
}

/// `X_H(t, p)` as a tangent vector.
pub fn hamiltonian_vector_field<H: ScalarField + ?Sized>(h: &H, t: f64, p: &Point) -> Result<Tangent> {
    if p.n() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), found: p.n() });
    }
    let d = p.dim();
    let mut grad = vec![0.0; d];
    let mut out = vec![0.0; d];
    let (hv, _) = vector_field_into(h, t, p.as_slice(), &mut grad, &mut out);
    if !hv.is_finite() || !grad.iter().all(|g| g.is_finite()) {
        return Err(Error::NonFinite("Hamiltonian gradient"));
    }
    Ok(Tangent::from_vec(out))
}

/// Integration settings shared by all flows.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Stop once a field's singular weight drops below this floor.
    pub rho_min: f64,
    pub max_steps: usize,
    /// Trajectories leaving this box are truncated.
    pub domain: Option<Cuboid>,
    /// Keep every accepted step.
    pub record: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45 { rtol: 1e-9, atol: 1e-9 },
            rho_min: 1e-300,
            max_steps: 2_000_000,
            domain: None,
            record: false,
        }
    }
}

impl IntegratorConfig {
    /// Fixed-step RK4 with `h = 10⁻³`, bit-stable across runs.
    pub fn golden() -> Self {
        Self { method: Method::Rk4 { step: 1e-3 }, ..Self::default() }
    }

    pub fn rk45(rtol: f64, atol: f64) -> Self {
        Self { method: Method::Rk45 { rtol, atol }, ..Self::default() }
    }

    pub fn rk4(step: f64) -> Self {
        Self { method: Method::Rk4 { step }, ..Self::default() }
    }

    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4 { step } => step > 0.0 && step.is_finite(),
            Method::Rk45 { rtol, atol } => rtol > 0.0 && atol >= 0.0 && rtol.is_finite() && atol.is_finite(),
        };
        if !ok || !(self.rho_min > 0.0) {
            return Err(Error::InvalidParameter("integrator step, tolerance and floor must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Completed,
    HitSingularFloor,
    LeftDomain,
}

/// Sampled flow line with `L(t) = log f(t)`, `L(0) = 0`.
///
/// Times are monotone in the direction of integration (decreasing for negative spans).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub log_f: Vec<f64>,
    pub status: FlowStatus,
}

impl Trajectory {
    pub fn endpoint(&self) -> &Point {
        self.points.last().expect("trajectory is never empty")
    }

    pub fn log_factor(&self) -> f64 {
        *self.log_f.last().expect("trajectory is never empty")
    }

    pub fn factor(&self) -> f64 {
        self.log_factor().exp()
    }

    pub fn is_complete(&self) -> bool {
        self.status == FlowStatus::Completed
    }

    fn constant(p: &Point, t0: f64, status: FlowStatus) -> Self {
        Self { times: vec![t0], points: vec![p.clone()], log_f: vec![0.0], status }
    }
}

/// Integrates the flow of `H` from time `t0` to `t1` starting at `p`.
pub fn integrate_between<H: ScalarField + ?Sized>(h: &H, p: &Point, t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if p.n() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), found: p.n() });
    }
    if !p.is_finite() {
        return Err(Error::NonFinite("flow start point"));
    }
    cfg.validate()?;
    let d = p.dim();
    if h.singular_weight(p.as_slice()).is_some_and(|w| w < cfg.rho_min) {
        return Ok(Trajectory::constant(p, t0, FlowStatus::HitSingularFloor));
    }
    if cfg.domain.as_ref().is_some_and(|b| !b.contains(p.as_slice())) {
        return Ok(Trajectory::constant(p, t0, FlowStatus::LeftDomain));
    }

    let mut y0 = p.as_slice().to_vec();
    y0.push(0.0);
    let mut grad = vec![0.0; d];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (_, hz) = vector_field_into(h, t, &y[..d], &mut grad, &mut dy[..d]);
        dy[d] = hz;
    };
    let mut status = FlowStatus::Completed;
    let stop = |_: f64, y: &[f64]| {
        if h.singular_weight(&y[..d]).is_some_and(|w| w < cfg.rho_min) {
            status = FlowStatus::HitSingularFloor;
            return true;
        }
        if cfg.domain.as_ref().is_some_and(|b| !b.contains(&y[..d])) {
            status = FlowStatus::LeftDomain;
            return true;
        }
        false
    };
    let opts = OdeOptions { method: cfg.method, max_steps: cfg.max_steps, record: cfg.record };
    let sol = ode::solve(rhs, &y0, t0, t1, &opts, stop);
    match sol.status {
        OdeStatus::Completed | OdeStatus::Stopped => {}
        OdeStatus::StepBudget => return Err(Error::Truncated("step budget exhausted")),
        OdeStatus::StepUnderflow => return Err(Error::Truncated("step size underflow")),
        OdeStatus::NonFinite => return Err(Error::NonFinite("flow state")),
    }
    let mut points = Vec::with_capacity(sol.states.len());
    let mut log_f = Vec::with_capacity(sol.states.len());
    for s in &sol.states {
        points.push(Point::from_slice(&s[..d]));
        log_f.push(s[d]);
    }
    Ok(Trajectory { times: sol.times, points, log_f, status })
}

/// Flow from time 0 to `t_final` (which may be negative).
pub fn integrate_flow<H: ScalarField + ?Sized>(h: &H, p: &Point, t_final: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_between(h, p, 0.0, t_final, cfg)
}

/// `f = exp ∫₀ᵗ (∂H/∂z)∘φ^s ds` at `p`.
pub fn conformal_factor<H: ScalarField + ?Sized>(h: &H, p: &Point, t: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let tr = integrate_flow(h, p, t, cfg)?;
    if !tr.is_complete() {
        return Err(Error::Truncated("conformal factor along a truncated trajectory"));
    }
    Ok(tr.factor())
}

/// The time-`t0 → t1` map of a Hamiltonian flow.
#[derive(Clone)]
pub struct FlowMap {
    pub field: FieldRef,
    pub t0: f64,
    pub t1: f64,
    pub cfg: IntegratorConfig,
}

impl FlowMap {
    pub fn new(field: FieldRef, t: f64, cfg: IntegratorConfig) -> Self {
        Self { field, t0: 0.0, t1: t, cfg }
    }

    /// The inverse map, integrating the same field backwards in time.
    pub fn inverse(&self) -> Self {
        Self { field: self.field.clone(), t0: self.t1, t1: self.t0, cfg: self.cfg.clone() }
    }
}

impl PointMap for FlowMap {
    fn n(&self) -> usize {
        self.field.n()
    }

    fn apply(&self, p: &[f64]) -> Result<MapValue> {
        let tr = integrate_between(&*self.field, &Point::from_slice(p), self.t0, self.t1, &self.cfg)?;
        match tr.status {
            FlowStatus::Completed => {}
            FlowStatus::HitSingularFloor => return Err(Error::Truncated("singular floor")),
            FlowStatus::LeftDomain => return Err(Error::OutsideDomain),
        }
        let log_f = tr.log_factor();
        Ok(MapValue { point: tr.points.into_iter().last().unwrap().into_vec(), log_f: Some(log_f) })
    }
}

/// Pointwise composition `maps[last] ∘ … ∘ maps[0]`; log-factors add.
pub fn compose_flows(space: AmbientSpace, maps: Vec<FlowMap>, h: f64) -> DiffeoSample {
    let maps: Vec<Arc<dyn PointMap>> = maps.into_iter().map(|m| Arc::new(m) as Arc<dyn PointMap>).collect();
    DiffeoSample::new(space, Arc::new(pullback::Composite::new(maps)), h)
}

/// Result of [`verify_contactomorphism`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContactomorphismReport {
    pub samples: usize,
    pub truncated: usize,
    pub max_residual: f64,
    /// `max |f_hat − f| / |f|` between the finite-difference and integrated factors.
    pub max_f_mismatch: f64,
}

/// Compares the finite-difference pullback of the time-`t` map with the
/// integrated conformal factor at each sample.
pub fn verify_contactomorphism(
    h: FieldRef,
    space: &AmbientSpace,
    samples: &[Point],
    t: f64,
    cfg: &IntegratorConfig,
    fd_step: f64,
) -> Result<ContactomorphismReport> {
    let map = DiffeoSample::new(space.clone(), Arc::new(FlowMap::new(h.clone(), t, cfg.clone())), fd_step);
    let mut rep = ContactomorphismReport { samples: samples.len(), truncated: 0, max_residual: 0.0, max_f_mismatch: 0.0 };
    for p in samples {
        let f = match conformal_factor(&*h, p, t, cfg) {
            Ok(f) => f,
            Err(Error::Truncated(_)) | Err(Error::OutsideDomain) => {
                rep.truncated += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let pr = match pullback::pullback_residual(&map, p) {
            Ok(pr) => pr,
            Err(Error::Truncated(_)) | Err(Error::OutsideDomain) => {
                rep.truncated += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        rep.max_residual = rep.max_residual.max(pr.residual);
        rep.max_f_mismatch = rep.max_f_mismatch.max((pr.f_hat - f).abs() / f.abs().max(f64::MIN_POSITIVE));
    }
    Ok(rep)
}
