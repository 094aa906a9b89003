//! The collapse Hamiltonian `H = z·F(−log ρ)`, its flow, the closed-form wall map
//! and the explicit flow for the square weight.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::gcalc::GCalculus;
use super::profile::Profile;
use super::weight::RadialWeight;
use crate::coords::Point;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flow::{integrate_flow, FlowStatus, IntegratorConfig, Trajectory};
use crate::ode::{self, Method, OdeOptions, OdeStatus};
use crate::pullback::{MapValue, PointMap};

pub type ProfileRef = Arc<dyn Profile>;

/// `H(x⃗, y⃗, z) = z·F(−log ρ(y⃗, z))`, extended by 0 on the zero section.
#[derive(Clone)]
pub struct CollapseField {
    pub profile: ProfileRef,
    pub weight: RadialWeight,
}

impl CollapseField {
    pub fn new(profile: ProfileRef, weight: RadialWeight) -> Self {
        Self { profile, weight }
    }

    /// `(H(p), on_zero_section)`; the value is 0 on the zero section.
    pub fn value_flagged(&self, p: &[f64]) -> (f64, bool) {
        if self.weight.on_zero_section(p) {
            return (0.0, true);
        }
        (self.value(0.0, p), false)
    }

    /// `∂H/∂z = F(u) − (d_z z^{d_z}/ρ)·F′(u)`.
    pub fn reeb_derivative(&self, p: &[f64]) -> f64 {
        if self.weight.on_zero_section(p) {
            return 0.0;
        }
        let u = self.weight.neg_log_rho(p);
        if u <= self.profile.vanishes_below() {
            return 0.0;
        }
        let (f, df) = self.profile.eval(u);
        f - self.weight.z_share(p) * df
    }
}

impl ScalarField for CollapseField {
    fn n(&self) -> usize {
        self.weight.n
    }

    fn value(&self, _t: f64, p: &[f64]) -> f64 {
        let z = p[2 * self.weight.n];
        if z == 0.0 {
            return 0.0;
        }
        z * self.profile.value(self.weight.neg_log_rho(p))
    }

    fn gradient(&self, _t: f64, p: &[f64], grad: &mut [f64]) {
        let n = self.weight.n;
        grad.iter_mut().for_each(|g| *g = 0.0);
        if self.weight.on_zero_section(p) {
            return;
        }
        let u = self.weight.neg_log_rho(p);
        if u <= self.profile.vanishes_below() {
            return;
        }
        let (f, df) = self.profile.eval(u);
        let z = p[2 * n];
        let rz = self.weight.log_gradient(p, &mut grad[n..2 * n]);
        for g in &mut grad[n..2 * n] {
            *g *= -z * df;
        }
        grad[2 * n] = f - z * rz * df;
    }

    fn singular_weight(&self, p: &[f64]) -> Option<f64> {
        Some(self.weight.log_rho(p).exp())
    }
}

/// Settings suited to collapse flows: relative error control only, since
/// coordinates shrink towards the zero section by many orders of magnitude.
pub fn collapse_config() -> IntegratorConfig {
    IntegratorConfig::rk45(1e-10, 1e-300)
}

/// A flow line of `H` with `−log ρ` recorded at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseTrajectory {
    pub trajectory: Trajectory,
    pub neg_log_rho: Vec<f64>,
}

/// Integrates the collapse flow from `p` for time `t`.
///
/// Points on the zero section, or starting below the floor, are fixed with a
/// vanishing conformal factor.
pub fn integrate_collapse(field: &CollapseField, p: &Point, t: f64, cfg: &IntegratorConfig) -> Result<CollapseTrajectory> {
    let w = &field.weight;
    let start_floor = w.on_zero_section(p.as_slice()) || w.log_rho(p.as_slice()) < cfg.rho_min.ln();
    let trajectory = if start_floor {
        Trajectory { times: vec![0.0], points: vec![p.clone()], log_f: vec![f64::NEG_INFINITY], status: FlowStatus::HitSingularFloor }
    } else {
        integrate_flow(field, p, t, cfg)?
    };
    let neg_log_rho = trajectory.points.iter().map(|q| w.neg_log_rho(q.as_slice())).collect();
    Ok(CollapseTrajectory { trajectory, neg_log_rho })
}

/// The time-`t` map of a collapse flow.
///
/// When the profile has a constant tail `c` beyond `u*`, points with `−log ρ ≥ u*`
/// move by the exact linear flow `(x⃗, e^{ct}y⃗, e^{ct}z)`. Trajectories reaching the
/// floor report the truncated point and the log-factor accumulated so far, which
/// bounds the true one from above.
#[derive(Clone)]
pub struct CollapseMap {
    pub field: Arc<CollapseField>,
    pub t: f64,
    pub cfg: IntegratorConfig,
}

impl CollapseMap {
    pub fn new(field: Arc<CollapseField>, t: f64, cfg: IntegratorConfig) -> Self {
        Self { field, t, cfg }
    }

    fn linear(&self, p: &[f64], c: f64) -> MapValue {
        let n = self.field.weight.n;
        let e = (c * self.t).exp();
        let mut q = p.to_vec();
        q[n..].iter_mut().for_each(|v| *v *= e);
        MapValue { point: q, log_f: Some(c * self.t) }
    }
}

impl PointMap for CollapseMap {
    fn n(&self) -> usize {
        self.field.weight.n
    }

    fn apply(&self, p: &[f64]) -> Result<MapValue> {
        let u = self.field.weight.neg_log_rho(p);
        if u <= self.field.profile.vanishes_below() {
            return Ok(MapValue { point: p.to_vec(), log_f: Some(0.0) });
        }
        if let Some((ustar, c)) = self.field.profile.constant_tail() {
            if u >= ustar {
                return Ok(self.linear(p, c));
            }
        }
        let tr = integrate_collapse(&self.field, &Point::from_slice(p), self.t, &self.cfg)?.trajectory;
        if tr.status == FlowStatus::LeftDomain {
            return Err(Error::OutsideDomain);
        }
        let log_f = tr.log_factor();
        Ok(MapValue { point: tr.points.into_iter().last().unwrap().into_vec(), log_f: Some(log_f) })
    }
}

/// The collapse flow restricted to the `z`-axis, `g(z) = sgn z·exp(−U/d_z)` with
/// `U = G⁻¹(G(−d_z log|z|) − d_z t)`.
#[derive(Debug, Clone)]
pub struct WallMap {
    pub calc: GCalculus,
    pub d_z: u32,
    pub t: f64,
}

impl WallMap {
    pub fn new(calc: GCalculus, d_z: u32, t: f64) -> Self {
        Self { calc, d_z, t }
    }

    /// `(u, U)` for `z ≠ 0`, or `None` where `g` is the identity.
    fn exponents(&self, z: f64) -> Result<Option<(f64, f64)>> {
        let u = -(self.d_z as f64) * z.abs().ln();
        if u <= self.calc.profile.u0 || self.t == 0.0 {
            return Ok(None);
        }
        let big = self.calc.g_inv(self.calc.g(u)? - self.d_z as f64 * self.t)?;
        Ok(Some((u, big)))
    }

    /// `log|g(z)|`; `−∞` at `z = 0`.
    pub fn log_abs(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match self.exponents(z)? {
            None => z.abs().ln(),
            Some((_, big)) => -big / self.d_z as f64,
        })
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        Ok(z.signum() * self.log_abs(z)?.exp())
    }

    /// `g′(z) = g(z)·F(U) / (z·F(u))`, and `g′(0) = 0`.
    pub fn derivative(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Ok(0.0);
        }
        match self.exponents(z)? {
            None => Ok(1.0),
            Some((u, big)) => {
                let p = &self.calc.profile;
                let ratio = p.value(big) / p.value(u);
                Ok((self.log_abs(z)? - z.abs().ln()).exp() * ratio)
            }
        }
    }
}

/// `log|g(z)|` for the wall map of an arbitrary profile, by integrating `w′ = F(−d_z w)` for `w = log|z|`.
/// Stays finite where `g` itself underflows.
pub fn wall_log_ode(profile: &dyn Profile, d_z: u32, z: f64, t: f64, rtol: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let dz = d_z as f64;
    let opts = OdeOptions { method: Method::Rk45 { rtol, atol: rtol }, max_steps: 1_000_000, record: false };
    let sol = ode::solve(|_, w, dw| dw[0] = profile.value(-dz * w[0]), &[z.abs().ln()], 0.0, t, &opts, |_, _| false);
    if sol.status != OdeStatus::Completed {
        return Err(Error::Truncated("wall integration"));
    }
    Ok(sol.last()[0])
}

/// The wall map of an arbitrary profile; see [`wall_log_ode`].
pub fn wall_map_ode(profile: &dyn Profile, d_z: u32, z: f64, t: f64, rtol: f64) -> Result<f64> {
    Ok(z.signum() * wall_log_ode(profile, d_z, z, t, rtol)?.exp())
}

/// Explicit time-`t` flow for `ρ = |y⃗|² + z²`:
///
/// with `u = −log ρ`, `U = G⁻¹(G(u) − 2t)` and `r = F(U)/F(u)`,
/// `X = x⃗ + (atan(|y|/z) − atan(r|y|/z))·y⃗/|y|`,
/// `Y = −e^{−U/2}F(U)y⃗/D`, `Z = −e^{−U/2}F(u)z/D`, `D = √(F(U)²|y|² + F(u)²z²)`.
pub fn square_closed_form(calc: &GCalculus, p: &Point, t: f64) -> Result<Point> {
    let n = p.n();
    let w = RadialWeight::square(n);
    let s = p.as_slice();
    if w.on_zero_section(s) {
        return Ok(p.clone());
    }
    let u = w.neg_log_rho(s);
    if u <= calc.profile.u0 || t == 0.0 {
        return Ok(p.clone());
    }
    let big = calc.g_inv(calc.g(u)? - 2.0 * t)?;
    let fu = calc.profile.value(u);
    let fbig = calc.profile.value(big);
    let r = fbig / fu;
    let y = &s[n..2 * n];
    let z = s[2 * n];
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut q = s.to_vec();
    if ny > 0.0 {
        let turn = ((1.0 - r) * ny * z).atan2(z * z + r * ny * ny);
        for j in 0..n {
            q[j] += turn * y[j] / ny;
        }
    }
    let d = (fbig * ny).hypot(fu * z);
    let scale = -(-big / 2.0).exp() / d;
    for j in 0..n {
        q[n + j] = scale * fbig * y[j];
    }
    q[2 * n] = scale * fu * z;
    Ok(Point::from_vec(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collapse::profile::CollapseProfile;
    use crate::field::fd_gradient;

    fn square_field() -> CollapseField {
        CollapseField::new(Arc::new(CollapseProfile::sqrt()), RadialWeight::square(1))
    }

    #[test]
    fn analytic_gradient() {
        let h = CollapseField::new(Arc::new(CollapseProfile::log_linear()), RadialWeight::quartic(2));
        let p = [0.1, -0.2, 0.05, -0.04, 0.01];
        let mut g = [0.0; 5];
        let mut fd = [0.0; 5];
        h.gradient(0.0, &p, &mut g);
        fd_gradient(|q| h.value(0.0, q), &p, 1e-7, &mut fd);
        for i in 0..5 {
            assert!((g[i] - fd[i]).abs() < 1e-5 * (1.0 + g[i].abs()), "{i}: {} vs {}", g[i], fd[i]);
        }
        assert!((h.reeb_derivative(&p) - g[4]).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_integration() {
        let h = square_field();
        let calc = GCalculus::new(CollapseProfile::sqrt());
        for (p, t) in [([0.3, 0.2, 0.1], 0.7), ([-0.1, -0.05, 0.2], 1.2), ([0.0, 0.3, -0.02], 0.3)] {
            let p = Point::from_slice(&p);
            let a = square_closed_form(&calc, &p, t).unwrap();
            let b = integrate_collapse(&h, &p, t, &collapse_config()).unwrap();
            assert!(b.trajectory.is_complete());
            let e = b.trajectory.endpoint();
            for i in 0..3 {
                assert!((a[i] - e[i]).abs() < 1e-8, "{i}: {} vs {}", a[i], e[i]);
            }
        }
    }

    #[test]
    fn z_axis_formula() {
        let calc = GCalculus::new(CollapseProfile::sqrt());
        let wall = WallMap::new(calc, 2, 0.6);
        for z in [0.1f64, -0.01, 1e-5] {
            let u = -2.0 * z.abs().ln();
            let want = (-0.6 * u.sqrt() - 0.18).exp() * z;
            assert!((wall.eval(z).unwrap() - want).abs() < 1e-13 * z.abs());
            let ode = wall_map_ode(&CollapseProfile::sqrt(), 2, z, 0.6, 1e-12).unwrap();
            assert!((ode - want).abs() < 1e-9 * z.abs());
        }
    }

    #[test]
    fn wall_derivative_by_differences() {
        let wall = WallMap::new(GCalculus::new(CollapseProfile::linear()), 2, 0.5);
        for z in [0.05, -0.2, 0.55] {
            let h = 1e-7;
            let fd = (wall.eval(z + h).unwrap() - wall.eval(z - h).unwrap()) / (2.0 * h);
            assert!((fd - wall.derivative(z).unwrap()).abs() < 1e-6, "{z} {fd} {}", wall.derivative(z).unwrap());
        }
    }
}
