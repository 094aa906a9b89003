//! Inductive choice of the stage parameters `ℓ_k`, the composites
//! `ψ_m = φ¹_{H_{mℓ_m}} ∘ ⋯ ∘ φ¹_{H_{1ℓ_1}}`, and their verification.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::bumps::BumpPair;
use super::schedule::{mollify_sequence, ScheduleOptions, SmoothingSchedule};
use super::stage::{from_u_coords, StageField};
use super::target::TargetProfile;
use crate::coords::{AmbientSpace, Cuboid, Point};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flow::{FlowMap, IntegratorConfig};
use crate::pullback::{Composite, DiffeoSample, Identity, PointMap};

#[derive(Debug, Clone, PartialEq)]
pub struct BoOptions {
    pub delta: f64,
    pub schedule: ScheduleOptions,
    /// Points per axis of the stage verification grids.
    pub stage_grid: usize,
    /// Points per axis on the faces of each stage support box for the image-support check.
    pub support_samples: usize,
    /// Give up once `ℓ` exceeds `2^ell_budget_log2`.
    pub ell_budget_log2: u32,
    pub cfg: IntegratorConfig,
}

impl Default for BoOptions {
    fn default() -> Self {
        Self {
            delta: 0.5,
            schedule: ScheduleOptions::default(),
            stage_grid: 33,
            support_samples: 5,
            ell_budget_log2: 60,
            cfg: IntegratorConfig::rk45(1e-10, 1e-12),
        }
    }
}

/// Recorded outcome of the choice of `ℓ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageParams {
    pub k: usize,
    pub ell: f64,
    /// Certified bound on `max‖X_{H_{kℓ}}‖` over the verification grid (products of factor sups).
    pub x_bound: f64,
    /// `max‖X_{H_{kℓ}}‖` evaluated directly on the tensor grid.
    pub x_measured: f64,
    pub x_threshold: f64,
    /// `max|∂H_{kℓ}/∂z|` on the grid.
    pub hz_sup: f64,
    pub hz_threshold: f64,
    /// `δ/ℓ`.
    pub support_radius: f64,
    /// Largest `|y₁|` of the pulled-back support samples, against the limit `δ/k`.
    pub support_max_y1: f64,
    pub support_limit: f64,
    pub support_samples: usize,
    /// Points per axis of the `w`-grid used for the factor sups.
    pub w_grid: usize,
}

impl StageParams {
    pub fn passes(&self) -> bool {
        self.x_bound < self.x_threshold && self.hz_sup < self.hz_threshold && self.support_max_y1 < self.support_limit
    }
}

/// Sups over the `w`-grid of `|G_k|`, `|∂G_k/∂z|` and `‖V_{G_k}‖`.
#[derive(Debug, Clone, Copy)]
struct IncrementSups {
    g: f64,
    gz: f64,
    vg: f64,
    grid: usize,
}

#[derive(Clone)]
pub struct BoConstruction {
    pub n: usize,
    pub schedule: Arc<SmoothingSchedule>,
    pub bumps: BumpPair,
    /// `C` in `max‖X_{H_{kℓ_k}}‖ < C·2^{−k}`, frozen once from `(u, v)`.
    pub c: f64,
    pub options: BoOptions,
    pub stages: Vec<StageParams>,
    pub fields: Vec<Arc<StageField>>,
}

impl BoConstruction {
    /// Builds the schedule and selects `ℓ_1, …, ℓ_m`.
    pub fn build(n: usize, target: TargetProfile, m: usize, options: BoOptions) -> Result<Self> {
        let mut c = Self::prepare(n, target, m, options)?;
        for k in 1..=m {
            let p = c.select_ell(k)?;
            c.push_stage(p);
        }
        Ok(c)
    }

    /// Schedule and bump pair without any stage chosen.
    pub fn prepare(n: usize, target: TargetProfile, m: usize, options: BoOptions) -> Result<Self> {
        if n == 0 || target.dim() != 2 * n - 1 {
            return Err(Error::DimensionMismatch { expected: 2 * n.max(1) - 1, found: target.dim() });
        }
        let schedule = Arc::new(mollify_sequence(target, m, options.schedule)?);
        let top = schedule.sups.iter().copied().fold(0.0, f64::max);
        let eps = (1.0 - top).clamp(1e-3, 0.5);
        let bumps = BumpPair::new(eps, options.delta)?;
        let c = bumps.stage_constant();
        Ok(Self { n, schedule, bumps, c, options, stages: Vec::new(), fields: Vec::new() })
    }

    pub fn push_stage(&mut self, p: StageParams) {
        self.fields.push(Arc::new(StageField::new(self.n, p.k, p.ell, self.schedule.clone(), self.bumps)));
        self.stages.push(p);
    }

    pub fn space(&self) -> AmbientSpace {
        AmbientSpace::euclidean(self.n)
    }

    fn increment_sups(&self, k: usize) -> IncrementSups {
        let d = 2 * self.n - 1;
        let grid = if d == 1 { self.schedule.grids[k - 1].max(self.options.stage_grid) } else { self.options.stage_grid };
        let m = self.n - 1;
        let (mut g, mut gz, mut vg) = (0.0f64, 0.0f64, 0.0f64);
        let mut dg = vec![0.0; d];
        for w in self.schedule.support.grid(grid) {
            let gv = self.schedule.increment_grad(k, &w, &mut dg);
            g = g.max(gv.abs());
            gz = gz.max(dg[d - 1].abs());
            let mut s = 0.0;
            let mut zc = gv;
            for j in 0..m {
                s += dg[m + j] * dg[m + j];
                let yc = dg[j] + w[m + j] * dg[d - 1];
                s += yc * yc;
                zc -= w[m + j] * dg[m + j];
            }
            vg = vg.max((s + zc * zc).sqrt());
        }
        IncrementSups { g, gz, vg, grid }
    }

    /// Direct `max‖X‖` over `x₁ × (ℓy₁) × w` tensor grids.
    fn measured_speed(&self, field: &StageField) -> f64 {
        let n = self.n;
        let q = self.options.stage_grid.max(2);
        let wq = if n == 1 { q } else { q.min(9) };
        let reach = self.bumps.v_reach();
        let mut best: f64 = 0.0;
        let wpts: Vec<Vec<f64>> = self.schedule.support.grid(wq).collect();
        for i in 0..q {
            let x1 = -1.0 + 2.0 * i as f64 / (q - 1) as f64;
            if self.bumps.u(x1) == (0.0, 0.0) {
                continue;
            }
            for j in 0..q {
                let y1 = (-reach + 2.0 * reach * j as f64 / (q - 1) as f64) / field.ell;
                for w in &wpts {
                    let x = field.generic_form(&from_u_coords(n, x1, y1, w));
                    best = best.max(x.iter().map(|c| c * c).sum::<f64>().sqrt());
                }
            }
        }
        best
    }

    /// Doubles `ℓ` from 1 until the speed, Reeb-derivative and image-support conditions
    /// hold on the verification grids. Stages `1..k−1` must already be fixed.
    pub fn select_ell(&self, k: usize) -> Result<StageParams> {
        if k == 0 || k > self.schedule.k_max() || self.stages.len() != k - 1 {
            return Err(Error::Precondition(alloc::format!("stage {k} needs stages 1..{} fixed first", k.saturating_sub(1))));
        }
        let sups = self.increment_sups(k);
        let (su, sdu, sv, sdv) = self.bumps.sups(20_000);
        let sy = self.bumps.v_reach();
        let x_threshold = self.c * 0.5f64.powi(k as i32);
        let hz_threshold = 1.0 / (k * k) as f64;
        let support_limit = self.options.delta / k as f64;
        let mut ell = 1.0f64;
        loop {
            if ell > 2f64.powi(self.options.ell_budget_log2 as i32) {
                return Err(Error::BudgetExhausted(alloc::format!("no admissible ℓ for stage {k}")));
            }
            let x_bound = su * sdv * sups.g
                + sv / ell * (sdu * sups.g + su * sy / ell * sups.gz)
                + su * sv / ell * sups.vg
                + su * sdv * sy / ell * sups.g;
            let hz_sup = su * sv / ell * sups.gz;
            if x_bound < x_threshold && hz_sup < hz_threshold {
                let field = StageField::new(self.n, k, ell, self.schedule.clone(), self.bumps);
                let (support_max_y1, support_samples) = self.support_check(&field)?;
                if support_max_y1 < support_limit {
                    return Ok(StageParams {
                        k,
                        ell,
                        x_bound,
                        x_measured: self.measured_speed(&field),
                        x_threshold,
                        hz_sup,
                        hz_threshold,
                        support_radius: self.options.delta / ell,
                        support_max_y1,
                        support_limit,
                        support_samples,
                        w_grid: sups.grid,
                    });
                }
            }
            ell *= 2.0;
        }
    }

    /// Re-verifies a candidate `ℓ` for stage `k` against the fixed earlier stages.
    pub fn check_ell(&self, k: usize, ell: f64) -> Result<bool> {
        let sups = self.increment_sups(k);
        let (su, sdu, sv, sdv) = self.bumps.sups(20_000);
        let sy = self.bumps.v_reach();
        let x_bound = su * sdv * sups.g + sv / ell * (sdu * sups.g + su * sy / ell * sups.gz) + su * sv / ell * sups.vg + su * sdv * sy / ell * sups.g;
        let hz = su * sv / ell * sups.gz;
        let field = StageField::new(self.n, k, ell, self.schedule.clone(), self.bumps);
        let (y, _) = self.support_check(&field)?;
        Ok(x_bound < self.c * 0.5f64.powi(k as i32) && hz < 1.0 / (k * k) as f64 && y < self.options.delta / k as f64)
    }

    /// Pulls the faces of the stage support box back through `ψ_{k−1}` and returns the
    /// largest `|y₁|` reached with the number of samples.
    fn support_check(&self, field: &StageField) -> Result<(f64, usize)> {
        let inv = self.psi_inverse_map(field.k - 1);
        let b = field.support_box();
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for p in b.boundary_grid(self.options.support_samples.max(2)) {
            let q = inv.apply(&p)?;
            worst = worst.max(q.point[self.n].abs());
            count += 1;
        }
        Ok((worst, count))
    }

    fn flow(&self, k: usize) -> FlowMap {
        FlowMap::new(self.fields[k - 1].clone() as Arc<dyn ScalarField>, 1.0, self.options.cfg.clone())
    }

    pub fn psi_map(&self, m: usize) -> Arc<dyn PointMap> {
        if m == 0 {
            return Arc::new(Identity(self.n));
        }
        Arc::new(Composite::new((1..=m).map(|k| Arc::new(self.flow(k)) as Arc<dyn PointMap>).collect()))
    }

    pub fn psi_inverse_map(&self, m: usize) -> Arc<dyn PointMap> {
        if m == 0 {
            return Arc::new(Identity(self.n));
        }
        Arc::new(Composite::new((1..=m).rev().map(|k| Arc::new(self.flow(k).inverse()) as Arc<dyn PointMap>).collect()))
    }

    /// `ψ_m` as a sampled contactomorphism.
    pub fn psi(&self, m: usize) -> DiffeoSample {
        let h = DiffeoSample::default_step(&self.domain());
        DiffeoSample::new(self.space(), self.psi_map(m), h)
    }

    /// `(−1, 1) × (−δ, δ) × K` shrunk slightly to stay inside the open domain.
    pub fn domain(&self) -> Cuboid {
        let k = &self.schedule.support;
        let d = self.options.delta;
        Cuboid { lo: from_u_coords(self.n, -0.95, -0.95 * d, &k.lo), hi: from_u_coords(self.n, 0.95, 0.95 * d, &k.hi) }
    }

    /// `max_w ‖ψ_m(0, 0, w) − (F_m(w), 0, w)‖` over a `per_axis` grid on `K`.
    pub fn graph_action(&self, m: usize, per_axis: usize) -> Result<GraphAction> {
        let map = self.psi_map(m);
        let mut max_error: f64 = 0.0;
        let mut samples = 0;
        for w in self.schedule.support.grid(per_axis) {
            let p = from_u_coords(self.n, 0.0, 0.0, &w);
            let q = map.apply(&p)?;
            let mut want = p.clone();
            want[0] = self.schedule.eval(m, &w);
            let e = q.point.iter().zip(&want).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            max_error = max_error.max(e);
            samples += 1;
        }
        Ok(GraphAction { m, max_error, samples })
    }

    /// Cauchy, eventual-independence, hypersurface and conformal checks between `ψ_{m1}` and `ψ_{m2}`.
    pub fn verify(&self, m1: usize, m2: usize, per_axis: usize) -> Result<BoVerification> {
        if m1 > m2 || m2 > self.stages.len() {
            return Err(Error::InvalidParameter("verification needs m1 <= m2 <= number of stages".into()));
        }
        let n = self.n;
        let bound = self.c * (m1 + 1..=m2).map(|k| 0.5f64.powi(k as i32)).sum::<f64>();
        let tail_radius = if m1 == 0 { f64::INFINITY } else { self.options.delta / m1 as f64 };
        let mut v = BoVerification {
            m1,
            m2,
            samples: 0,
            sup_distance: 0.0,
            cauchy_bound: bound,
            tail_samples: 0,
            tail_max_distance: 0.0,
            hypersurface_max_y1: 0.0,
            stage_log_f: vec![0.0; m2],
            log_f_range: (0.0, 0.0),
        };
        let flows: Vec<FlowMap> = (1..=m2).map(|k| self.flow(k)).collect();
        for p in self.verification_points(m2, per_axis) {
            let mut cur = p.clone();
            let mut at_m1 = p.clone();
            let mut log_f = 0.0;
            for (i, f) in flows.iter().enumerate() {
                let r = f.apply(&cur)?;
                let l = r.log_f.unwrap_or(0.0);
                v.stage_log_f[i] = v.stage_log_f[i].max(l.abs());
                log_f += l;
                cur = r.point;
                if i + 1 == m1 {
                    at_m1 = cur.clone();
                }
            }
            let d = cur.iter().zip(&at_m1).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            v.samples += 1;
            v.sup_distance = v.sup_distance.max(d);
            if p[n].abs() >= tail_radius {
                v.tail_samples += 1;
                v.tail_max_distance = v.tail_max_distance.max(d);
            }
            if p[n] == 0.0 {
                v.hypersurface_max_y1 = v.hypersurface_max_y1.max(cur[n].abs());
            }
            v.log_f_range = (v.log_f_range.0.min(log_f), v.log_f_range.1.max(log_f));
        }
        Ok(v)
    }

    /// Tensor grid on [`Self::domain`] whose `y₁`-axis is augmented by points inside the
    /// support slab `|y₁| < 0.9δ/ℓ_k` of every stage up to `m`.
    pub fn verification_points(&self, m: usize, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.n;
        let dom = self.domain();
        let q = per_axis.max(2);
        let mut ys: Vec<f64> = (0..q).map(|j| dom.lo[n] + (dom.hi[n] - dom.lo[n]) * j as f64 / (q - 1) as f64).collect();
        for s in &self.stages[..m] {
            for c in [0.2, 0.5, 0.8] {
                let y = c * self.bumps.v_reach() / s.ell;
                ys.push(y);
                ys.push(-y);
            }
        }
        let mut reduced = dom.clone();
        reduced.lo.remove(n);
        reduced.hi.remove(n);
        let mut out = Vec::new();
        for p in reduced.grid(q) {
            for &y in &ys {
                let mut r = p.clone();
                r.insert(n, y);
                out.push(r);
            }
        }
        out
    }

    /// Image of `{x₁ = y₁ = 0}` under `ψ_m` sampled over `w`: points `(x₁, w)`.
    pub fn image_of_axis(&self, m: usize, per_axis: usize) -> Result<Vec<Point>> {
        let map = self.psi_map(m);
        self.schedule
            .support
            .grid(per_axis)
            .map(|w| map.apply(&from_u_coords(self.n, 0.0, 0.0, &w)).map(|r| Point::from_vec(r.point)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphAction {
    pub m: usize,
    pub max_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoVerification {
    pub m1: usize,
    pub m2: usize,
    pub samples: usize,
    /// `max ‖ψ_{m2} − ψ_{m1}‖` on the grid.
    pub sup_distance: f64,
    /// `C·Σ_{k=m1+1}^{m2} 2^{−k}`.
    pub cauchy_bound: f64,
    /// Samples with `|y₁| ≥ δ/m1`, where `ψ_m` must no longer change.
    pub tail_samples: usize,
    pub tail_max_distance: f64,
    /// Largest `|y₁|` in the image of samples on `{y₁ = 0}`.
    pub hypersurface_max_y1: f64,
    /// Per-stage `max|log f|` over the samples.
    pub stage_log_f: Vec<f64>,
    /// Range of `log f` of `ψ_{m2}`.
    pub log_f_range: (f64, f64),
}

impl BoVerification {
    pub fn cauchy_ok(&self) -> bool {
        self.sup_distance <= self.cauchy_bound
    }

    /// Every stage factor within `e^{±1/k²}` and the total within `e^{±π²/6}`.
    pub fn conformal_ok(&self) -> bool {
        let b = core::f64::consts::PI * core::f64::consts::PI / 6.0;
        self.stage_log_f.iter().enumerate().all(|(i, l)| *l < 1.0 / ((i + 1) * (i + 1)) as f64)
            && self.log_f_range.0 >= -b
            && self.log_f_range.1 <= b
    }
}
