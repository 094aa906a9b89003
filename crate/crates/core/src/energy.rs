//! Disjunction energies: the isotopy energy `∫ max_W |α(V_t)| dt`, the `β_k`
//! cutoff construction with its `2e^{3M}/k` certificate, and sampled disjointness.
//!
//! All sup-norms are taken over tensor grids; every certificate is "sampled".

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::coords::{AmbientSpace, Cuboid, Point};
use crate::error::{Error, Result};
use crate::field::{CutoffField, FieldRef, ScalarField};
use crate::flow::{integrate_between, FlowMap, FlowStatus, IntegratorConfig};
use crate::pullback::{Composite, DiffeoSample, PointMap};
use crate::smooth::BetaCutoff;
use crate::submanifold::Chart;

/// `Ū ⊂ W` with sampling resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub open: Cuboid,
    pub test: Cuboid,
    /// Grid points per axis for sup-norms and disjointness.
    pub resolution: usize,
    /// Composite Simpson panels in time; rounded up to a multiple of 4.
    pub time_panels: usize,
}

impl Window {
    pub fn new(open: Cuboid, test: Cuboid, resolution: usize, time_panels: usize) -> Result<Self> {
        if !open.strictly_contains_box(&test) {
            return Err(Error::InvalidParameter("test box must lie inside the open window".into()));
        }
        if resolution < 2 || time_panels == 0 {
            return Err(Error::InvalidParameter("resolutions must be positive".into()));
        }
        Ok(Self { open, test, resolution, time_panels })
    }

    fn panels(&self) -> usize {
        self.time_panels.div_ceil(4) * 4
    }

    fn time_nodes(&self) -> Vec<f64> {
        let m = self.panels();
        (0..=m).map(|i| i as f64 / m as f64).collect()
    }
}

fn simpson(values: &[f64]) -> f64 {
    let m = values.len() - 1;
    let h = 1.0 / m as f64;
    let mut s = values[0] + values[m];
    for (i, v) in values.iter().enumerate().take(m).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    UpperBound,
    FunctionalValue,
}

/// Minimum sampled distance between a flowed test grid and samples of `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisjunctionCertificate {
    pub min_distance: f64,
    /// `2 ×` the image cell size (or target spacing) at the cell that comes closest to failing.
    pub margin: f64,
    /// Map evaluations, including refinement.
    pub test_samples: usize,
    pub target_samples: usize,
    pub refined_cells: usize,
    pub valid: bool,
}

#[derive(Clone)]
pub struct EnergyEstimate {
    pub value: f64,
    pub kind: EnergyKind,
    pub witness: Option<FieldRef>,
    pub certificate: Option<DisjunctionCertificate>,
}

impl core::fmt::Debug for EnergyEstimate {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("EnergyEstimate")
            .field("value", &self.value)
            .field("kind", &self.kind)
            .field("certificate", &self.certificate)
            .finish()
    }
}

fn check_support(h: &dyn ScalarField, w: &Window) -> Result<()> {
    if let Some(s) = h.support() {
        if !w.open.contains_box(&s) {
            return Err(Error::SupportViolation { value: f64::NAN });
        }
    }
    for t in [0.0, 0.5, 1.0] {
        for p in w.open.boundary_grid(w.resolution) {
            let v = h.value(t, &p).abs();
            if v > 0.0 {
                return Err(Error::SupportViolation { value: v });
            }
        }
    }
    Ok(())
}

/// `∫₀¹ max_W |H(t, ·)| dt`, optionally reweighted by `|g|` (the energy for the form `gα`).
pub fn isotopy_energy_weighted(
    h: FieldRef,
    w: &Window,
    weight: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<EnergyEstimate> {
    check_support(&*h, w)?;
    let grid: Vec<Vec<f64>> = w.open.grid(w.resolution).collect();
    let sup: Vec<f64> = w
        .time_nodes()
        .iter()
        .map(|&t| {
            grid.iter()
                .map(|p| h.value(t, p).abs() * weight.map_or(1.0, |g| g(p).abs()))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(EnergyEstimate { value: simpson(&sup), kind: EnergyKind::FunctionalValue, witness: Some(h), certificate: None })
}

/// `∫₀¹ max_W |α(V_t)| dt` for the isotopy generated by `H`, where `α(V_t) = H(t, ·)`.
pub fn isotopy_energy(h: FieldRef, w: &Window) -> Result<EnergyEstimate> {
    isotopy_energy_weighted(h, w, None)
}

fn adjacent_spacing(points: &[Vec<f64>], per_axis: usize, dim: usize, space: &AmbientSpace) -> f64 {
    let mut worst = 0.0_f64;
    let stride = |a: usize| per_axis.pow(a as u32);
    for (i, p) in points.iter().enumerate() {
        for a in 0..dim {
            let s = stride(a);
            if (i / s) % per_axis + 1 < per_axis {
                worst = worst.max(space.distance(&Point::from_slice(p), &Point::from_slice(&points[i + s])));
            }
        }
    }
    worst
}

/// Samples `charts` on their domains with `resolution` points per parameter axis.
fn chart_samples(charts: &[&dyn Chart], resolution: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let mut out = Vec::new();
    let mut spacing = 0.0_f64;
    for c in charts {
        let dom = c.domain().ok_or_else(|| Error::InvalidParameter("chart needs a parameter domain".into()))?;
        let params: Vec<Vec<f64>> = dom.grid(resolution).collect();
        let pts: Vec<Vec<f64>> = params.iter().map(|q| c.eval(q)).collect();
        let space = AmbientSpace::euclidean(c.n());
        spacing = spacing.max(adjacent_spacing(&pts, resolution, dom.dim(), &space));
        out.extend(pts);
    }
    Ok((out, spacing))
}

/// Bisection levels allowed below the initial grid in [`disjunction_check`].
pub const REFINE_DEPTH: u32 = 5;
const REFINE_BUDGET: usize = 400_000;
const TARGET_BUDGET: usize = 20_000;

/// Sampled check of `ψ(Ū) ∩ N = ∅` for `N` the union of the chart images.
///
/// `Ū` is cut into `(resolution − 1)^d` cells. A cell passes when every corner image
/// is farther from the samples of `N` than twice the longer of its longest image
/// edge and the target spacing; otherwise it is bisected, up to [`REFINE_DEPTH`]
/// levels. Strongly stretching maps therefore only pay for refinement where needed.
pub fn disjunction_check(map: &DiffeoSample, u: &Cuboid, charts: &[&dyn Chart], resolution: usize) -> Result<DisjunctionCertificate> {
    // chart samples are cheap next to map evaluations, so N is sampled more finely
    let max_d = charts.iter().map(|c| c.param_dim()).max().unwrap_or(1).max(1);
    let mut t_res = 4 * (resolution.max(2) - 1) + 1;
    while t_res > resolution && t_res.pow(max_d as u32) > TARGET_BUDGET {
        t_res -= 1;
    }
    let (targets, t_spacing) = chart_samples(charts, t_res)?;
    let dim = u.dim();
    let cells = resolution.max(2) - 1;
    let fine = (cells as u64) << REFINE_DEPTH;
    let mut cache: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
    let evaluations = core::cell::Cell::new(0usize);
    let mut corner = |idx: &[u64]| -> Result<(Vec<f64>, f64)> {
        if let Some(v) = cache.get(idx) {
            return Ok(v.clone());
        }
        let p: Vec<f64> = (0..dim).map(|a| u.lo[a] + (u.hi[a] - u.lo[a]) * idx[a] as f64 / fine as f64).collect();
        let img = map.apply(&Point::from_vec(p))?;
        let d = targets.iter().map(|b| map.space.distance(&img, &Point::from_slice(b))).fold(f64::INFINITY, f64::min);
        let v = (img.into_vec(), d);
        cache.insert(idx.to_vec(), v.clone());
        evaluations.set(evaluations.get() + 1);
        Ok(v)
    };

    let mut cert = DisjunctionCertificate {
        min_distance: f64::INFINITY,
        margin: 0.0,
        test_samples: 0,
        target_samples: targets.len(),
        refined_cells: 0,
        valid: true,
    };
    let mut slack = f64::INFINITY;
    let mut stack: Vec<(Vec<u64>, u32)> = Vec::new();
    let mut idx = vec![0usize; dim];
    'cells: loop {
        stack.push((idx.iter().map(|&i| (i as u64) << REFINE_DEPTH).collect(), 0));
        while let Some((origin, level)) = stack.pop() {
            let side = 1u64 << (REFINE_DEPTH - level);
            let mut imgs = Vec::with_capacity(1 << dim);
            let mut dmin = f64::INFINITY;
            for mask in 0..(1usize << dim) {
                let c: Vec<u64> = (0..dim).map(|a| origin[a] + if mask >> a & 1 == 1 { side } else { 0 }).collect();
                let (img, d) = corner(&c)?;
                dmin = dmin.min(d);
                imgs.push(img);
            }
            cert.min_distance = cert.min_distance.min(dmin);
            let mut edge = 0.0_f64;
            for mask in 0..(1usize << dim) {
                for a in 0..dim {
                    if mask >> a & 1 == 0 {
                        let e = map.space.distance(&Point::from_slice(&imgs[mask]), &Point::from_slice(&imgs[mask | 1 << a]));
                        edge = edge.max(e);
                    }
                }
            }
            let m = 2.0 * edge.max(t_spacing);
            if dmin > m {
                if dmin - m < slack {
                    slack = dmin - m;
                    cert.margin = m;
                }
                continue;
            }
            let hopeless = !cert.valid || dmin <= 2.0 * t_spacing || level == REFINE_DEPTH || evaluations.get() > REFINE_BUDGET;
            if hopeless {
                // keep scanning without refinement so min_distance covers all of Ū
                if cert.valid {
                    cert.valid = false;
                    cert.margin = m;
                }
                continue;
            }
            cert.refined_cells += 1;
            let half = side / 2;
            for mask in 0..(1usize << dim) {
                let c: Vec<u64> = (0..dim).map(|a| origin[a] + if mask >> a & 1 == 1 { half } else { 0 }).collect();
                stack.push((c, level + 1));
            }
        }
        // next coarse cell
        let mut a = 0;
        loop {
            if a == dim {
                break 'cells;
            }
            idx[a] += 1;
            if idx[a] < cells {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
    cert.test_samples = evaluations.get();
    Ok(cert)
}

/// Outcome of the cutoff construction for one `k`.
#[derive(Debug, Clone)]
pub struct CutoffOutcome {
    pub k: u32,
    pub estimate: EnergyEstimate,
    /// `2e^{3M}/k`.
    pub bound: f64,
    /// Sampled `sup_W |∂H/∂z|`.
    pub m: f64,
    /// Sampled `max |log f_{k,t}|` over grid and time nodes.
    pub max_abs_log_f: f64,
    pub flow_certificate: DisjunctionCertificate,
    pub composite_certificate: DisjunctionCertificate,
}

/// Sampled `sup_W |∂H/∂z|`, on a grid at least four times finer than the window's.
pub fn reeb_derivative_sup(h: &dyn ScalarField, w: &Window) -> f64 {
    let n = h.n();
    let dim = 2 * n + 1;
    let mut per_axis = 4 * (w.resolution - 1) + 1;
    while per_axis > w.resolution && per_axis.pow(dim as u32) > 300_000 {
        per_axis -= 1;
    }
    let mut g = vec![0.0; dim];
    let mut m = 0.0_f64;
    for p in w.open.grid(per_axis) {
        h.gradient(0.0, &p, &mut g);
        m = m.max(g[2 * n].abs());
    }
    m
}

/// Disjoins `Ū` from `C` with `(φ¹_{β_k∘H})⁻¹∘φ¹_H` and measures the energy of
/// its generator `α(V_{k,t}) = (1/f_{k,t})(H − β_k∘H)∘φ^t_{β_k∘H}`.
pub fn cutoff_disjunction(
    h: FieldRef,
    c: &dyn Chart,
    w: &Window,
    k: u32,
    cfg: &IntegratorConfig,
    tol: f64,
) -> Result<CutoffOutcome> {
    let n = h.n();
    let space = AmbientSpace::euclidean(n);
    check_support(&*h, w)?;
    let (c_pts, _) = chart_samples(&[c], w.resolution)?;
    let worst = c_pts.iter().map(|p| h.value(0.0, p).abs()).fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::Precondition(alloc::format!("H does not vanish on C (max |H| = {worst:e})")));
    }

    let fd = DiffeoSample::default_step(&w.open);
    let phi_h = FlowMap::new(h.clone(), 1.0, cfg.clone());
    let flow_map = DiffeoSample::new(space.clone(), Arc::new(phi_h.clone()), fd);
    let flow_certificate = disjunction_check(&flow_map, &w.test, &[c], w.resolution)?;
    if !flow_certificate.valid {
        return Err(Error::DisjunctionFailed { min_distance: flow_certificate.min_distance, margin: flow_certificate.margin });
    }

    let beta = BetaCutoff::new(k);
    let bh: FieldRef = Arc::new(CutoffField { inner: h.clone(), beta });
    let nodes = w.time_nodes();
    let mut sup = vec![0.0_f64; nodes.len()];
    let mut max_abs_log_f = 0.0_f64;
    let support = h.support();
    for p0 in w.open.grid(w.resolution) {
        if support.as_ref().is_some_and(|s| !s.contains(&p0)) {
            continue;
        }
        let mut p = Point::from_slice(&p0);
        let mut log_f = 0.0;
        for (i, &t) in nodes.iter().enumerate() {
            if i > 0 {
                let tr = integrate_between(&*bh, &p, nodes[i - 1], t, cfg)?;
                if tr.status != FlowStatus::Completed {
                    return Err(Error::Truncated("cutoff flow left its domain"));
                }
                log_f += tr.log_factor();
                p = tr.endpoint().clone();
            }
            let hv = h.value(t, p.as_slice());
            let gen = (hv - beta.eval(hv)).abs() / log_f.exp();
            sup[i] = sup[i].max(gen);
            max_abs_log_f = max_abs_log_f.max(log_f.abs());
        }
    }
    let value = simpson(&sup);

    let composite: Arc<dyn PointMap> = Arc::new(Composite::new(vec![
        Arc::new(phi_h) as Arc<dyn PointMap>,
        Arc::new(FlowMap::new(bh.clone(), 1.0, cfg.clone()).inverse()),
    ]));
    let comp_map = DiffeoSample::new(space, composite, fd);
    let composite_certificate = disjunction_check(&comp_map, &w.test, &[c], w.resolution)?;
    if !composite_certificate.valid {
        return Err(Error::DisjunctionFailed {
            min_distance: composite_certificate.min_distance,
            margin: composite_certificate.margin,
        });
    }

    let m = reeb_derivative_sup(&*h, w);
    Ok(CutoffOutcome {
        k,
        estimate: EnergyEstimate {
            value,
            kind: EnergyKind::UpperBound,
            witness: Some(bh),
            certificate: Some(composite_certificate),
        },
        bound: 2.0 * (3.0 * m).exp() / k as f64,
        m,
        max_abs_log_f,
        flow_certificate,
        composite_certificate,
    })
}

/// The standard model in `ℝ³`: `C` is the `z`-axis, `H = amplitude · b_x(x)b_y(y)b_z(z) · y`
/// with even plateau bumps, `W` the box of the bump edges padded by 5% and `Ū` a small cube
/// around the origin.
pub mod model {
    use super::*;
    use crate::field::FnField;
    use crate::smooth::smooth_step_d;
    use crate::submanifold::FnChart;

    /// Even bump equal to 1 on `[−plateau, plateau]` and vanishing off `(−edge, edge)`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Bump {
        pub plateau: f64,
        pub edge: f64,
    }

    impl Bump {
        pub fn eval(&self, s: f64) -> (f64, f64) {
            let w = self.edge - self.plateau;
            let (v, d) = smooth_step_d((self.edge - s.abs()) / w);
            (v, -s.signum() * d / w)
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Model {
        pub amplitude: f64,
        pub bumps: [Bump; 3],
        pub test_half_width: f64,
    }

    impl Default for Model {
        /// `H` is conserved where `∂H/∂z = 0`; with `|H| < 1/16` on `Ū` the flows of `H`
        /// and `β_k∘H` agree there for every `k ≤ 16`. The long `y` and `z` ramps keep
        /// `∂H/∂z` small, so the factors `f_{k,t}` stay close to 1.
        fn default() -> Self {
            Self {
                amplitude: 1.0,
                bumps: [Bump { plateau: 0.7, edge: 0.95 }, Bump { plateau: 3.0, edge: 3.8 }, Bump { plateau: 1.0, edge: 4.0 }],
                test_half_width: 0.05,
            }
        }
    }

    impl Model {
        pub fn window(&self, resolution: usize, time_panels: usize) -> Result<Window> {
            let hi: Vec<f64> = self.bumps.iter().map(|b| 1.05 * b.edge).collect();
            let lo: Vec<f64> = hi.iter().map(|v| -v).collect();
            Window::new(Cuboid::new(lo, hi)?, Cuboid::centered(&[0.0; 3], self.test_half_width), resolution, time_panels)
        }

        pub fn hamiltonian(&self) -> FieldRef {
            let m = *self;
            let supp = Cuboid::new(m.bumps.iter().map(|b| -b.edge).collect(), m.bumps.iter().map(|b| b.edge).collect())
                .expect("bump edges are positive");
            let a = m.amplitude;
            Arc::new(
                FnField::new(1, move |_, p| a * m.bumps[0].eval(p[0]).0 * m.bumps[1].eval(p[1]).0 * m.bumps[2].eval(p[2]).0 * p[1])
                    .with_gradient(move |_, p, g| {
                        let (bx, dbx) = m.bumps[0].eval(p[0]);
                        let (by, dby) = m.bumps[1].eval(p[1]);
                        let (bz, dbz) = m.bumps[2].eval(p[2]);
                        g[0] = a * dbx * by * bz * p[1];
                        g[1] = a * bx * bz * (dby * p[1] + by);
                        g[2] = a * bx * by * dbz * p[1];
                    })
                    .with_support(supp),
            )
        }

        /// `C = {x = y = 0}` over the `z`-range of the window.
        pub fn z_axis(&self) -> FnChart {
            FnChart::new(1, 1, |q| vec![0.0, 0.0, q[0]])
                .with_jacobian(|_| vec![vec![0.0, 0.0, 1.0]])
                .with_domain(Cuboid::centered(&[0.0], 1.05 * self.bumps[2].edge))
        }
    }
}
