//! `ψ = ψ₁∘ψ₃⁻¹`: the graph action `ψ₁` of a cube-root target composed with the
//! inverse of a fourinf collapse flow `ψ₃`, on the line `Λ = {x = y = 0}` and on
//! small boxes at the origin. Boundedness is reported, not asserted.

use std::sync::Arc;

use anyhow::Result;
use contact_lab_core::bo::TargetProfile;
use contact_lab_core::collapse::{boundedness_diagnostics, collapse_config, Preset};
use contact_lab_core::field::FieldRef;
use contact_lab_core::flow::FlowMap;
use contact_lab_core::pullback::{Composite, DiffeoSample, FactorSource, PointMap};
use contact_lab_core::AmbientSpace;

use super::Ctx;
use crate::config::{Kind, Knob, Value};
use crate::report::Relation;

pub fn knobs() -> Vec<Knob> {
    vec![
        Knob::new("t", Kind::Float { min: 1e-6, max: 10.0 }, Value::Float(1.0), "collapse flow time"),
        Knob::new("amplitude", Kind::Float { min: 0.0, max: 0.999 }, Value::Float(0.5), "cube-root target amplitude"),
        Knob::new("radius", Kind::Float { min: 1e-3, max: 1.0 }, Value::Float(0.5), "cube-root target support half-width"),
        Knob::new("m", Kind::Int { min: 1, max: 16 }, Value::Int(4), "graph-action stages"),
        Knob::new("z_min", Kind::Float { min: 1e-300, max: 1.0 }, Value::Float(1e-3), "smallest |z| sampled on the line"),
        Knob::new("z_max", Kind::Float { min: 1e-300, max: 1.0 }, Value::Float(3e-2), "largest |z| sampled on the line"),
        Knob::new("line_points", Kind::Int { min: 2, max: 10_000 }, Value::Int(13), "log-spaced |z| values, each with both signs"),
        Knob::new("widths", Kind::FloatList { min: 1e-8, max: 1.0 }, Value::FloatList(vec![0.02, 0.01, 0.005]), "box half-widths at the origin"),
        Knob::new("per_axis", Kind::Int { min: 2, max: 32 }, Value::Int(4), "midpoint nodes per axis (even keeps the origin out)"),
        Knob::new("graph_tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-4), "bound on the distance from the graph of F_m"),
    ]
}

pub fn run(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let m = c.usize("m");
    let target = TargetProfile::cube_root(1, c.float("amplitude"), c.float("radius"))?;
    let bo = super::bo::construct_with(ctx, 1, target, m, 0.5, 33)?;
    let field: FieldRef = Arc::new(Preset::FourInf.field(1));
    let psi3_inv: Arc<dyn PointMap> = Arc::new(FlowMap::new(field, c.float("t"), ctx.integrator(collapse_config())).inverse());
    let psi1 = bo.psi_map(m);
    let psi: Arc<dyn PointMap> = Arc::new(Composite::new(vec![psi3_inv.clone(), psi1]));

    let (a, b, k) = (c.float("z_min").ln(), c.float("z_max").ln(), c.usize("line_points"));
    let (mut off_line, mut graph_err, mut shrink) = (0.0f64, 0.0f64, 0);
    let mut rows = Vec::new();
    for i in 0..k {
        let s = (a + (b - a) * i as f64 / (k - 1) as f64).exp();
        for z in [s, -s] {
            let p = [0.0, 0.0, z];
            let mid = psi3_inv.apply(&p)?;
            let w = mid.point[2];
            off_line = off_line.max(mid.point[0].abs() + mid.point[1].abs());
            shrink += (w.abs() < z.abs()) as usize;
            let img = psi.apply(&p)?;
            let want = [bo.schedule.eval(m, &[w]), 0.0, w];
            graph_err = graph_err.max(img.point.iter().zip(&want).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max));
            rows.push(vec![z, w, img.point[0], img.point[1], img.point[2], img.log_f.unwrap_or(f64::NAN)]);
        }
    }
    ctx.table("line.csv", &["z", "inverse_collapse_z", "x", "y", "image_z", "logf"], &rows)?;
    ctx.report.compare("inverse collapse keeps the line", off_line, Relation::Below, 1e-9, "max |x| + |y| after the inverse collapse");
    ctx.report.compare("inverse collapse expands the line", shrink as f64, Relation::Equal, 0.0, "samples with |g^-1(z)| < |z|");
    ctx.report.compare("image of the line is the graph of F_m", graph_err, Relation::Below, c.float("graph_tol"), format!("{} samples", rows.len()));

    let sample = DiffeoSample::new(AmbientSpace::euclidean(1), psi, 1e-6);
    let rep = boundedness_diagnostics(&sample, &[0.0; 3], c.floats("widths"), c.usize("per_axis"), FactorSource::Reported)?;
    let rows: Vec<Vec<f64>> = rep.rows.iter().map(|r| vec![r.half_width, r.volume.value, r.reference, r.ratio, r.f_inf, r.f_sup]).collect();
    ctx.table("ratios.csv", &["half_width", "volume", "reference", "ratio", "f_inf", "f_sup"], &rows)?;
    let ratios: Vec<String> = rep.ratios().iter().map(|r| format!("{r:.4e}")).collect();
    ctx.report.verdict("volume ratios finite", rep.ratios().iter().all(|r| r.is_finite() && *r > 0.0), format!("[{}]", ratios.join(", ")));
    ctx.report.note(format!(
        "diagnostic: ratios [{}], sup|f| {:.3e} -> {:.3e}",
        ratios.join(", "),
        rep.rows.first().map_or(f64::NAN, |r| r.f_sup),
        rep.rows.last().map_or(f64::NAN, |r| r.f_sup)
    ));
    Ok(())
}
