use anyhow::Result;
use contact_lab_core::energy::cutoff_disjunction;
use contact_lab_core::energy::model::Model;
use contact_lab_core::flow::IntegratorConfig;

use super::Ctx;
use crate::config::{Kind, Knob, Value};
use crate::report::Relation;

pub fn knobs() -> Vec<Knob> {
    let d = Model::default();
    vec![
        Knob::new("k_list", Kind::IntList { min: 1, max: 1024 }, Value::IntList(vec![1, 2, 4, 8, 16]), "cutoff sharpness values"),
        Knob::new("amplitude", Kind::Float { min: 1e-6, max: 100.0 }, Value::Float(d.amplitude), "Hamiltonian amplitude"),
        Knob::new("test_half_width", Kind::Float { min: 1e-4, max: 0.5 }, Value::Float(d.test_half_width), "half-width of the test box"),
        Knob::new("resolution", Kind::Int { min: 3, max: 33 }, Value::Int(9), "grid points per axis"),
        Knob::new("time_panels", Kind::Int { min: 4, max: 1024 }, Value::Int(8), "Simpson panels in time"),
        Knob::new("disjunction_tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-12), "tolerance for H vanishing on the z-axis"),
    ]
}

pub fn run(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let model = Model { amplitude: c.float("amplitude"), test_half_width: c.float("test_half_width"), ..Model::default() };
    let w = model.window(c.usize("resolution"), c.usize("time_panels"))?;
    let h = model.hamiltonian();
    let axis = model.z_axis();
    let cfg = ctx.integrator(IntegratorConfig::default());
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &k in c.ints("k_list") {
        let o = cutoff_disjunction(h.clone(), &axis, &w, k as u32, &cfg, c.float("disjunction_tol"))?;
        let rep = &mut ctx.report;
        rep.compare(format!("k = {k}: energy bound"), o.estimate.value, Relation::AtMost, o.bound, "2e^(3M)/k");
        rep.compare(format!("k = {k}: max |log f|"), o.max_abs_log_f, Relation::AtMost, 3.0 * o.m, "3M");
        rep.verdict(
            format!("k = {k}: sampled disjunction"),
            o.flow_certificate.valid && o.composite_certificate.valid,
            format!(
                "flow min distance {:.3e} (margin {:.3e}), composite {:.3e} (margin {:.3e})",
                o.flow_certificate.min_distance, o.flow_certificate.margin, o.composite_certificate.min_distance, o.composite_certificate.margin
            ),
        );
        rows.push(vec![
            k as f64,
            o.estimate.value,
            o.bound,
            o.m,
            o.max_abs_log_f,
            o.flow_certificate.min_distance,
            o.flow_certificate.margin,
            o.composite_certificate.min_distance,
            o.composite_certificate.margin,
        ]);
        values.push((k, o.estimate.value));
    }
    ctx.table(
        "energy.csv",
        &["k", "energy", "bound", "M", "max_abs_log_f", "flow_min_distance", "flow_margin", "composite_min_distance", "composite_margin"],
        &rows,
    )?;
    let mut sorted = values.clone();
    sorted.sort_by_key(|v| v.0);
    let monotone = sorted.windows(2).all(|p| p[0].0 == p[1].0 || p[1].1 < p[0].1);
    ctx.report.verdict("energy decreases in k", monotone, "");
    Ok(())
}
