use std::path::Path;

use anyhow::Result;
use contact_lab_core::bo::{BoConstruction, BoOptions, TargetProfile};

use super::Ctx;
use crate::config::{Kind, Knob, ScenarioConfig, Value};
use crate::export::{point_columns, read_grid_samples};
use crate::report::Relation;

fn target_knobs() -> Vec<Knob> {
    vec![
        Knob::new("n", Kind::Int { min: 1, max: 2 }, Value::Int(1), "half-dimension"),
        Knob::new("target", Kind::Str { choices: &["cube_root", "tent", "zero", "file"] }, Value::Str("cube_root".into()), "target profile F"),
        Knob::new("amplitude", Kind::Float { min: 0.0, max: 0.999 }, Value::Float(0.5), "amplitude of the built-in targets"),
        Knob::new("radius", Kind::Float { min: 1e-3, max: 1.0 }, Value::Float(0.5), "support half-width of the built-in targets"),
        Knob::new("samples_file", Kind::Text, Value::Str(String::new()), "CSV of w1..wd,value rows on a tensor grid (target = file)"),
        Knob::new("m", Kind::Int { min: 1, max: 16 }, Value::Int(4), "number of stages"),
        Knob::new("delta", Kind::Float { min: 1e-3, max: 1.0 }, Value::Float(0.5), "y1 half-width of the construction"),
        Knob::new("stage_grid", Kind::Int { min: 3, max: 257 }, Value::Int(33), "points per axis of the stage verification grids"),
    ]
}

pub fn build_knobs() -> Vec<Knob> {
    target_knobs()
}

pub fn graph_knobs() -> Vec<Knob> {
    let mut k = target_knobs();
    k.extend([
        Knob::new("per_axis", Kind::Int { min: 2, max: 257 }, Value::Int(33), "grid points per axis for the graph-action error"),
        Knob::new("verify_per_axis", Kind::Int { min: 2, max: 65 }, Value::Int(9), "grid points per axis for the Cauchy checks"),
        Knob::new("graph_tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-4), "bound on the graph-action error"),
    ]);
    k
}

pub fn validate(c: &ScenarioConfig) -> Result<(), String> {
    if c.str("target") == "file" && c.str("samples_file").is_empty() {
        return Err("samples_file: required when target = \"file\"".into());
    }
    Ok(())
}

fn target(c: &ScenarioConfig) -> Result<TargetProfile> {
    let dim = 2 * c.usize("n") - 1;
    let (a, r) = (c.float("amplitude"), c.float("radius"));
    Ok(match c.str("target") {
        "cube_root" => TargetProfile::cube_root(dim, a, r)?,
        "tent" => TargetProfile::tent(dim, a, r)?,
        "zero" => TargetProfile::zero(dim),
        _ => {
            let grid = read_grid_samples(Path::new(c.str("samples_file")))?;
            if grid.axes.len() != dim {
                anyhow::bail!("samples file has {} w columns, expected {dim}", grid.axes.len());
            }
            TargetProfile::from_samples(grid)?
        }
    })
}

pub(super) fn construct_with(ctx: &Ctx, n: usize, target: TargetProfile, m: usize, delta: f64, stage_grid: usize) -> Result<BoConstruction> {
    let defaults = BoOptions::default();
    let options = BoOptions { delta, stage_grid, cfg: ctx.integrator(defaults.cfg.clone()), ..defaults };
    Ok(BoConstruction::build(n, target, m, options)?)
}

fn construct(ctx: &Ctx) -> Result<BoConstruction> {
    let c = ctx.cfg;
    construct_with(ctx, c.usize("n"), target(c)?, c.usize("m"), c.float("delta"), c.usize("stage_grid"))
}

pub fn build(ctx: &mut Ctx) -> Result<()> {
    let bo = construct(ctx)?;
    let mut rows = Vec::new();
    for s in &bo.stages {
        ctx.report.verdict(
            format!("stage {}", s.k),
            s.passes(),
            format!("l = {}, x {:.3e} <= {:.3e}, |dH/dz| {:.3e} <= {:.3e}", s.ell, s.x_measured, s.x_bound, s.hz_sup, s.hz_threshold),
        );
        rows.push(vec![
            s.k as f64,
            s.ell,
            s.x_bound,
            s.x_measured,
            s.x_threshold,
            s.hz_sup,
            s.hz_threshold,
            s.support_radius,
            s.support_max_y1,
            s.support_limit,
            s.w_grid as f64,
        ]);
    }
    ctx.table(
        "stages.csv",
        &["k", "ell", "x_bound", "x_measured", "x_threshold", "hz_sup", "hz_threshold", "support_radius", "support_max_y1", "support_limit", "w_grid"],
        &rows,
    )?;
    let w: Vec<Vec<f64>> = bo.schedule.widths.iter().zip(&bo.schedule.sups).enumerate().map(|(k, (w, s))| vec![k as f64, *w, *s]).collect();
    ctx.table("schedule.csv", &["k", "width", "sup_increment"], &w)?;
    ctx.report.note(format!("stage constant C = {:.6e}, target max|F| = {:.4}", bo.c, bo.schedule.target.sup_abs));
    Ok(())
}

pub fn graph(ctx: &mut Ctx) -> Result<()> {
    let bo = construct(ctx)?;
    let c = ctx.cfg;
    let (m, n) = (c.usize("m"), c.usize("n"));
    let mut rows = Vec::new();
    for k in 0..=m {
        let g = bo.graph_action(k, c.usize("per_axis"))?;
        ctx.report.compare(format!("graph action, m = {k}"), g.max_error, Relation::Below, c.float("graph_tol"), format!("{} samples", g.samples));
        rows.push(vec![k as f64, g.max_error, g.samples as f64]);
    }
    ctx.table("graph.csv", &["m", "max_error", "samples"], &rows)?;

    let mut rows = Vec::new();
    for m1 in 1..=m {
        let v = bo.verify(m1, m, c.usize("verify_per_axis"))?;
        ctx.report.compare(format!("Cauchy, m1 = {m1}"), v.sup_distance, Relation::AtMost, v.cauchy_bound, "");
        ctx.report.verdict(
            format!("conformal factors, m1 = {m1}"),
            v.conformal_ok(),
            format!("log f in [{:.4}, {:.4}]", v.log_f_range.0, v.log_f_range.1),
        );
        rows.push(vec![m1 as f64, m as f64, v.sup_distance, v.cauchy_bound, v.tail_max_distance, v.hypersurface_max_y1, v.log_f_range.0, v.log_f_range.1]);
    }
    ctx.table("verify.csv", &["m1", "m2", "sup_distance", "cauchy_bound", "tail_max_distance", "hypersurface_max_y1", "log_f_min", "log_f_max"], &rows)?;

    let pts = bo.image_of_axis(m, c.usize("per_axis"))?;
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.as_slice().to_vec()).collect();
    ctx.table_owned("axis_image.csv", point_columns(n), &rows)?;
    let prof: Vec<Vec<f64>> = bo
        .schedule
        .support
        .grid(c.usize("per_axis"))
        .map(|w| {
            let mut r = w.clone();
            r.extend([bo.schedule.target.eval(&w), bo.schedule.eval(m, &w)]);
            r
        })
        .collect();
    let mut header: Vec<String> = (1..=2 * n - 1).map(|i| format!("w{i}")).collect();
    header.extend(["target".into(), "smoothed".into()]);
    ctx.table_owned("profile.csv", header, &prof)?;
    Ok(())
}
