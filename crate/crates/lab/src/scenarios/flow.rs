use std::sync::Arc;

use anyhow::Result;
use contact_lab_core::field::{FieldRef, Polynomial};
use contact_lab_core::flow::{integrate_flow, FlowMap, IntegratorConfig};
use contact_lab_core::pullback::{pullback_residual, DiffeoSample};
use contact_lab_core::{AmbientSpace, Error, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Ctx;
use crate::config::{Kind, Knob, Value};
use crate::report::Relation;

pub fn knobs() -> Vec<Knob> {
    vec![
        Knob::new("n", Kind::Int { min: 1, max: 3 }, Value::Int(1), "half-dimension"),
        Knob::new("hamiltonian", Kind::Str { choices: &["z", "random"] }, Value::Str("z".into()), "H = z, or a random polynomial"),
        Knob::new("degree", Kind::Int { min: 1, max: 4 }, Value::Int(3), "degree of the random polynomial"),
        Knob::new("scale", Kind::Float { min: 0.0, max: 10.0 }, Value::Float(0.5), "coefficient scale of the random polynomial"),
        Knob::new("t", Kind::Float { min: 0.0, max: 10.0 }, Value::Float(0.5), "flow time"),
        Knob::new("samples", Kind::Int { min: 1, max: 100_000 }, Value::Int(20), "sample points"),
        Knob::new("radius", Kind::Float { min: 1e-6, max: 100.0 }, Value::Float(0.5), "samples lie in [-radius, radius]^(2n+1)"),
        Knob::new("fd_step", Kind::Float { min: 1e-10, max: 1e-1 }, Value::Float(1e-5), "finite-difference step"),
        Knob::new("residual_tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-5), "bound on the pullback residual"),
        Knob::new("factor_tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-4), "bound on the relative factor mismatch"),
        Knob::new("trajectories", Kind::Int { min: 0, max: 100 }, Value::Int(2), "trajectories exported as CSV"),
    ]
}

pub fn run(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let n = c.usize("n");
    let t = c.float("t");
    let r = c.float("radius");
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
    let dilation = c.str("hamiltonian") == "z";
    let h: FieldRef = if dilation {
        Arc::new(Polynomial::coordinate(n, 2 * n))
    } else {
        Arc::new(Polynomial::random(n, c.int("degree") as u32, c.float("scale"), &mut rng))
    };
    let cfg = ctx.integrator(IntegratorConfig::default());
    let space = AmbientSpace::euclidean(n);
    let map = DiffeoSample::new(space, Arc::new(FlowMap::new(h.clone(), t, cfg.clone())), c.float("fd_step"));

    let mut rows = Vec::new();
    let (mut res, mut mismatch, mut dil_err, mut truncated) = (0.0f64, 0.0f64, 0.0f64, 0);
    for i in 0..c.usize("samples") {
        let p = Point::from_vec((0..2 * n + 1).map(|_| rng.gen_range(-r..r)).collect());
        let tr = integrate_flow(&*h, &p, t, &cfg.clone().recording())?;
        if !tr.is_complete() {
            truncated += 1;
            continue;
        }
        if i < c.usize("trajectories") {
            ctx.trajectory(&format!("trajectory_{i:03}.csv"), n, &tr)?;
        }
        let f = tr.log_factor().exp();
        let pr = match pullback_residual(&map, &p) {
            Ok(pr) => pr,
            Err(Error::Truncated(_)) | Err(Error::OutsideDomain) => {
                truncated += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        res = res.max(pr.residual);
        mismatch = mismatch.max((pr.f_hat - f).abs() / f.abs());
        if dilation {
            dil_err = dil_err.max((f - t.exp()).abs() / t.exp());
        }
        let mut row = p.as_slice().to_vec();
        row.extend([pr.residual, pr.f_hat, f]);
        rows.push(row);
    }
    let mut header = crate::export::point_columns(n);
    header.extend(["residual".into(), "f_hat".into(), "f".into()]);
    ctx.table_owned("samples.csv", header, &rows)?;

    let rep = &mut ctx.report;
    rep.compare("pullback residual", res, Relation::Below, c.float("residual_tol"), format!("{} samples", rows.len()));
    rep.compare("conformal factor mismatch", mismatch, Relation::Below, c.float("factor_tol"), "max |f_hat - f| / |f|");
    if dilation {
        rep.compare("H = z gives f = e^t", dil_err, Relation::Below, 1e-8, "max |f - e^t| / e^t");
    }
    rep.compare("truncated trajectories", truncated as f64, Relation::Equal, 0.0, "");
    Ok(())
}
