use std::sync::Arc;

use anyhow::Result;
use contact_lab_core::collapse::{
    boundedness_diagnostics, build_approximant, collapse_config, integrate_collapse, square_closed_form, tangency_order, wall_log_ode,
    CollapseMap, GCalculus, Preset, WallMap,
};
use contact_lab_core::flow::IntegratorConfig;
use contact_lab_core::pullback::{DiffeoSample, FactorSource, PointMap};
use contact_lab_core::{AmbientSpace, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Ctx;
use crate::config::{Kind, Knob, ScenarioConfig, Value};
use crate::report::Relation;

const PRESETS: &[&str] = &["square", "fourfinite", "fourinf"];

fn preset_knob(default: &str) -> Knob {
    Knob::new("preset", Kind::Str { choices: PRESETS }, Value::Str(default.into()), "profile and weight preset")
}

fn preset(c: &ScenarioConfig) -> Preset {
    Preset::parse(c.str("preset")).expect("validated preset")
}

/// A point at distance about `e^s` from the zero section, `s` uniform in `log_r`.
fn near_zero_section(rng: &mut ChaCha8Rng, n: usize, log_r: (f64, f64)) -> Point {
    let r = rng.gen_range(log_r.0..log_r.1).exp();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|_| r * rng.gen_range(-1.0..1.0)).collect();
    Point::new(&x, &y, r * rng.gen_range(-1.0..1.0))
}

fn log_range(c: &ScenarioConfig) -> (f64, f64) {
    (c.float("log_r_min"), c.float("log_r_max"))
}

fn log_range_knobs(lo: f64, hi: f64) -> [Knob; 2] {
    [
        Knob::new("log_r_min", Kind::Float { min: -30.0, max: 0.0 }, Value::Float(lo), "samples have log distance above this"),
        Knob::new("log_r_max", Kind::Float { min: -30.0, max: 0.0 }, Value::Float(hi), "and below this"),
    ]
}

pub fn square_knobs() -> Vec<Knob> {
    let mut k = vec![
        Knob::new("n", Kind::Int { min: 1, max: 3 }, Value::Int(1), "half-dimension"),
        Knob::new("t_list", Kind::FloatList { min: 0.0, max: 10.0 }, Value::FloatList(vec![0.3, 0.7, 1.2]), "flow times"),
        Knob::new("samples", Kind::Int { min: 1, max: 100_000 }, Value::Int(100), "start points"),
        Knob::new("tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-6), "bound on the closed-form error"),
        Knob::new("rtol", Kind::Float { min: 1e-14, max: 1e-3 }, Value::Float(1e-12), "integrator relative tolerance"),
        Knob::new("trajectories", Kind::Int { min: 0, max: 100 }, Value::Int(2), "trajectories exported as CSV"),
    ];
    k.extend(log_range_knobs(-6.0, -0.5));
    k
}

pub fn square(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let n = c.usize("n");
    let field = Preset::Square.field(n);
    let calc = GCalculus::new(Preset::Square.profile());
    let cfg = ctx.integrator(IntegratorConfig::rk45(c.float("rtol"), 1e-300));
    let (d_y, d_z) = (field.weight.d_y, field.weight.d_z);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
    let (mut worst, mut slack) = (0.0f64, f64::INFINITY);
    let (mut closed_rows, mut env_rows) = (Vec::new(), Vec::new());
    for i in 0..c.usize("samples") {
        let p = near_zero_section(&mut rng, n, log_range(c));
        for &t in c.floats("t_list") {
            let want = square_closed_form(&calc, &p, t)?;
            let tr = integrate_collapse(&field, &p, t, &cfg.clone().recording())?;
            if i < c.usize("trajectories") {
                ctx.trajectory(&format!("trajectory_{i:03}_t{t}.csv"), n, &tr.trajectory)?;
            }
            let got = tr.trajectory.endpoint();
            let err = want.as_slice().iter().zip(got.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            closed_rows.push(vec![i as f64, t, err]);
            let u = tr.neg_log_rho[0];
            if u > Preset::Square.profile().u0 {
                let (lo, hi) = calc.bihari_envelope(u, t, d_y, d_z)?;
                let end = *tr.neg_log_rho.last().unwrap();
                slack = slack.min((end - lo * (1.0 - 1e-6)).min(hi * (1.0 + 1e-6) - end) / end);
                env_rows.push(vec![t, u, end, lo, hi]);
            }
        }
    }
    ctx.table("closed_form.csv", &["sample", "t", "max_coordinate_error"], &closed_rows)?;
    ctx.table("envelope.csv", &["t", "u_start", "u_end", "lower", "upper"], &env_rows)?;
    ctx.report.compare("closed form error", worst, Relation::Below, c.float("tol"), format!("{} evaluations", closed_rows.len()));
    ctx.report.compare("envelope slack", slack, Relation::AtLeast, 0.0, format!("{} envelope rows, relative", env_rows.len()));
    Ok(())
}

pub fn wall_knobs() -> Vec<Knob> {
    vec![
        preset_knob("fourfinite"),
        Knob::new("t", Kind::Float { min: 1e-6, max: 10.0 }, Value::Float(0.5 * 3f64.ln()), "flow time"),
        Knob::new("z_min", Kind::Float { min: 1e-300, max: 1.0 }, Value::Float(1e-2), "smallest |z| in the table"),
        Knob::new("z_max", Kind::Float { min: 1e-300, max: 1.0 }, Value::Float(1e-1), "largest |z| in the table"),
        Knob::new("table_points", Kind::Int { min: 2, max: 10_000 }, Value::Int(21), "log-spaced |z| values, each with both signs"),
        Knob::new("ladder", Kind::FloatList { min: 1e-300, max: 1.0 }, Value::FloatList(vec![1e-1, 1e-2, 1e-3, 1e-4]), "tangency windows"),
        Knob::new("window_samples", Kind::Int { min: 2, max: 1000 }, Value::Int(12), "samples per window and sign"),
        Knob::new("rtol", Kind::Float { min: 1e-14, max: 1e-3 }, Value::Float(1e-12), "ODE relative tolerance"),
        Knob::new("tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-6), "relative agreement of closed form, ODE and flow"),
    ]
}

pub fn wall(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let p = preset(c);
    let t = c.float("t");
    let prof = p.profile();
    let d_z = p.weight(1).d_z;
    let wall = WallMap::new(GCalculus::new(prof.clone()), d_z, t);
    let field = p.field(1);
    let rtol = c.float("rtol");
    let cfg = ctx.integrator(IntegratorConfig::rk45(rtol, 1e-300));
    let tol = c.float("tol");
    let (a, b, k) = (c.float("z_min").ln(), c.float("z_max").ln(), c.usize("table_points"));
    let exponent = (d_z as f64 * t).exp();

    let (mut ode_err, mut flow_err, mut flowed) = (0.0f64, 0.0f64, 0);
    let mut rows = Vec::new();
    for i in 0..k {
        let s = (a + (b - a) * i as f64 / (k - 1) as f64).exp();
        for z in [s, -s] {
            let closed = wall.log_abs(z)?;
            let ode = wall_log_ode(&prof, d_z, z, t, rtol)?;
            ode_err = ode_err.max((closed - ode).abs() / closed.abs());
            let tr = integrate_collapse(&field, &Point::new(&[0.25], &[0.0], z), t, &cfg)?.trajectory;
            let flow = if tr.is_complete() {
                let e = tr.endpoint();
                let g = z.signum() * closed.exp();
                flow_err = flow_err.max((e.z() - g).abs() / g.abs() + e.y()[0].abs() + (e.x()[0] - 0.25).abs());
                flowed += 1;
                e.z()
            } else {
                f64::NAN
            };
            let power = z.signum() * z.abs().powf(exponent);
            rows.push(vec![z, z.signum() * closed.exp(), z.signum() * ode.exp(), flow, closed, power]);
        }
    }
    ctx.table("wall.csv", &["z", "g_closed", "g_ode", "g_flow", "log_abs_g", "power_e2t"], &rows)?;
    ctx.report.compare("closed form vs wall ODE", ode_err, Relation::Below, tol, "relative, in log|g|");
    if flowed > 0 {
        ctx.report.compare("closed form vs integrated flow", flow_err, Relation::Below, 10.0 * tol, format!("{flowed} flows reached t"));
    }
    ctx.report.note(format!("{} of {} flows stopped at the singular floor", rows.len() - flowed, rows.len()));

    let rep = tangency_order(|z| wall.log_abs(z), c.floats("ladder"), c.usize("window_samples"))?;
    let srows: Vec<Vec<f64>> = rep.windows.iter().map(|w| vec![w.width, w.slope]).collect();
    ctx.table("slopes.csv", &["window", "slope"], &srows)?;
    let slopes: Vec<String> = rep.windows.iter().map(|w| format!("{:.4e}", w.slope)).collect();
    let detail = format!("slopes [{}]", slopes.join(", "));
    match p {
        Preset::FourFinite => {
            let dev = (rep.final_slope() - exponent).abs() / exponent;
            ctx.report.compare("slope matches e^(2t)", dev, Relation::Below, 0.01, detail);
        }
        Preset::FourInf => ctx.report.verdict("slopes increase as windows shrink", rep.increasing(), detail),
        Preset::Square => {
            let min = rep.windows.iter().map(|w| w.slope).fold(f64::INFINITY, f64::min);
            ctx.report.compare("tangency order at least one", min, Relation::AtLeast, 1.0, detail);
        }
    }
    Ok(())
}

pub fn approximant_knobs() -> Vec<Knob> {
    let mut k = vec![
        preset_knob("square"),
        Knob::new("m_list", Kind::FloatList { min: 0.0, max: 400.0 }, Value::FloatList(vec![6.0, 8.0, 10.0]), "approximant cut depths"),
        Knob::new("t", Kind::Float { min: 1e-6, max: 10.0 }, Value::Float(1.0), "flow time"),
        Knob::new("samples", Kind::Int { min: 1, max: 100_000 }, Value::Int(200), "sample points"),
        Knob::new("agreement_tol", Kind::Float { min: 0.0, max: 1.0 }, Value::Float(1e-7), "agreement where -log rho <= m"),
    ];
    k.extend(log_range_knobs(-9.0, -0.5));
    k
}

pub fn validate_approximants(c: &ScenarioConfig) -> Result<(), String> {
    let u1 = preset(c).profile().u1;
    match c.floats("m_list").iter().find(|&&m| m <= u1) {
        Some(m) => Err(format!("m_list: every m must exceed the glue point {u1} (found {m})")),
        None => Ok(()),
    }
}

pub fn approximants(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let p = preset(c);
    let t = c.float("t");
    let cfg = ctx.integrator(collapse_config());
    let base = CollapseMap::new(Arc::new(p.field(1)), t, cfg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
    let samples: Vec<Point> = (0..c.usize("samples")).map(|_| near_zero_section(&mut rng, 1, log_range(c))).collect();
    let reference = samples.iter().map(|q| base.apply(q.as_slice())).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &m in c.floats("m_list") {
        let st = build_approximant(p.profile(), p.weight(1), m, t, cfg.clone())?;
        let (mut df, mut agree, mut inside) = (0.0f64, 0.0f64, 0);
        for (q, r) in samples.iter().zip(&reference) {
            let a = st.map.apply(q.as_slice())?;
            let f = r.log_f.unwrap_or(f64::NAN).exp();
            let fm = a.log_f.unwrap_or(f64::NAN).exp();
            df = df.max((fm - f).abs());
            if st.agrees_at(q.as_slice()) {
                inside += 1;
                agree = agree.max(a.point.iter().zip(&r.point).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max));
            }
        }
        let bound = st.factor_bound();
        ctx.report.compare(format!("m = {m}: sup |f_m - f|"), df, Relation::AtMost, bound, "e^(tF(m)/2)");
        ctx.report.compare(format!("m = {m}: agreement"), agree, Relation::Below, c.float("agreement_tol"), format!("{inside} samples with -log rho <= m"));
        rows.push(vec![m, st.cut, st.tail, df, bound, agree, inside as f64]);
    }
    ctx.table("approximants.csv", &["m", "cut", "tail", "sup_factor_error", "bound", "agreement", "inside"], &rows)?;
    Ok(())
}

pub fn ratio_knobs() -> Vec<Knob> {
    vec![
        preset_knob("fourinf"),
        Knob::new("t", Kind::Float { min: 1e-6, max: 10.0 }, Value::Float(1.0), "flow time"),
        Knob::new("center", Kind::FloatList { min: -10.0, max: 10.0 }, Value::FloatList(vec![0.5, 0.0, 0.0]), "box center (x, y, z)"),
        Knob::new("widths", Kind::FloatList { min: 1e-8, max: 1.0 }, Value::FloatList(vec![0.1, 0.05, 0.025]), "half-widths, decreasing"),
        Knob::new("per_axis", Kind::Int { min: 1, max: 64 }, Value::Int(6), "midpoint quadrature nodes per axis"),
        Knob::new("factor_source", Kind::Str { choices: &["reported", "pullback"] }, Value::Str("reported".into()), "where |f| comes from"),
    ]
}

pub fn validate_ratios(c: &ScenarioConfig) -> Result<(), String> {
    if c.floats("center").len() != 3 {
        return Err("center: expected three coordinates".into());
    }
    if c.floats("widths").windows(2).any(|w| w[1] >= w[0]) {
        return Err("widths: must strictly decrease".into());
    }
    Ok(())
}

pub fn ratios(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let p = preset(c);
    let map = CollapseMap::new(Arc::new(p.field(1)), c.float("t"), ctx.integrator(collapse_config()));
    let psi = DiffeoSample::new(AmbientSpace::torus(1), Arc::new(map), 1e-6);
    let src = if c.str("factor_source") == "reported" { FactorSource::Reported } else { FactorSource::Pullback };
    let (center, widths, per_axis) = (c.floats("center"), c.floats("widths"), c.usize("per_axis"));
    let rep = boundedness_diagnostics(&psi, center, widths, per_axis, src)?;
    let id = DiffeoSample::identity(AmbientSpace::torus(1), 1e-6);
    let ctrl = boundedness_diagnostics(&id, center, widths, per_axis, FactorSource::Pullback)?;
    let ctrl_err = ctrl.rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    let rows: Vec<Vec<f64>> = rep
        .rows
        .iter()
        .zip(&ctrl.rows)
        .map(|(r, k)| vec![r.half_width, r.volume.value, r.volume.error, r.reference, r.ratio, r.f_inf, r.f_sup, r.volume.skipped as f64, k.ratio])
        .collect();
    ctx.table("ratios.csv", &["half_width", "volume", "quadrature_error", "reference", "ratio", "f_inf", "f_sup", "skipped", "identity_ratio"], &rows)?;
    let ratios: Vec<String> = rep.ratios().iter().map(|r| format!("{r:.4e}")).collect();
    ctx.report.compare("identity control", ctrl_err, Relation::Below, 1e-9, "max |ratio - 1| for the identity");
    ctx.report.verdict("ratios strictly decrease", rep.strictly_decreasing(), format!("[{}]", ratios.join(", ")));
    ctx.report.note(format!("final/initial ratio {:.4e}; sampled only, no claim below the smallest box", rep.decay()));
    Ok(())
}
