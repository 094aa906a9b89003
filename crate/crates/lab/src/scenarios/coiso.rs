use anyhow::Result;
use contact_lab_core::submanifold::{coisotropy_report, CoisotropyReport, QuadraticGerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Ctx;
use crate::config::{Kind, Knob, Value};
use crate::report::Relation;

pub fn knobs() -> Vec<Knob> {
    vec![
        Knob::new("n", Kind::Int { min: 1, max: 3 }, Value::Int(1), "half-dimension"),
        Knob::new("tol", Kind::Float { min: 1e-14, max: 1e-1 }, Value::Float(1e-6), "ambiguity band and rank tolerance"),
        Knob::new("s_min", Kind::Float { min: -10.0, max: 10.0 }, Value::Float(-1.0), "first tilt parameter"),
        Knob::new("s_max", Kind::Float { min: -10.0, max: 10.0 }, Value::Float(1.0), "last tilt parameter"),
        Knob::new("points", Kind::Int { min: 2, max: 100_000 }, Value::Int(41), "tilt parameters in the sweep"),
        Knob::new("germs", Kind::Int { min: 0, max: 1_000_000 }, Value::Int(500), "random germs"),
    ]
}

const HEADER: [&str; 11] = [
    "parameter",
    "codim",
    "dim_t_xi",
    "lambda_norm",
    "ambiguous",
    "containment",
    "wedge",
    "containment_distance",
    "wedge_tangent",
    "wedge_transverse",
    "agreement",
];

fn row(param: f64, r: &CoisotropyReport) -> Vec<f64> {
    let b = |v: bool| v as u8 as f64;
    vec![
        param,
        r.codim as f64,
        r.dim_t_xi as f64,
        r.lambda_norm,
        b(r.tangent_ambiguous),
        b(r.containment_verdict),
        b(r.wedge_verdict),
        r.containment_distance,
        r.wedge_tangent_branch,
        r.wedge_transverse_branch,
        b(r.agreement),
    ]
}

/// `q ↦ (q, 0, s·q₁)`: an `n`-dimensional plane tilted off `ξ` by `s`, Legendrian only at `s = 0`.
fn tilted(n: usize, s: f64) -> QuadraticGerm {
    let linear = (0..n)
        .map(|j| {
            let mut v = vec![0.0; 2 * n + 1];
            v[j] = 1.0;
            if j == 0 {
                v[2 * n] = s;
            }
            v
        })
        .collect();
    QuadraticGerm::affine(n, vec![0.0; 2 * n + 1], linear)
}

fn random_germ(rng: &mut ChaCha8Rng, n: usize) -> QuadraticGerm {
    let dim = 2 * n + 1;
    let d = rng.gen_range(1..=2 * n);
    let vec = |r: &mut ChaCha8Rng| (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let base = vec(rng);
    let linear = (0..d).map(|_| vec(rng)).collect();
    let mut quadratic = vec![vec![Vec::new(); d]; d];
    for i in 0..d {
        for j in i..d {
            let v = vec(rng);
            quadratic[i][j] = v.clone();
            quadratic[j][i] = v;
        }
    }
    QuadraticGerm { n, base, linear, quadratic }
}

pub fn run(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg;
    let n = c.usize("n");
    let tol = c.float("tol");
    let (a, b, k) = (c.float("s_min"), c.float("s_max"), c.usize("points"));

    let mut rows = Vec::new();
    let (mut wrong, mut disagree, mut band) = (0, 0, 0);
    for i in 0..k {
        let s = a + (b - a) * i as f64 / (k - 1) as f64;
        let r = coisotropy_report(&tilted(n, s), &vec![0.0; n], tol)?;
        rows.push(row(s, &r));
        if r.tangent_ambiguous {
            band += 1;
            continue;
        }
        disagree += !r.agreement as usize;
        wrong += (r.coisotropic() != (s == 0.0)) as usize;
    }
    ctx.table("sweep.csv", &HEADER, &rows)?;
    ctx.report.compare("tilt sweep: wrong verdicts", wrong as f64, Relation::Equal, 0.0, format!("{k} parameters, {band} in the ambiguity band"));
    ctx.report.compare("tilt sweep: disagreements", disagree as f64, Relation::Equal, 0.0, "containment vs wedge test");

    let mut rng = ChaCha8Rng::seed_from_u64(c.seed());
    let mut rows = Vec::new();
    let (mut disagree, mut band, mut rank, mut yes, mut hyper_fail) = (0, 0, 0, 0, 0);
    for i in 0..c.usize("germs") {
        let g = random_germ(&mut rng, n);
        let d = g.linear.len();
        let Ok(r) = coisotropy_report(&g, &vec![0.0; d], tol) else {
            rank += 1;
            continue;
        };
        rows.push(row(i as f64, &r));
        if r.tangent_ambiguous {
            band += 1;
            continue;
        }
        disagree += !r.agreement as usize;
        yes += r.coisotropic() as usize;
        // hypersurfaces are always coisotropic
        hyper_fail += (d == 2 * n && !r.coisotropic()) as usize;
    }
    ctx.table("germs.csv", &HEADER, &rows)?;
    let rep = &mut ctx.report;
    rep.compare("germs: disagreements outside the band", disagree as f64, Relation::Equal, 0.0, format!("{} germs, band occupancy {band}", rows.len()));
    rep.compare("germs: hypersurfaces rejected", hyper_fail as f64, Relation::Equal, 0.0, "");
    rep.note(format!("germs: {yes} coisotropic, {rank} rank-deficient skipped"));
    Ok(())
}
