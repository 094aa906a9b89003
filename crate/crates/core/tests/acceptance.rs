//! End-to-end acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use contact_lab_core::bo::{BoConstruction, BoOptions, TargetProfile};
use contact_lab_core::collapse::*;
use contact_lab_core::energy::{cutoff_disjunction, model};
use contact_lab_core::field::{FieldRef, Polynomial};
use contact_lab_core::flow::{verify_contactomorphism, IntegratorConfig};
use contact_lab_core::linalg::{self, REL_TOL};
use contact_lab_core::pullback::{DiffeoSample, FactorSource, PointMap};
use contact_lab_core::submanifold::{coisotropy_report, is_legendrian_at, omega_complement, restricted_wedge_power, SubspaceBasis};
use contact_lab_core::{AmbientSpace, Point};
use common::GermKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn near_zero_section(rng: &mut ChaCha8Rng, n: usize, log_r: (f64, f64)) -> Point {
    let r = rng.gen_range(log_r.0..log_r.1).exp();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|_| r * rng.gen_range(-1.0..1.0)).collect();
    Point::new(&x, &y, r * rng.gen_range(-1.0..1.0))
}

fn flows_are_contactomorphisms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = IntegratorConfig::default();
    let (mut res, mut fm, mut trunc) = (0.0f64, 0.0f64, 0);
    for i in 0..50 {
        let n = 1 + i % 2;
        let degree = rng.gen_range(1..=3);
        let h: FieldRef = Arc::new(Polynomial::random(n, degree, 0.5, &mut rng));
        let samples: Vec<Point> = (0..4)
            .map(|_| Point::from_vec((0..2 * n + 1).map(|_| rng.gen_range(-0.5..0.5)).collect()))
            .collect();
        let rep = verify_contactomorphism(h, &AmbientSpace::euclidean(n), &samples, 0.5, &cfg, 1e-5).unwrap();
        res = res.max(rep.max_residual);
        fm = fm.max(rep.max_f_mismatch);
        trunc += rep.truncated;
    }
    outcome(res < 1e-5 && fm < 1e-4, format!("max residual {res:.2e}, max |f_hat - f|/|f| {fm:.2e}, truncated {trunc}"))
}

fn square_closed_form_matches() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = Preset::Square.field(1);
    let calc = GCalculus::new(Preset::Square.profile());
    let cfg = IntegratorConfig::rk45(1e-12, 1e-300);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = near_zero_section(&mut rng, 1, (-6.0, -0.5));
        for t in [0.3, 0.7, 1.2] {
            let a = square_closed_form(&calc, &p, t).unwrap();
            let b = integrate_collapse(&h, &p, t, &cfg).unwrap();
            let e = b.trajectory.endpoint();
            let d = a.as_slice().iter().zip(e.as_slice()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
    }
    outcome(worst < 1e-6, format!("max coordinate error {worst:.2e} over 600 evaluations"))
}

fn fourfinite_wall_is_cubic() -> Outcome {
    let t = 0.5 * 3f64.ln();
    let h = Preset::FourFinite.field(1);
    let wall = WallMap::new(GCalculus::new(Preset::FourFinite.profile()), 2, t);
    let cfg = IntegratorConfig::rk45(1e-12, 1e-300);
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let s = 10f64.powf(-2.0 + i as f64 / 20.0);
        for z in [s, -s] {
            let tr = integrate_collapse(&h, &Point::new(&[0.25], &[0.0], z), t, &cfg).unwrap();
            let e = tr.trajectory.endpoint();
            let want = z * z * z;
            worst = worst.max((e.z() - want).abs() / want.abs());
            worst = worst.max(e.y()[0].abs() + (e.x()[0] - 0.25).abs());
        }
    }
    let ode = |z: f64| {
        wall_log_ode(&Preset::FourFinite.profile(), 2, z, t, 1e-12)
    };
    let rep = tangency_order(ode, &[1e-1, 1e-2], 12).unwrap();
    let slope = rep.final_slope();
    let closed = tangency_order(|z| wall.log_abs(z), &[1e-2], 12).unwrap().final_slope();
    outcome(
        worst < 1e-5 && (2.98..=3.02).contains(&slope),
        format!("max relative z error {worst:.2e}, slope {slope:.5} (closed form {closed:.5})"),
    )
}

fn fourinf_tangency_grows() -> Outcome {
    let wall = WallMap::new(GCalculus::new(Preset::FourInf.profile()), 2, 1.0);
    let ladder = [1e-1, 1e-2, 1e-3, 1e-4];
    let rep = tangency_order(|z| wall.log_abs(z), &ladder, 12).unwrap();
    // cross-check the closed form against the wall ODE at the smallest window
    let ode = tangency_order(|z| wall_log_ode(&Preset::FourInf.profile(), 2, z, 1.0, 1e-12), &[1e-4], 12)
        .unwrap()
        .final_slope();
    let slopes: Vec<String> = rep.windows.iter().map(|w| format!("{:.3}", w.slope)).collect();
    let fin = rep.final_slope();
    outcome(
        rep.increasing() && fin > 5.0 && (ode - fin).abs() < 1e-3 * fin,
        format!("slopes [{}], ODE slope at 1e-4 {ode:.3}", slopes.join(", ")),
    )
}

fn bihari_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = collapse_config();
    let mut details = Vec::new();
    let mut pass = true;
    for preset in [Preset::Square, Preset::FourFinite] {
        let h = preset.field(2);
        let prof = preset.profile();
        let calc = GCalculus::new(prof.clone());
        let (mut runs, mut margin) = (0, f64::INFINITY);
        while runs < 100 {
            let p = near_zero_section(&mut rng, 2, (-4.0, -0.5));
            let u = h.weight.neg_log_rho(p.as_slice());
            if u <= prof.u0 || u > 10.0 {
                continue;
            }
            let t = rng.gen_range(0.05..1.0);
            let tr = integrate_collapse(&h, &p, t, &cfg).unwrap();
            let end = *tr.neg_log_rho.last().unwrap();
            let (lo, hi) = calc.bihari_envelope(u, t, h.weight.d_y, h.weight.d_z).unwrap();
            let slack = (end - lo * (1.0 - 1e-6)).min(hi * (1.0 + 1e-6) - end);
            margin = margin.min(slack / end);
            pass &= slack >= 0.0;
            runs += 1;
        }
        details.push(format!("{}: min relative slack {margin:.2e}", preset.name()));
    }
    outcome(pass, details.join("; "))
}

fn approximant_convergence() -> Outcome {
    let preset = Preset::Square;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = collapse_config();
    let base = CollapseMap::new(Arc::new(preset.field(1)), 1.0, cfg.clone());
    let samples: Vec<Point> = (0..200).map(|_| near_zero_section(&mut rng, 1, (-9.0, -0.5))).collect();
    let reference: Vec<_> = samples.iter().map(|p| base.apply(p.as_slice()).unwrap()).collect();
    let mut pass = true;
    let mut details = Vec::new();
    for m in [6.0, 8.0, 10.0] {
        let st = build_approximant(preset.profile(), preset.weight(1), m, 1.0, cfg.clone()).unwrap();
        let (mut df, mut agree, mut inside) = (0.0f64, 0.0f64, 0);
        for (p, r) in samples.iter().zip(&reference) {
            let a = st.map.apply(p.as_slice()).unwrap();
            let f = r.log_f.unwrap().exp();
            let fm = a.log_f.unwrap().exp();
            df = df.max((fm - f).abs());
            if st.agrees_at(p.as_slice()) {
                inside += 1;
                let d = a.point.iter().zip(&r.point).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
                agree = agree.max(d);
            }
        }
        let bound = st.factor_bound();
        pass &= df <= bound && agree < 1e-7 && inside > 0;
        details.push(format!("m={m}: sup|f_m-f| {df:.2e} <= {bound:.2e}, agreement {agree:.1e} on {inside}"));
    }
    outcome(pass, details.join("; "))
}

fn cutoff_energies() -> Outcome {
    let model = model::Model::default();
    let h = model.hamiltonian();
    let w = model.window(9, 8).unwrap();
    let c = model.z_axis();
    let cfg = IntegratorConfig::default();
    let mut values = Vec::new();
    let mut pass = true;
    let mut worst_log_f = 0.0f64;
    let mut m = 0.0;
    for k in [1, 2, 4, 8, 16] {
        match cutoff_disjunction(h.clone(), &c, &w, k, &cfg, 1e-12) {
            Ok(o) => {
                pass &= o.estimate.value <= o.bound && o.max_abs_log_f <= 3.0 * o.m;
                worst_log_f = worst_log_f.max(o.max_abs_log_f);
                m = o.m;
                values.push(o.estimate.value);
            }
            Err(e) => return outcome(false, format!("k = {k}: {e}")),
        }
    }
    pass &= values.windows(2).all(|v| v[1] < v[0]);
    pass &= values[4] < 0.3 * values[0];
    let vs: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    outcome(pass, format!("energies [{}], M {m:.3}, max |log f| {worst_log_f:.3}", vs.join(", ")))
}

fn bo_graph_action() -> Outcome {
    let c = match BoConstruction::build(1, TargetProfile::cube_root(1, 0.5, 0.5).unwrap(), 6, BoOptions::default()) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("build failed: {e}")),
    };
    let mut pass = c.stages.iter().all(|s| s.passes());
    let mut graph = 0.0f64;
    for m in 0..=6 {
        graph = graph.max(c.graph_action(m, 33).unwrap().max_error);
    }
    pass &= graph < 1e-4;
    let (mut lo, mut hi, mut cauchy) = (0.0f64, 0.0f64, 0.0f64);
    for m1 in 1..=6 {
        let v = c.verify(m1, 6, 9).unwrap();
        pass &= v.cauchy_ok() && v.conformal_ok();
        lo = lo.min(v.log_f_range.0);
        hi = hi.max(v.log_f_range.1);
        cauchy = cauchy.max(v.sup_distance / v.cauchy_bound);
    }
    let ells: Vec<String> = c.stages.iter().map(|s| format!("{}", s.ell)).collect();
    outcome(
        pass,
        format!("l = [{}], graph error {graph:.1e}, log f in [{lo:.3}, {hi:.3}], worst Cauchy ratio {cauchy:.3}", ells.join(", ")),
    )
}

fn coisotropy_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pass = true;
    let mut details = Vec::new();
    for n in [1, 2] {
        let (mut disagree, mut band, mut yes, mut rank) = (0, 0, 0, 0);
        for _ in 0..500 {
            let (germ, kind) = common::random_germ(&mut rng, n);
            let q = vec![0.0; germ.linear.len()];
            let r = match coisotropy_report(&germ, &q, 1e-6) {
                Ok(r) => r,
                Err(_) => {
                    rank += 1;
                    continue;
                }
            };
            if r.tangent_ambiguous {
                band += 1;
                continue;
            }
            if !r.agreement {
                disagree += 1;
            }
            if matches!(kind, GermKind::Transverse | GermKind::Tangent) && !r.coisotropic() {
                disagree += 1;
            }
            yes += r.coisotropic() as usize;
        }
        pass &= disagree == 0;
        details.push(format!("R^{}: {disagree} disagreements, {yes} coisotropic, band {band}, rank-deficient {rank}", 2 * n + 1));
    }
    outcome(pass, details.join("; "))
}

fn collapse_volume_ratios() -> Outcome {
    let map = CollapseMap::new(Arc::new(Preset::FourInf.field(1)), 1.0, collapse_config());
    let psi = DiffeoSample::new(AmbientSpace::torus(1), Arc::new(map), 1e-6);
    let widths = [0.1, 0.05, 0.025];
    let center = [0.5, 0.0, 0.0];
    let rep = boundedness_diagnostics(&psi, &center, &widths, 12, FactorSource::Reported).unwrap();
    let id = DiffeoSample::identity(AmbientSpace::torus(1), 1e-6);
    let ctrl = boundedness_diagnostics(&id, &center, &widths, 12, FactorSource::Pullback).unwrap();
    let ctrl_err = ctrl.rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    let ratios: Vec<String> = rep.ratios().iter().map(|r| format!("{r:.4}")).collect();
    outcome(
        rep.strictly_decreasing() && rep.decay() < 0.5 && ctrl_err < 1e-9,
        format!("ratios [{}], final/initial {:.4}, identity error {ctrl_err:.1e}", ratios.join(", "), rep.decay()),
    )
}

fn linear_algebra_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fails = Vec::new();
    let (mut dc, mut wedge_gap) = (0.0f64, f64::INFINITY);
    let mut co_count = 0;
    for i in 0..200 {
        let n = 1 + i % 3;
        let p = common::random_point(&mut rng, n);
        let c = rng.gen_range(1..=n);
        let coiso = i % 2 == 0;
        let w = if coiso { common::coisotropic_subspace(&mut rng, n, c) } else { common::random_subspace(&mut rng, n, 2 * n - c) };
        let basis = SubspaceBasis::from_xi_matrix(p.clone(), &w);
        let comp = omega_complement(&basis).unwrap();
        if comp.dim() + basis.dim() != 2 * n {
            fails.push(format!("dimension law at sample {i}"));
        }
        let back = omega_complement(&comp).unwrap();
        dc = dc.max(linalg::subspace_distance(&back.xi_matrix(), &w, REL_TOL));
        let contained = linalg::containment_distance(&comp.xi_matrix(), &w, REL_TOL) <= 1e-8;
        let low = restricted_wedge_power(&w, n - c);
        let high = restricted_wedge_power(&w, n - c + 1);
        wedge_gap = wedge_gap.min(low);
        if low <= 1e-8 {
            fails.push(format!("(dα|W)^(n-c) vanished at sample {i}"));
        }
        if (high <= 1e-8) != contained {
            fails.push(format!("wedge and containment differ at sample {i}"));
        }
        if coiso && !contained {
            fails.push(format!("constructed coisotropic subspace rejected at sample {i}"));
        }
        co_count += contained as usize;
    }
    if dc > 1e-8 {
        fails.push(format!("double complement distance {dc:.1e}"));
    }
    // Legendrian consistency for k = n + 1
    let mut leg = 0;
    for i in 0..200 {
        let n = 1 + i % 2;
        let (germ, _) = common::random_germ(&mut rng, n);
        if germ.linear.len() != n {
            continue;
        }
        let q = vec![0.0; n];
        let Ok(r) = coisotropy_report(&germ, &q, 1e-6) else { continue };
        if r.tangent_ambiguous {
            continue;
        }
        leg += 1;
        if r.coisotropic() != is_legendrian_at(&germ, &q, 1e-6) {
            fails.push(format!("Legendrian check differs at germ {i}"));
        }
    }
    outcome(
        fails.is_empty(),
        if fails.is_empty() {
            format!("200 subspaces ({co_count} coisotropic), double complement {dc:.1e}, min lower wedge {wedge_gap:.2e}, {leg} Legendrian checks")
        } else {
            fails.join("; ")
        },
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("flows are contactomorphisms", flows_are_contactomorphisms),
        ("square closed form", square_closed_form_matches),
        ("fourfinite wall is cubic", fourfinite_wall_is_cubic),
        ("fourinf tangency grows", fourinf_tangency_grows),
        ("Bihari sandwich", bihari_sandwich),
        ("approximant convergence", approximant_convergence),
        ("cutoff disjunction energies", cutoff_energies),
        ("graph-action sequence", bo_graph_action),
        ("coisotropy cross-validation", coisotropy_cross_validation),
        ("collapse volume ratios", collapse_volume_ratios),
        ("linear-algebra invariants", linear_algebra_suite),
    ];
    let results: Vec<(Outcome, Duration)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let o = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                        outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
                    });
                    (o, t.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (o, dt))) in criteria.iter().zip(&results).enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!("{tag} [{:>2}] {name} ({:.1}s): {}", i + 1, dt.as_secs_f64(), o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
