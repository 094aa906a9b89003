use contact_lab_core::bo::*;
use contact_lab_core::field::FieldRef;
use contact_lab_core::flow::verify_contactomorphism;
use contact_lab_core::submanifold::{coisotropy_report, FnChart};
use contact_lab_core::Point;

fn cube_root_build(m: usize) -> BoConstruction {
    BoConstruction::build(1, TargetProfile::cube_root(1, 0.5, 0.5).unwrap(), m, BoOptions::default()).unwrap()
}

#[test]
fn zero_target_gives_identity() {
    let c = BoConstruction::build(1, TargetProfile::zero(1), 3, BoOptions::default()).unwrap();
    // the support box still has to shrink into |y₁| < δ/k, but every stage field vanishes
    assert_eq!(c.stages[0].ell, 1.0);
    assert!(c.stages.iter().all(|s| s.x_bound == 0.0 && s.hz_sup == 0.0));
    let q = c.psi_map(3).apply(&[0.2, 0.1, -0.3]).unwrap();
    assert_eq!(q.point, vec![0.2, 0.1, -0.3]);
    assert_eq!(q.log_f, Some(0.0));
}

#[test]
fn schedule_telescopes_and_converges() {
    let c = cube_root_build(6);
    let s = &c.schedule;
    let mut prev = f64::INFINITY;
    for k in 1..=6 {
        let mut err: f64 = 0.0;
        for w in s.support.grid(301) {
            let sum: f64 = (1..=k).map(|j| s.increment(j, &w)).sum();
            assert!((sum - s.eval(k, &w)).abs() < 1e-14);
            err = err.max((s.eval(k, &w) - s.target.eval(&w)).abs());
        }
        assert!(err < prev, "k = {k}");
        prev = err;
    }
}

#[test]
fn stages_meet_recorded_bounds() {
    let c = cube_root_build(5);
    for s in &c.stages {
        assert!(s.passes(), "{s:?}");
        assert!(s.x_measured <= s.x_bound * (1.0 + 1e-12));
        // doubling ℓ keeps every condition
        assert!(c.check_ell(s.k, 2.0 * s.ell).unwrap());
    }
}

#[test]
fn graph_action_and_cauchy() {
    let c = cube_root_build(6);
    for m in 0..=6 {
        assert!(c.graph_action(m, 33).unwrap().max_error < 1e-8);
    }
    for (m1, m2) in [(2, 4), (3, 6), (6, 6)] {
        let v = c.verify(m1, m2, 7).unwrap();
        assert!(v.cauchy_ok(), "{v:?}");
        assert!(v.conformal_ok(), "{v:?}");
        assert!(v.tail_max_distance < 1e-14);
        assert!(v.hypersurface_max_y1 < 1e-14);
        if m1 == m2 {
            assert_eq!(v.sup_distance, 0.0);
        }
    }
}

#[test]
fn stage_flows_are_contactomorphisms() {
    let c = cube_root_build(3);
    for (k, f) in c.fields.iter().enumerate() {
        let r = 0.5 * c.bumps.v_reach() / c.stages[k].ell;
        let samples: Vec<Point> = [(-0.3, 0.4, 0.1), (0.2, -0.8, -0.05), (0.0, 0.1, 0.3)]
            .iter()
            .map(|&(x, s, z)| Point::new(&[x], &[s * r], z))
            .collect();
        let rep = verify_contactomorphism(f.clone() as FieldRef, &c.space(), &samples, 1.0, &c.options.cfg, 1e-7).unwrap();
        assert_eq!(rep.truncated, 0);
        assert!(rep.max_residual < 1e-5 && rep.max_f_mismatch < 1e-4, "{rep:?}");
    }
}

#[test]
fn two_dimensional_target() {
    let opts = BoOptions { stage_grid: 9, support_samples: 3, schedule: ScheduleOptions { verify_per_axis: 9, nodes_per_width: 3, ..Default::default() }, ..Default::default() };
    let c = BoConstruction::build(2, TargetProfile::tent(3, 0.5, 0.4).unwrap(), 2, opts).unwrap();
    assert!(c.stages.iter().all(|s| s.passes()));
    assert!(c.graph_action(2, 5).unwrap().max_error < 1e-8);
}

#[test]
fn axis_transport_changes_coisotropy() {
    // {x₁ = y₁ = 0} is the z-axis: not coisotropic at the origin
    let axis = FnChart::new(1, 1, |s| vec![0.0, 0.0, s[0]]);
    assert!(!coisotropy_report(&axis, &[0.0], 1e-9).unwrap().coisotropic());
    // its limit image is the graph x₁ = F(z) = a∛z near 0, i.e. z = (x₁/a)³: tangent to ξ
    let a = 0.5;
    let image = FnChart::new(1, 1, move |s| vec![s[0], 0.0, (s[0] / a).powi(3)]);
    assert!(coisotropy_report(&image, &[0.0], 1e-9).unwrap().coisotropic());
    // and ψ_m already sends the axis onto the graph of F_m
    let c = cube_root_build(4);
    for p in c.image_of_axis(4, 17).unwrap() {
        assert!(p.y()[0].abs() < 1e-14);
        assert!((p.x()[0] - c.schedule.eval(4, &[p.z()])).abs() < 1e-8);
    }
}
