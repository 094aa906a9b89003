use std::sync::Arc;

use contact_lab_core::field::{FieldRef, FnField, Polynomial, ScalarField};
use contact_lab_core::flow::{
    compose_flows, conformal_factor, hamiltonian_vector_field, integrate_between, integrate_flow, verify_contactomorphism,
    FlowMap, IntegratorConfig,
};
use contact_lab_core::form::{alpha_eval, contact_plane_basis, dalpha_eval};
use contact_lab_core::smooth::smooth_step_d;
use contact_lab_core::{AmbientSpace, Cuboid, Point, Tangent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Point {
    Point::from_vec((0..2 * n + 1).map(|_| rng.gen_range(-r..r)).collect())
}

#[test]
fn vector_field_satisfies_defining_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1000 {
        let n = 1 + i % 3;
        let h = Polynomial::random(n, 3, 1.0, &mut rng);
        let p = random_point(&mut rng, n, 1.0);
        let x = hamiltonian_vector_field(&h, 0.0, &p).unwrap();
        let hv = h.value(0.0, p.as_slice());
        assert!((alpha_eval(&p, &x) - hv).abs() <= 1e-12 * (1.0 + hv.abs()));
        // on ξ_p: dα(X_H, v) = −dH(v)
        let mut g = vec![0.0; 2 * n + 1];
        h.gradient(0.0, p.as_slice(), &mut g);
        for v in contact_plane_basis(&p) {
            let dh: f64 = g.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum();
            assert!((dalpha_eval(&p, &x, &v) + dh).abs() <= 1e-11 * (1.0 + dh.abs()));
        }
    }
}

#[test]
fn reeb_field_of_constant_one() {
    let h = Polynomial::new(1, vec![contact_lab_core::field::Monomial { coef: 1.0, exps: vec![0, 0, 0] }]);
    let x = hamiltonian_vector_field(&h, 0.0, &Point::new(&[0.3], &[-0.7], 2.0)).unwrap();
    assert_eq!(x, Tangent::partial_z(1));
}

#[test]
fn flows_are_reversible() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tol = 1e-9;
    let cfg = IntegratorConfig::rk45(tol, tol);
    for _ in 0..20 {
        let h = Polynomial::random(2, 3, 0.5, &mut rng);
        let p = random_point(&mut rng, 2, 0.5);
        let fwd = integrate_flow(&h, &p, 0.7, &cfg).unwrap();
        let back = integrate_between(&h, fwd.endpoint(), 0.7, 0.0, &cfg).unwrap();
        let err = back.endpoint().as_slice().iter().zip(p.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 50.0 * tol, "{err}");
        assert!((fwd.log_factor() + back.log_factor()).abs() < 50.0 * tol);
    }
}

#[test]
fn rk4_and_rk45_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = Polynomial::random(1, 3, 0.5, &mut rng);
    let p = random_point(&mut rng, 1, 0.5);
    let a = integrate_flow(&h, &p, 1.0, &IntegratorConfig::golden()).unwrap();
    let b = integrate_flow(&h, &p, 1.0, &IntegratorConfig::rk45(1e-12, 1e-12)).unwrap();
    assert!(a.endpoint().approx_eq(b.endpoint(), 1e-10));
    assert!((a.log_factor() - b.log_factor()).abs() < 1e-10);
}

#[test]
fn integrated_factor_matches_pullback() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [1, 2] {
        let h: FieldRef = Arc::new(Polynomial::random(n, 3, 0.5, &mut rng));
        let samples: Vec<Point> = (0..10).map(|_| random_point(&mut rng, n, 0.5)).collect();
        let rep = verify_contactomorphism(h, &AmbientSpace::euclidean(n), &samples, 0.5, &IntegratorConfig::default(), 1e-5).unwrap();
        assert_eq!(rep.truncated, 0);
        assert!(rep.max_residual < 1e-5 && rep.max_f_mismatch < 1e-4, "{rep:?}");
    }
}

#[test]
fn linear_reeb_derivative_gives_exponential_factor() {
    // H = cz: X_H = cz∂_z + c y∂_y, f = e^{ct}
    let h = FnField::new(1, |_, p| 0.8 * p[2]).with_gradient(|_, _, g| {
        g.fill(0.0);
        g[2] = 0.8;
    });
    let f = conformal_factor(&h, &Point::new(&[0.1], &[0.2], 0.3), 1.5, &IntegratorConfig::default()).unwrap();
    assert!((f - (0.8f64 * 1.5).exp()).abs() < 1e-8);
}

fn local_field(center: f64, r: f64, scale: f64) -> FieldRef {
    let bump = move |s: f64| smooth_step_d((r - s.abs()) / (0.5 * r));
    let supp = Cuboid::new(vec![center - r, -r, -r], vec![center + r, r, r]).unwrap();
    Arc::new(
        FnField::new(1, move |_, p| scale * (p[1] + 0.3) * bump(p[0] - center).0 * bump(p[1]).0 * bump(p[2]).0)
            .with_support(supp),
    )
}

#[test]
fn disjoint_supports_commute() {
    let a = local_field(-0.5, 0.4, 0.7);
    let b = local_field(0.5, 0.4, -0.9);
    let cfg = IntegratorConfig::rk45(1e-11, 1e-11);
    let space = AmbientSpace::euclidean(1);
    let ab = compose_flows(space.clone(), vec![FlowMap::new(a.clone(), 1.0, cfg.clone()), FlowMap::new(b.clone(), 1.0, cfg.clone())], 1e-5);
    let ba = compose_flows(space, vec![FlowMap::new(b, 1.0, cfg.clone()), FlowMap::new(a, 1.0, cfg)], 1e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let p = Point::new(&[rng.gen_range(-1.0..1.0)], &[rng.gen_range(-0.4..0.4)], rng.gen_range(-0.4..0.4));
        assert!(ab.apply(&p).unwrap().approx_eq(&ba.apply(&p).unwrap(), 1e-9));
    }
}

#[test]
fn leaving_the_domain_truncates() {
    let h = Polynomial::coordinate(1, 1); // H = y: X_H = −∂_x
    let cfg = IntegratorConfig { domain: Some(Cuboid::centered(&[0.0; 3], 1.0)), ..IntegratorConfig::default() };
    let tr = integrate_flow(&h, &Point::new(&[0.5], &[0.0], 0.0), 2.0, &cfg).unwrap();
    assert!(!tr.is_complete());
}
