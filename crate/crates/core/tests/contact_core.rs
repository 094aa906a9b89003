use std::sync::Arc;

use contact_lab_core::field::{FieldRef, Polynomial};
use contact_lab_core::flow::{FlowMap, IntegratorConfig};
use contact_lab_core::form::{alpha_eval, contact_plane_basis, contact_volume, dalpha_eval};
use contact_lab_core::pullback::{image_volume, pullback_residual, Composite, DiffeoSample, FactorSource, FnMap, MapValue, PointMap, Quadrature};
use contact_lab_core::{AmbientSpace, Cuboid, Point, Tangent};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, len)
}

proptest! {
    #[test]
    fn alpha_and_dalpha_are_linear(n in 1usize..4, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vec<f64> { (0..2 * n + 1).map(|_| rng.gen_range(-2.0..2.0)).collect() };
        let p = Point::from_vec(draw());
        let (u, v, w) = (Tangent::from_vec(draw()), Tangent::from_vec(draw()), Tangent::from_vec(draw()));
        let comb = Tangent::from_vec(u.as_slice().iter().zip(v.as_slice()).map(|(x, y)| a * x + b * y).collect());
        let lhs = alpha_eval(&p, &comb);
        let rhs = a * alpha_eval(&p, &u) + b * alpha_eval(&p, &v);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        let lhs = dalpha_eval(&p, &comb, &w);
        let rhs = a * dalpha_eval(&p, &u, &w) + b * dalpha_eval(&p, &v, &w);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        prop_assert!((dalpha_eval(&p, &u, &w) + dalpha_eval(&p, &w, &u)).abs() <= 1e-14);
    }

    #[test]
    fn dalpha_is_nondegenerate_on_contact_plane(p in vec_strategy(5)) {
        let p = Point::from_vec(p);
        let basis = contact_plane_basis(&p);
        for v in &basis {
            prop_assert!(alpha_eval(&p, v).abs() < 1e-15);
        }
        let g = DMatrix::from_fn(4, 4, |i, j| dalpha_eval(&p, &basis[i], &basis[j]));
        prop_assert!((g.determinant().abs() - 1.0).abs() < 1e-12);
    }
}

fn dilation(lambda: f64) -> FnMap {
    // (x, y, z) ↦ (x, λy, λz) has conformal factor λ
    FnMap::new(1, move |p| Ok(MapValue { point: vec![p[0], lambda * p[1], lambda * p[2]], log_f: Some(lambda.ln()) }))
}

#[test]
fn pullback_of_composition_follows_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = IntegratorConfig::rk45(1e-11, 1e-11);
    for _ in 0..5 {
        let h: FieldRef = Arc::new(Polynomial::random(1, 2, 0.4, &mut rng));
        let flow: Arc<dyn PointMap> = Arc::new(FlowMap::new(h, 0.4, cfg.clone()));
        let dil: Arc<dyn PointMap> = Arc::new(dilation(1.7));
        let space = AmbientSpace::euclidean(1);
        let a = DiffeoSample::new(space.clone(), flow.clone(), 1e-5);
        let b = DiffeoSample::new(space.clone(), dil.clone(), 1e-5);
        let ab = DiffeoSample::new(space, Arc::new(Composite::new(vec![flow, dil])), 1e-5);
        let p = Point::from_vec((0..3).map(|_| rng.gen_range(-0.5..0.5)).collect());
        let fa = pullback_residual(&a, &p).unwrap();
        let fb = pullback_residual(&b, &a.apply(&p).unwrap()).unwrap();
        let fab = pullback_residual(&ab, &p).unwrap();
        assert!((fb.f_hat - 1.7).abs() < 1e-9);
        assert!((fab.f_hat - fa.f_hat * fb.f_hat).abs() < 1e-7 * fab.f_hat.abs());
        assert!(fab.residual < 1e-7);
    }
}

#[test]
fn non_contact_map_has_large_residual() {
    let shear = FnMap::points(1, |p| vec![p[0] + p[2], p[1], p[2]]);
    let psi = DiffeoSample::new(AmbientSpace::euclidean(1), Arc::new(shear), 1e-5);
    let r = pullback_residual(&psi, &Point::new(&[0.1], &[0.8], 0.2)).unwrap();
    assert!(r.residual > 0.1);
}

#[test]
fn identity_volume_matches_contact_volume() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..100 {
        let n = 1 + i % 2;
        let lo: Vec<f64> = (0..2 * n + 1).map(|_| rng.gen_range(-1.0..0.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.05..1.0)).collect();
        let b = Cuboid::new(lo, hi).unwrap();
        let id = DiffeoSample::identity(AmbientSpace::euclidean(n), 1e-5);
        let v = image_volume(&id, &b, Quadrature::Grid { per_axis: 3 }, FactorSource::Pullback).unwrap();
        let want = contact_volume(n, &b);
        assert!((v.value - want).abs() <= v.error.max(1e-10 * want), "{} vs {want}", v.value);
        assert_eq!(v.skipped, 0);
    }
}

#[test]
fn dilation_scales_volume() {
    // |f|^{n+1} = λ² in dimension 3
    let b = Cuboid::centered(&[0.0; 3], 0.5);
    let psi = DiffeoSample::new(AmbientSpace::euclidean(1), Arc::new(dilation(0.5)), 1e-5);
    for src in [FactorSource::Pullback, FactorSource::Reported] {
        let v = image_volume(&psi, &b, Quadrature::Grid { per_axis: 4 }, src).unwrap();
        assert!((v.value - 0.25 * contact_volume(1, &b)).abs() < 1e-9);
    }
}
