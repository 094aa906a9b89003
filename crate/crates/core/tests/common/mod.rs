//! Random subspaces and chart germs shared by the coisotropy suites.
#![allow(dead_code)]

use contact_lab_core::linalg;
use contact_lab_core::submanifold::{xi_lift, QuadraticGerm};
use contact_lab_core::Point;
use nalgebra::DMatrix;
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Product of random symplectic shears and a block `diag(M, M⁻ᵀ)`.
pub fn random_symplectic<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for lower in [false, true, false] {
        let a = random_matrix(rng, n, n);
        let a = (&a + a.transpose()) * 0.5;
        let mut shear = DMatrix::identity(2 * n, 2 * n);
        let (r, c) = if lower { (n, 0) } else { (0, n) };
        shear.view_mut((r, c), (n, n)).copy_from(&a);
        s = shear * s;
    }
    let m = random_matrix(rng, n, n) + DMatrix::identity(n, n) * 2.0;
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    d.view_mut((0, 0), (n, n)).copy_from(&m);
    d.view_mut((n, n), (n, n)).copy_from(&m.try_inverse().unwrap().transpose());
    d * s
}

/// A coisotropic subspace of codimension `c` in `ℝ²ⁿ`, as `(dx⃗, dy⃗)` columns.
pub fn coisotropic_subspace<R: Rng>(rng: &mut R, n: usize, c: usize) -> DMatrix<f64> {
    let s = random_symplectic(rng, n);
    let keep: Vec<usize> = (0..n).chain(n + c..2 * n).collect();
    let cols: Vec<Vec<f64>> = keep.iter().map(|&j| s.column(j).iter().copied().collect()).collect();
    let w = linalg::from_columns(2 * n, &cols);
    // scramble the frame
    let g = random_matrix(rng, w.ncols(), w.ncols()) + DMatrix::identity(w.ncols(), w.ncols()) * 3.0;
    w * g
}

pub fn random_subspace<R: Rng>(rng: &mut R, n: usize, dim: usize) -> DMatrix<f64> {
    random_matrix(rng, 2 * n, dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GermKind {
    Generic,
    /// Coisotropic with `T_pC` transverse to `ξ_p`.
    Transverse,
    /// Coisotropic with `T_pC ⊂ ξ_p`.
    Tangent,
    /// `T_pC` tilted off `ξ_p` by about `1e-10`.
    NearTangent,
}

pub fn random_point<R: Rng>(rng: &mut R, n: usize) -> Point {
    Point::from_vec((0..2 * n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// A quadratic germ through `u(0)`, with a random curvature term.
pub fn random_germ<R: Rng>(rng: &mut R, n: usize) -> (QuadraticGerm, GermKind) {
    let p = random_point(rng, n);
    let kind = match rng.gen_range(0..10) {
        0..=3 => GermKind::Generic,
        4..=6 => GermKind::Transverse,
        7..=8 => GermKind::Tangent,
        _ => GermKind::NearTangent,
    };
    let mut linear: Vec<Vec<f64>> = match kind {
        GermKind::Generic => {
            let d = rng.gen_range(1..=2 * n);
            (0..d).map(|_| (0..2 * n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
        }
        GermKind::Transverse => {
            let c = rng.gen_range(1..=n);
            let w = coisotropic_subspace(rng, n, c);
            let mut v: Vec<Vec<f64>> = linalg::columns(&w).iter().map(|c| xi_lift(&p, c).into_vec()).collect();
            let w0: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut r = xi_lift(&p, &w0).into_vec();
            r[2 * n] += 1.0;
            v.push(r);
            v
        }
        GermKind::Tangent | GermKind::NearTangent => {
            let c = rng.gen_range(0..=n);
            let w = coisotropic_subspace(rng, n, c);
            linalg::columns(&w).iter().map(|c| xi_lift(&p, c).into_vec()).collect()
        }
    };
    if kind == GermKind::NearTangent {
        linear[0][2 * n] += 1e-10;
    }
    let d = linear.len();
    let mut quadratic = vec![vec![vec![0.0; 2 * n + 1]; d]; d];
    for i in 0..d {
        for j in i..d {
            let v: Vec<f64> = (0..2 * n + 1).map(|_| rng.gen_range(-0.5..0.5)).collect();
            quadratic[i][j] = v.clone();
            quadratic[j][i] = v;
        }
    }
    (QuadraticGerm { n, base: p.into_vec(), linear, quadratic }, kind)
}
