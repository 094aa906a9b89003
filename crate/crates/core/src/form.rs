//! The standard contact form, its differential and contact volume.

use crate::coords::{Covector, Cuboid, Point, Tangent};

/// `α_p(v) = dz − Σ yⱼ dxⱼ`.
pub fn alpha_eval(p: &Point, v: &Tangent) -> f64 {
    let s: f64 = p.y().iter().zip(v.dx()).map(|(y, dx)| y * dx).sum();
    v.dz() - s
}

/// `α_p` as a covector in the flat frame.
pub fn alpha_covector(p: &Point) -> Covector {
    let n = p.n();
    let mut c = Covector::zeros(n);
    for j in 0..n {
        c[j] = -p.y()[j];
    }
    c[2 * n] = 1.0;
    c
}

/// `dα(v, w) = Σ (dxⱼ(v) dyⱼ(w) − dyⱼ(v) dxⱼ(w))`. Independent of the point.
pub fn dalpha_eval(_p: &Point, v: &Tangent, w: &Tangent) -> f64 {
    symplectic_pairing(v, w)
}

pub(crate) fn symplectic_pairing(v: &Tangent, w: &Tangent) -> f64 {
    let n = v.n();
    let (a, b) = (v.as_slice(), w.as_slice());
    (0..n).map(|j| a[j] * b[n + j] - a[n + j] * b[j]).sum()
}

/// `n! ∏` factorial as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Contact volume `∫ α∧(dα)ⁿ` of a coordinate box, i.e. `n!` times its Lebesgue measure.
pub fn contact_volume(n: usize, b: &Cuboid) -> f64 {
    factorial(n) * b.lebesgue_volume()
}

/// Basis `{∂ₓⱼ + yⱼ∂_z, ∂_yⱼ}` of `ξ_p`, in which `dα` is the standard symplectic form.
pub fn contact_plane_basis(p: &Point) -> alloc::vec::Vec<Tangent> {
    let n = p.n();
    let mut out = alloc::vec::Vec::with_capacity(2 * n);
    for j in 0..n {
        let mut t = Tangent::partial_x(n, j);
        t[2 * n] = p.y()[j];
        out.push(t);
    }
    for j in 0..n {
        out.push(Tangent::partial_y(n, j));
    }
    out
}

/// Projection of `v` onto `ξ_p` along the Reeb field.
pub fn project_to_contact_plane(p: &Point, v: &Tangent) -> Tangent {
    let a = alpha_eval(p, v);
    let mut w = v.clone();
    let n = v.n();
    w[2 * n] -= a;
    w
}
