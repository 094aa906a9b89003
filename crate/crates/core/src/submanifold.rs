//! Pointwise linear algebra of parametrized submanifolds: contact intersections,
//! `dα`-orthogonal complements, coisotropy by two independent tests, Legendrian
//! checks, the characteristic distribution and involutivity diagnostics.
//!
//! Vectors of `ξ_p` are handled in the basis `{∂ₓⱼ + yⱼ∂_z, ∂_yⱼ}`, whose
//! coordinates are just the `(dx⃗, dy⃗)` components and in which `dα` is the
//! standard symplectic form.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;

use crate::coords::{Cuboid, Point, Tangent};
use crate::error::{Error, Result};
use crate::field::{FieldRef, ProductField, ScalarField};
use crate::flow::vector_field_into;
use crate::form::{alpha_covector, alpha_eval, symplectic_pairing};
use crate::linalg::{self, REL_TOL};

/// A parametrized germ `u: ℝᵈ → ℝ²ⁿ⁺¹`.
pub trait Chart: Send + Sync {
    fn n(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn eval(&self, q: &[f64]) -> Vec<f64>;

    /// Columns `∂u/∂qᵢ`; central differences by default.
    fn jacobian(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let h = 1e-6;
        let mut qq = q.to_vec();
        (0..q.len())
            .map(|i| {
                let s = h * q[i].abs().max(1.0);
                qq[i] = q[i] + s;
                let a = self.eval(&qq);
                qq[i] = q[i] - s;
                let b = self.eval(&qq);
                qq[i] = q[i];
                a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * s)).collect()
            })
            .collect()
    }

    fn domain(&self) -> Option<Cuboid> {
        None
    }

    /// Codimension `k = 2n + 1 − d`.
    fn codim(&self) -> usize {
        2 * self.n() + 1 - self.param_dim()
    }
}

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

/// Chart from closures.
#[derive(Clone)]
pub struct FnChart {
    n: usize,
    d: usize,
    eval: Arc<EvalFn>,
    jac: Option<Arc<JacFn>>,
    domain: Option<Cuboid>,
}

impl FnChart {
    pub fn new(n: usize, d: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { n, d, eval: Arc::new(eval), jac: None, domain: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn with_domain(mut self, domain: Cuboid) -> Self {
        self.domain = Some(domain);
        self
    }
}

impl Chart for FnChart {
    fn n(&self) -> usize {
        self.n
    }
    fn param_dim(&self) -> usize {
        self.d
    }
    fn eval(&self, q: &[f64]) -> Vec<f64> {
        (self.eval)(q)
    }
    fn jacobian(&self, q: &[f64]) -> Vec<Vec<f64>> {
        match &self.jac {
            Some(j) => j(q),
            None => {
                let h = 1e-6;
                let mut qq = q.to_vec();
                (0..q.len())
                    .map(|i| {
                        let s = h * q[i].abs().max(1.0);
                        qq[i] = q[i] + s;
                        let a = self.eval(&qq);
                        qq[i] = q[i] - s;
                        let b = self.eval(&qq);
                        qq[i] = q[i];
                        a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * s)).collect()
                    })
                    .collect()
            }
        }
    }
    fn domain(&self) -> Option<Cuboid> {
        self.domain.clone()
    }
}

/// Quadratic germ `u(q) = base + Σ qᵢ Lᵢ + ½ Σ qᵢ qⱼ Q_{ij}` with exact Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGerm {
    pub n: usize,
    pub base: Vec<f64>,
    /// `d` ambient vectors.
    pub linear: Vec<Vec<f64>>,
    /// Symmetric `d × d` table of ambient vectors; empty for an affine chart.
    pub quadratic: Vec<Vec<Vec<f64>>>,
}

impl QuadraticGerm {
    pub fn affine(n: usize, base: Vec<f64>, linear: Vec<Vec<f64>>) -> Self {
        Self { n, base, linear, quadratic: Vec::new() }
    }
}

impl Chart for QuadraticGerm {
    fn n(&self) -> usize {
        self.n
    }
    fn param_dim(&self) -> usize {
        self.linear.len()
    }
    fn eval(&self, q: &[f64]) -> Vec<f64> {
        let mut u = self.base.clone();
        for (i, l) in self.linear.iter().enumerate() {
            u.iter_mut().zip(l).for_each(|(a, b)| *a += q[i] * b);
        }
        for (i, row) in self.quadratic.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                u.iter_mut().zip(v).for_each(|(a, b)| *a += 0.5 * q[i] * q[j] * b);
            }
        }
        u
    }
    fn jacobian(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let mut cols = self.linear.clone();
        for (i, row) in self.quadratic.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                cols[i].iter_mut().zip(v).for_each(|(a, b)| *a += q[j] * b);
            }
        }
        cols
    }
}

/// Vectors at a common base point spanning a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub point: Point,
    pub vectors: Vec<Tangent>,
    pub orthonormal: bool,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Ambient matrix with the vectors as columns.
    pub fn matrix(&self) -> DMatrix<f64> {
        let rows = self.point.dim();
        let cols: Vec<Vec<f64>> = self.vectors.iter().map(|v| v.as_slice().to_vec()).collect();
        linalg::from_columns(rows, &cols)
    }

    /// Matrix of `(dx⃗, dy⃗)` coordinates, for vectors in `ξ_p`.
    pub fn xi_matrix(&self) -> DMatrix<f64> {
        let n = self.point.n();
        let cols: Vec<Vec<f64>> = self.vectors.iter().map(|v| v.as_slice()[..2 * n].to_vec()).collect();
        linalg::from_columns(2 * n, &cols)
    }

    fn from_matrix(point: Point, m: &DMatrix<f64>, orthonormal: bool) -> Self {
        let vectors = linalg::columns(m).into_iter().map(Tangent::from_vec).collect();
        Self { point, vectors, orthonormal }
    }

    /// Builds from `(dx⃗, dy⃗)` coordinates, lifting each vector into `ξ_p`.
    pub fn from_xi_matrix(point: Point, m: &DMatrix<f64>) -> Self {
        let vectors = linalg::columns(m).into_iter().map(|c| xi_lift(&point, &c)).collect();
        Self { point, vectors, orthonormal: false }
    }
}

/// The vector of `ξ_p` with `(dx⃗, dy⃗)` components `c`.
pub fn xi_lift(p: &Point, c: &[f64]) -> Tangent {
    let n = p.n();
    let dz: f64 = (0..n).map(|j| p.y()[j] * c[j]).sum();
    Tangent::new(&c[..n], &c[n..2 * n], dz)
}

/// `T_pC`, `T_pC ∩ ξ_p` and whether `α|_{T_pC}` vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSplit {
    pub tangent: SubspaceBasis,
    pub tangent_xi: SubspaceBasis,
    pub lambda_zero: bool,
    /// `‖λ_p‖ / ‖α_p‖` on an orthonormal basis of `T_pC`.
    pub lambda_norm: f64,
}

fn tangent_frame<C: Chart + ?Sized>(c: &C, q: &[f64]) -> Result<(Point, DMatrix<f64>)> {
    if q.len() != c.param_dim() {
        return Err(Error::DimensionMismatch { expected: c.param_dim(), found: q.len() });
    }
    let p = Point::from_vec(c.eval(q));
    if !p.is_finite() {
        return Err(Error::NonFinite("chart evaluation"));
    }
    let jac = linalg::from_columns(p.dim(), &c.jacobian(q));
    let ortho = linalg::orth(&jac, REL_TOL);
    if ortho.ncols() != c.param_dim() {
        return Err(Error::RankDeficient { expected: c.param_dim(), found: ortho.ncols() });
    }
    Ok((p, ortho))
}

/// Splits `T_pC` against the contact plane.
pub fn tangent_contact_split<C: Chart + ?Sized>(c: &C, q: &[f64]) -> Result<ContactSplit> {
    let (p, t) = tangent_frame(c, q)?;
    let a = alpha_covector(&p);
    let anorm = a.norm();
    let lam = DMatrix::from_fn(1, t.ncols(), |_, j| t.column(j).iter().zip(a.as_slice()).map(|(x, y)| x * y).sum::<f64>());
    let lambda_norm = lam.norm() / anorm;
    let lambda_zero = lambda_norm <= REL_TOL;
    let txi = if lambda_zero {
        // drop the tiny Reeb component so the basis lies exactly in ξ_p
        let mut m = t.clone();
        let z = 2 * p.n();
        for j in 0..m.ncols() {
            let v = Tangent::from_slice(&m.column(j).iter().copied().collect::<Vec<_>>());
            let al = alpha_eval(&p, &v);
            m[(z, j)] -= al;
        }
        m
    } else {
        &t * linalg::null_space(&lam, REL_TOL)
    };
    Ok(ContactSplit {
        tangent: SubspaceBasis::from_matrix(p.clone(), &t, true),
        tangent_xi: SubspaceBasis::from_matrix(p, &txi, !lambda_zero),
        lambda_zero,
        lambda_norm,
    })
}

/// `W^ω = {v ∈ ξ_p : dα(v, w) = 0 ∀ w ∈ W}`.
pub fn omega_complement(w: &SubspaceBasis) -> Result<SubspaceBasis> {
    let p = &w.point;
    for v in &w.vectors {
        let r = alpha_eval(p, v).abs();
        if r > 1e-9 * v.norm().max(1.0) {
            return Err(Error::NotInContactPlane { residual: r });
        }
    }
    let n = p.n();
    let m = w.xi_matrix();
    if m.ncols() == 0 || m.norm() == 0.0 {
        return Ok(SubspaceBasis::from_xi_matrix(p.clone(), &DMatrix::identity(2 * n, 2 * n)));
    }
    let pairing = m.transpose() * linalg::standard_j(n);
    let k = linalg::null_space(&pairing, REL_TOL);
    Ok(SubspaceBasis::from_xi_matrix(p.clone(), &k))
}

/// Both coisotropy verdicts at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoisotropyReport {
    pub point: Point,
    pub codim: usize,
    pub dim_t_xi: usize,
    pub lambda_zero: bool,
    pub lambda_norm: f64,
    /// `|λ_p| < τ‖α_p‖`: the branch of the wedge test is numerically undecidable.
    pub tangent_ambiguous: bool,
    /// `k > n + 1`: no coisotropic verdict is possible.
    pub short_circuit: bool,
    /// Distance of `(T_pC∩ξ_p)^{dα}` from `T_pC∩ξ_p`.
    pub containment_distance: f64,
    pub containment_verdict: bool,
    /// `max |(dλ)^{n−k+2}|` on `T_pC` (the `λ_p = 0` branch).
    pub wedge_tangent_branch: f64,
    /// `max |λ∧(dλ)^{n−k+1}|` on `T_pC` (the `λ_p ≠ 0` branch).
    pub wedge_transverse_branch: f64,
    pub wedge_verdict: bool,
    pub agreement: bool,
}

impl CoisotropyReport {
    pub fn coisotropic(&self) -> bool {
        self.containment_verdict && self.wedge_verdict
    }
}

/// Classifies `C` at `q` by the containment test and by the wedge test.
pub fn coisotropy_report<C: Chart + ?Sized>(c: &C, q: &[f64], tol: f64) -> Result<CoisotropyReport> {
    let split = tangent_contact_split(c, q)?;
    let n = c.n();
    let k = c.codim();
    let p = split.tangent.point.clone();
    let mut rep = CoisotropyReport {
        point: p.clone(),
        codim: k,
        dim_t_xi: split.tangent_xi.dim(),
        lambda_zero: split.lambda_zero,
        lambda_norm: split.lambda_norm,
        tangent_ambiguous: split.lambda_norm < REL_TOL,
        short_circuit: k > n + 1,
        containment_distance: 1.0,
        containment_verdict: false,
        wedge_tangent_branch: f64::NAN,
        wedge_transverse_branch: f64::NAN,
        wedge_verdict: false,
        agreement: true,
    };
    if rep.short_circuit {
        return Ok(rep);
    }

    let comp = omega_complement(&split.tangent_xi)?;
    rep.containment_distance =
        linalg::containment_distance(&comp.xi_matrix(), &split.tangent_xi.xi_matrix(), REL_TOL);
    rep.containment_verdict = rep.containment_distance <= tol;

    let t = split.tangent.matrix();
    let d = t.ncols();
    let omega = DMatrix::from_fn(d, d, |i, j| {
        let vi = Tangent::from_slice(&t.column(i).iter().copied().collect::<Vec<_>>());
        let vj = Tangent::from_slice(&t.column(j).iter().copied().collect::<Vec<_>>());
        symplectic_pairing(&vi, &vj)
    });
    let anorm = alpha_covector(&p).norm();
    let lam: Vec<f64> = (0..d)
        .map(|j| alpha_eval(&p, &Tangent::from_slice(&t.column(j).iter().copied().collect::<Vec<_>>())) / anorm)
        .collect();
    rep.wedge_tangent_branch = linalg::wedge_power_max(&omega, n + 2 - k);
    rep.wedge_transverse_branch = linalg::lambda_wedge_power_max(&lam, &omega, n + 1 - k);
    let branch = if split.lambda_zero { rep.wedge_tangent_branch } else { rep.wedge_transverse_branch };
    rep.wedge_verdict = branch <= tol;
    rep.agreement = rep.wedge_verdict == rep.containment_verdict;
    Ok(rep)
}

/// `d = n` and both `α` and `dα` vanish on `T_pC` within `tol`. Rank deficiency gives `false`.
pub fn is_legendrian_at<C: Chart + ?Sized>(c: &C, q: &[f64], tol: f64) -> bool {
    if c.param_dim() != c.n() {
        return false;
    }
    let Ok((p, t)) = tangent_frame(c, q) else {
        return false;
    };
    let cols: Vec<Tangent> = linalg::columns(&t).into_iter().map(Tangent::from_vec).collect();
    let a = cols.iter().map(|v| alpha_eval(&p, v).abs()).fold(0.0, f64::max);
    let mut w = 0.0_f64;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            w = w.max(symplectic_pairing(&cols[i], &cols[j]).abs());
        }
    }
    a <= tol && w <= tol
}

/// `ℱ_p = (T_pC ∩ ξ_p)^{dα|ξ}`, checked to lie in `T_pC`.
pub fn characteristic_distribution<C: Chart + ?Sized>(c: &C, q: &[f64]) -> Result<SubspaceBasis> {
    let split = tangent_contact_split(c, q)?;
    let comp = omega_complement(&split.tangent_xi)?;
    let dist = linalg::containment_distance(&comp.matrix(), &split.tangent.matrix(), REL_TOL);
    if dist > 1e-6 {
        return Err(Error::ComplementNotContained { distance: dist });
    }
    Ok(comp)
}

/// Distance of `X_H(p)` from `ℱ_p`, for the vanishing criterion on coisotropic `C`.
pub fn complement_membership<C: Chart + ?Sized>(c: &C, q: &[f64], h: &dyn ScalarField) -> Result<f64> {
    let f = characteristic_distribution(c, q)?;
    let x = vector_at(h, f.point.as_slice());
    let m = linalg::from_columns(x.len(), &[x]);
    Ok(linalg::containment_distance(&m, &f.matrix(), REL_TOL))
}

fn vector_at(h: &dyn ScalarField, p: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; p.len()];
    let mut x = vec![0.0; p.len()];
    vector_field_into(h, 0.0, p, &mut g, &mut x);
    x
}

/// Lie bracket `[X, Y] = DY·X − DX·Y` of two Hamiltonian fields by central differences.
pub fn lie_bracket(a: &dyn ScalarField, b: &dyn ScalarField, p: &[f64], step: f64) -> Vec<f64> {
    let xa = vector_at(a, p);
    let xb = vector_at(b, p);
    let dir = |h: &dyn ScalarField, v: &[f64]| -> Vec<f64> {
        let plus: Vec<f64> = p.iter().zip(v).map(|(x, d)| x + step * d).collect();
        let minus: Vec<f64> = p.iter().zip(v).map(|(x, d)| x - step * d).collect();
        let (fp, fm) = (vector_at(h, &plus), vector_at(h, &minus));
        fp.iter().zip(&fm).map(|(u, w)| (u - w) / (2.0 * step)).collect()
    };
    let db_xa = dir(b, &xa);
    let da_xb = dir(a, &xb);
    db_xa.iter().zip(&da_xb).map(|(u, w)| u - w).collect()
}

/// Result of [`involutivity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvolutivityReport {
    pub samples: usize,
    pub pairs: usize,
    pub max_defining_value: f64,
    /// Relative distance of brackets from `span(ℱ + TC∩ξ)`.
    pub max_bracket_distance: f64,
    /// Relative distance of brackets from `ℱ` alone.
    pub max_bracket_distance_f: f64,
    /// `max ‖X_{fH} − f·X_H‖` on `C` for the multiplier check.
    pub max_multiplier_error: f64,
    pub involutive: bool,
}

/// Brackets of the defining fields at chart samples, plus the multiplier identity
/// `X_{fH} = f·X_H` along `{H = 0}`.
pub fn involutivity_check<C: Chart + ?Sized>(
    defs: &[FieldRef],
    c: &C,
    samples: &[Vec<f64>],
    multiplier: &FieldRef,
    tol: f64,
) -> Result<InvolutivityReport> {
    let mut rep = InvolutivityReport {
        samples: samples.len(),
        pairs: defs.len() * defs.len().saturating_sub(1) / 2,
        max_defining_value: 0.0,
        max_bracket_distance: 0.0,
        max_bracket_distance_f: 0.0,
        max_multiplier_error: 0.0,
        involutive: true,
    };
    let step = 1e-5;
    for q in samples {
        let p = c.eval(q);
        for h in defs {
            let v = h.value(0.0, &p).abs();
            rep.max_defining_value = rep.max_defining_value.max(v);
            if v > tol {
                return Err(Error::Precondition(alloc::format!(
                    "defining function does not vanish on the chart (|H| = {v:e})"
                )));
            }
        }
        let split = tangent_contact_split(c, q)?;
        let comp = omega_complement(&split.tangent_xi)?;
        let mut both = linalg::columns(&split.tangent_xi.matrix());
        both.extend(linalg::columns(&comp.matrix()));
        let span = linalg::from_columns(p.len(), &both);
        let fm = comp.matrix();
        for i in 0..defs.len() {
            for j in i + 1..defs.len() {
                let br = lie_bracket(&*defs[i], &*defs[j], &p, step);
                let nb = linalg::norm(&br);
                if nb <= 1e-8 {
                    continue;
                }
                let m = linalg::from_columns(p.len(), &[br]);
                rep.max_bracket_distance = rep.max_bracket_distance.max(linalg::containment_distance(&m, &span, REL_TOL));
                rep.max_bracket_distance_f = rep.max_bracket_distance_f.max(linalg::containment_distance(&m, &fm, REL_TOL));
            }
        }
        for h in defs {
            let prod = ProductField { f: multiplier.clone(), h: h.clone() };
            let xf = vector_at(&prod, &p);
            let x = vector_at(&**h, &p);
            let f = multiplier.value(0.0, &p);
            let err = xf.iter().zip(&x).map(|(a, b)| (a - f * b).powi(2)).sum::<f64>().sqrt();
            rep.max_multiplier_error = rep.max_multiplier_error.max(err);
        }
    }
    rep.involutive = rep.max_bracket_distance <= 1e-5;
    Ok(rep)
}

/// The `(dα|_W)^{∧m}` magnitude for `W ⊆ ξ_p` given in `(dx⃗, dy⃗)` coordinates.
pub fn restricted_wedge_power(w: &DMatrix<f64>, m: usize) -> f64 {
    let q = linalg::orth(w, REL_TOL);
    linalg::wedge_power_max(&linalg::symplectic_gram(&q), m)
}
