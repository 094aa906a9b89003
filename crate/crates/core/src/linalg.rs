//! Rank-revealing helpers and exterior-algebra evaluation on small subspaces.
//!
//! Subspaces are stored as matrices whose columns span them. Rank decisions use
//! the singular-value threshold `τ = REL_TOL · σ_max`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;

/// Relative singular-value threshold used for rank and membership decisions.
pub const REL_TOL: f64 = 1e-7;

fn sorted_svd(m: &DMatrix<f64>) -> nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    nalgebra::SVD::new(m.clone(), true, true)
}

/// Numerical rank with threshold `rel_tol · σ_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = sorted_svd(m).singular_values;
    let smax = s[0];
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Orthonormal basis of the column space.
pub fn orth(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = sorted_svd(m);
    let smax = svd.singular_values[0];
    if smax == 0.0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let r = svd.singular_values.iter().filter(|&&v| v > rel_tol * smax).count();
    let u = svd.u.expect("u requested");
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of `ker m` with an absolute singular-value threshold.
pub fn null_space_abs(m: &DMatrix<f64>, abs_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // pad to at least square so that V is complete
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = sorted_svd(&padded);
    let vt = svd.v_t.expect("v_t requested");
    let r = svd.singular_values.iter().filter(|&&v| v > abs_tol).count();
    vt.rows(r, cols - r).transpose()
}

/// Orthonormal basis of `ker m` with the relative threshold.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return null_space_abs(m, 0.0);
    }
    let smax = sorted_svd(m).singular_values[0];
    if smax == 0.0 {
        return DMatrix::identity(m.ncols(), m.ncols());
    }
    null_space_abs(m, rel_tol * smax)
}

/// Spectral norm.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    sorted_svd(m).singular_values[0]
}

/// How far `span a` sticks out of `span b`: `‖(I − P_b) Q_a‖₂`, the sine of the
/// largest principal angle from `a` into `b`. Zero iff `span a ⊆ span b`.
pub fn containment_distance(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> f64 {
    let qa = orth(a, rel_tol);
    if qa.ncols() == 0 {
        return 0.0;
    }
    let qb = orth(b, rel_tol);
    if qb.ncols() == 0 {
        return 1.0;
    }
    let resid = &qa - &qb * (qb.transpose() * &qa);
    spectral_norm(&resid).min(1.0)
}

/// Symmetric subspace distance; for equal dimensions the largest principal angle sine.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> f64 {
    let ra = orth(a, rel_tol).ncols();
    let rb = orth(b, rel_tol).ncols();
    if ra != rb {
        return 1.0;
    }
    containment_distance(a, b, rel_tol).max(containment_distance(b, a, rel_tol))
}

/// Pfaffian of an antisymmetric matrix by expansion along the first row.
/// Odd size gives 0, the empty matrix gives 1.
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    let idx: Vec<usize> = (0..m.nrows()).collect();
    pf_rec(m, &idx)
}

fn pf_rec(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
    let k = idx.len();
    if k == 0 {
        return 1.0;
    }
    if k % 2 == 1 {
        return 0.0;
    }
    if k == 2 {
        return m[(idx[0], idx[1])];
    }
    let first = idx[0];
    let mut sum = 0.0;
    let mut rest: Vec<usize> = Vec::with_capacity(k - 2);
    for j in 1..k {
        let a = m[(first, idx[j])];
        if a == 0.0 {
            continue;
        }
        rest.clear();
        rest.extend(idx[1..].iter().enumerate().filter(|&(i, _)| i + 1 != j).map(|(_, &v)| v));
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * a * pf_rec(m, &rest);
    }
    sum
}

/// All `r`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn principal_submatrix(m: &DMatrix<f64>, s: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(s.len(), s.len(), |i, j| m[(s[i], s[j])])
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Largest component `|ω^m(b_S)|` of the `m`-th wedge power of a 2-form with
/// Gram matrix `omega` over all `2m`-subsets `S` of the basis.
/// Components are `m!·Pf(Ω_S)`; the `0`-th power is the constant 1.
pub fn wedge_power_max(omega: &DMatrix<f64>, m: usize) -> f64 {
    let d = omega.nrows();
    if 2 * m > d {
        return 0.0;
    }
    let c = factorial(m);
    combinations(d, 2 * m)
        .iter()
        .map(|s| (c * pfaffian(&principal_submatrix(omega, s))).abs())
        .fold(0.0, f64::max)
}

/// Largest component of `λ∧ω^m` where `λ` has components `a` on the basis.
/// On a `(2m+1)`-subset `S = {s₀ < … < s₂ₘ}` the value is
/// `Σ_r (−1)^r a_{s_r} m! Pf(Ω_{S∖s_r})`.
pub fn lambda_wedge_power_max(a: &[f64], omega: &DMatrix<f64>, m: usize) -> f64 {
    let d = omega.nrows();
    if 2 * m + 1 > d {
        return 0.0;
    }
    let c = factorial(m);
    let mut best = 0.0_f64;
    for s in combinations(d, 2 * m + 1) {
        let mut v = 0.0;
        for r in 0..s.len() {
            let rest: Vec<usize> =
                s.iter().enumerate().filter(|&(i, _)| i != r).map(|(_, &x)| x).collect();
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            v += sign * a[s[r]] * c * pfaffian(&principal_submatrix(omega, &rest));
        }
        best = best.max(v.abs());
    }
    best
}

/// Gram matrix `Ω_ij = ω(v_i, v_j)` of the standard symplectic form on columns
/// given in `(a, b)` coordinates of ℝ²ⁿ.
pub fn symplectic_gram(cols: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = cols.nrows();
    let n = dim / 2;
    let r = cols.ncols();
    DMatrix::from_fn(r, r, |i, j| {
        (0..n).map(|k| cols[(k, i)] * cols[(n + k, j)] - cols[(n + k, i)] * cols[(k, j)]).sum()
    })
}

/// The standard `J` with `ω(v, w) = vᵀ J w`.
pub fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Matrix with the given columns.
pub fn from_columns(rows: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

/// Columns of a matrix as vectors.
pub fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

/// `n × n` identity as nested vectors.
pub fn eye(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}
