//! Coordinates `(x⃗, y⃗, z)` on ℝ²ⁿ⁺¹ or 𝕋ⁿ × ℝⁿ⁺¹ and vectors in the same frame.
//!
//! Every coordinate object stores its components flat as
//! `[x₁ … xₙ, y₁ … yₙ, z]`, which is also the layout used by the integrators.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::Float;

use crate::error::{Error, Result};

macro_rules! frame_vector {
    ($name:ident, $x:ident, $y:ident, $z:ident) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            n: usize,
            data: Vec<f64>,
        }

        impl $name {
            pub fn new(x: &[f64], y: &[f64], z: f64) -> Self {
                assert_eq!(x.len(), y.len(), "x and y blocks must have equal length");
                let mut data = Vec::with_capacity(2 * x.len() + 1);
                data.extend_from_slice(x);
                data.extend_from_slice(y);
                data.push(z);
                Self { n: x.len(), data }
            }

            pub fn zeros(n: usize) -> Self {
                Self { n, data: vec![0.0; 2 * n + 1] }
            }

            /// Builds from a flat `[x, y, z]` slice of odd length.
            pub fn from_slice(flat: &[f64]) -> Self {
                assert!(flat.len() % 2 == 1, "flat coordinates must have odd length");
                Self { n: flat.len() / 2, data: flat.to_vec() }
            }

            pub fn from_vec(flat: Vec<f64>) -> Self {
                assert!(flat.len() % 2 == 1, "flat coordinates must have odd length");
                Self { n: flat.len() / 2, data: flat }
            }

            /// Half-dimension `n`.
            #[inline]
            pub fn n(&self) -> usize {
                self.n
            }

            #[inline]
            pub fn dim(&self) -> usize {
                2 * self.n + 1
            }

            #[inline]
            pub fn $x(&self) -> &[f64] {
                &self.data[..self.n]
            }

            #[inline]
            pub fn $y(&self) -> &[f64] {
                &self.data[self.n..2 * self.n]
            }

            #[inline]
            pub fn $z(&self) -> f64 {
                self.data[2 * self.n]
            }

            #[inline]
            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            #[inline]
            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.data
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.data
            }

            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|c| c.is_finite())
            }

            pub fn norm(&self) -> f64 {
                self.data.iter().map(|c| c * c).sum::<f64>().sqrt()
            }

            pub fn dot(&self, other: &Self) -> f64 {
                self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
            }

            /// Componentwise comparison with absolute tolerance.
            pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
                self.n == other.n
                    && self.data.iter().zip(&other.data).all(|(a, b)| (a - b).abs() <= tol)
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.data[i]
            }
        }

        impl IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.data[i]
            }
        }
    };
}

frame_vector!(Point, x, y, z);
frame_vector!(Tangent, dx, dy, dz);
frame_vector!(Covector, dx, dy, dz);

impl Tangent {
    /// Coordinate basis vector with index into the flat layout.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut t = Self::zeros(n);
        t.data[index] = 1.0;
        t
    }

    pub fn partial_x(n: usize, j: usize) -> Self {
        Self::basis(n, j)
    }

    pub fn partial_y(n: usize, j: usize) -> Self {
        Self::basis(n, n + j)
    }

    /// The Reeb field `∂_z` of the standard form.
    pub fn partial_z(n: usize) -> Self {
        Self::basis(n, 2 * n)
    }
}

impl Add for &Tangent {
    type Output = Tangent;
    fn add(self, rhs: &Tangent) -> Tangent {
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Tangent { n: self.n, data }
    }
}

impl Sub for &Tangent {
    type Output = Tangent;
    fn sub(self, rhs: &Tangent) -> Tangent {
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Tangent { n: self.n, data }
    }
}

impl Mul<&Tangent> for f64 {
    type Output = Tangent;
    fn mul(self, rhs: &Tangent) -> Tangent {
        Tangent { n: rhs.n, data: rhs.data.iter().map(|c| self * c).collect() }
    }
}

impl Neg for Tangent {
    type Output = Tangent;
    fn neg(mut self) -> Tangent {
        self.data.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Point {
    /// `p + s·v` in the universal cover (no wrapping).
    pub fn offset(&self, v: &Tangent, s: f64) -> Point {
        let data = self.data.iter().zip(v.as_slice()).map(|(a, b)| a + s * b).collect();
        Point { n: self.n, data }
    }

    pub fn origin(n: usize) -> Point {
        Point::zeros(n)
    }
}

impl Covector {
    /// Pairing `c(v)`.
    pub fn apply(&self, v: &Tangent) -> f64 {
        self.data.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum()
    }
}

/// Topology of the x-block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XTopology {
    #[default]
    Euclidean,
    /// x-coordinates live in ℝ/ℤ.
    Torus,
}

/// Axis-aligned box in flat coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Cuboid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Cuboid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.iter().chain(&hi).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("box bounds"));
        }
        Ok(Self { lo, hi })
    }

    /// Cube `center ± half_width` in every coordinate.
    pub fn centered(center: &[f64], half_width: f64) -> Self {
        Self {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| h <= l)
    }

    pub fn lebesgue_volume(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (l, h))| *c >= *l && *c <= *h)
    }

    /// `other ⊆ self`.
    pub fn contains_box(&self, other: &Cuboid) -> bool {
        self.dim() == other.dim()
            && self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| b <= a)
    }

    /// `other` lies in the interior of `self`.
    pub fn strictly_contains_box(&self, other: &Cuboid) -> bool {
        self.dim() == other.dim()
            && self.lo.iter().zip(&other.lo).all(|(a, b)| a < b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| b < a)
    }

    /// Tensor grid of `per_axis` points per axis including the faces.
    pub fn grid(&self, per_axis: usize) -> GridIter<'_> {
        GridIter::new(self, per_axis, false)
    }

    /// Cell midpoints of a tensor grid with `per_axis` cells per axis.
    pub fn midpoints(&self, per_axis: usize) -> GridIter<'_> {
        GridIter::new(self, per_axis, true)
    }

    /// Points on the boundary faces of a `per_axis` tensor grid.
    pub fn boundary_grid(&self, per_axis: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
        let last = per_axis.saturating_sub(1);
        self.grid_indices(per_axis)
            .filter(move |idx| idx.iter().any(|&i| i == 0 || i == last))
            .map(move |idx| self.node(&idx, per_axis))
    }

    fn grid_indices(&self, per_axis: usize) -> impl Iterator<Item = Vec<usize>> {
        let dim = self.dim();
        let total = per_axis.pow(dim as u32);
        (0..total).map(move |mut k| {
            let mut idx = vec![0; dim];
            for slot in idx.iter_mut() {
                *slot = k % per_axis;
                k /= per_axis;
            }
            idx
        })
    }

    fn node(&self, idx: &[usize], per_axis: usize) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &i)| {
                if per_axis <= 1 {
                    0.5 * (self.lo[a] + self.hi[a])
                } else {
                    self.lo[a] + (self.hi[a] - self.lo[a]) * i as f64 / (per_axis - 1) as f64
                }
            })
            .collect()
    }
}

/// Iterator over a tensor grid of a [`Cuboid`].
pub struct GridIter<'a> {
    cuboid: &'a Cuboid,
    per_axis: usize,
    midpoints: bool,
    next: usize,
    total: usize,
}

impl<'a> GridIter<'a> {
    fn new(cuboid: &'a Cuboid, per_axis: usize, midpoints: bool) -> Self {
        let total = if per_axis == 0 { 0 } else { per_axis.pow(cuboid.dim() as u32) };
        Self { cuboid, per_axis, midpoints, next: 0, total }
    }
}

impl Iterator for GridIter<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.next >= self.total {
            return None;
        }
        let mut k = self.next;
        self.next += 1;
        let c = self.cuboid;
        let m = self.per_axis;
        let mut out = Vec::with_capacity(c.dim());
        for a in 0..c.dim() {
            let i = k % m;
            k /= m;
            let w = c.hi[a] - c.lo[a];
            let v = if self.midpoints {
                c.lo[a] + w * (i as f64 + 0.5) / m as f64
            } else if m == 1 {
                c.lo[a] + 0.5 * w
            } else {
                c.lo[a] + w * i as f64 / (m - 1) as f64
            };
            out.push(v);
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.total - self.next;
        (r, Some(r))
    }
}

impl ExactSizeIterator for GridIter<'_> {}

/// The ambient contact manifold: ℝ²ⁿ⁺¹ or the torus model 𝕋ⁿ × ℝⁿ⁺¹.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSpace {
    n: usize,
    topology: XTopology,
    bounds: Option<Cuboid>,
}

impl AmbientSpace {
    pub fn euclidean(n: usize) -> Self {
        assert!(n >= 1, "half-dimension must be positive");
        Self { n, topology: XTopology::Euclidean, bounds: None }
    }

    pub fn torus(n: usize) -> Self {
        assert!(n >= 1, "half-dimension must be positive");
        Self { n, topology: XTopology::Torus, bounds: None }
    }

    pub fn with_bounds(mut self, bounds: Cuboid) -> Result<Self> {
        if bounds.dim() != 2 * self.n + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * self.n + 1, found: bounds.dim() });
        }
        self.bounds = Some(bounds);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn topology(&self) -> XTopology {
        self.topology
    }

    pub fn bounds(&self) -> Option<&Cuboid> {
        self.bounds.as_ref()
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.n() != self.n || !p.is_finite() {
            return false;
        }
        match &self.bounds {
            None => true,
            Some(b) => {
                let mut q = p.clone();
                if self.topology == XTopology::Torus {
                    // the x-block of a torus box is compared on the cover
                    for j in 0..self.n {
                        let lo = b.lo[j];
                        let w = q[j] - lo;
                        q[j] = lo + (w - w.floor());
                    }
                }
                b.contains(q.as_slice())
            }
        }
    }

    /// Canonical representative: torus x-coordinates reduced into `[0, 1)`.
    pub fn normalize(&self, p: &Point) -> Point {
        let mut q = p.clone();
        if self.topology == XTopology::Torus {
            for j in 0..self.n {
                let r = q[j] - q[j].floor();
                q[j] = if r >= 1.0 { 0.0 } else { r };
            }
        }
        q
    }

    /// Displacement `b − a` using the minimal representative on the torus.
    pub fn difference(&self, a: &Point, b: &Point) -> Tangent {
        let mut d: Vec<f64> = b.as_slice().iter().zip(a.as_slice()).map(|(p, q)| p - q).collect();
        if self.topology == XTopology::Torus {
            for c in d.iter_mut().take(self.n) {
                *c -= (*c).round();
            }
        }
        Tangent::from_vec(d)
    }

    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        self.difference(a, b).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_difference_uses_minimal_representative() {
        let space = AmbientSpace::torus(1);
        let a = Point::new(&[0.95], &[0.0], 0.0);
        let b = Point::new(&[0.05], &[0.0], 0.0);
        let d = space.difference(&a, &b);
        assert!((d[0] - 0.1).abs() < 1e-12);
        assert!((space.distance(&a, &b) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn torus_normalize_into_unit_interval() {
        let space = AmbientSpace::torus(2);
        let p = space.normalize(&Point::new(&[-0.25, 3.5], &[1.0, 2.0], 3.0));
        assert_eq!(p.x(), &[0.75, 0.5]);
        assert_eq!(p.y(), &[1.0, 2.0]);
    }

    #[test]
    fn grid_counts_and_faces() {
        let b = Cuboid::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(b.grid(3).count(), 9);
        assert_eq!(b.boundary_grid(3).count(), 8);
        let mids: Vec<_> = b.midpoints(2).collect();
        assert_eq!(mids[0], vec![0.25, 0.5]);
        assert_eq!(b.lebesgue_volume(), 2.0);
    }

    #[test]
    fn degenerate_box_has_zero_volume() {
        let b = Cuboid::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(b.is_degenerate());
        assert_eq!(b.lebesgue_volume(), 0.0);
    }
}
