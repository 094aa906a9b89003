//! Numerical contact geometry for the standard structure `α = dz − Σ yⱼ dxⱼ`.
//!
//! The crate is `no_std` with `alloc`. It covers contact Hamiltonian flows with
//! conformal-factor tracking, pointwise coisotropy classification, cutoff
//! disjunction-energy bounds, the collapse flows toward a Legendrian torus and
//! the graph-action sequence built from stacked stage Hamiltonians.
#![no_std]
// recent toolchains give core its own float methods, which shadow the libm-backed trait
#![allow(unused_imports)]

extern crate alloc;

pub mod bo;
pub mod collapse;
pub mod coords;
pub mod error;
pub mod energy;
pub mod field;
pub mod flow;
pub mod form;
pub mod linalg;
pub mod ode;
pub mod pullback;
pub mod quad;
pub mod smooth;
pub mod submanifold;

pub use coords::{AmbientSpace, Covector, Cuboid, Point, Tangent, XTopology};
pub use error::{Error, Result};
