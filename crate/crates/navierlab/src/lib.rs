//! Numerical laboratory for shifted polyharmonic boundary value problems
//! on planar domains.
//!
//! The product `∏_{i=1..m} (-Δ + α_i) u = f(u)` with zero boundary data
//! on every intermediate component splits into a cascade of m coupled
//! second-order problems `(-Δ + α_i) u_i = u_{i+1}`, closed by
//! `(-Δ + α_m) u_m = f(u_1)`. This crate discretizes the cascade with the
//! five-point stencil on domains that are symmetric and convex in the
//! `x1` direction, solves it by damped Picard iteration over conjugate
//! gradients, and then *measures* the structure theory:
//!
//! * plane descent ([`verify::sweep_mu`]) — slides the reflection plane
//!   from the right edge to zero and checks the reflected solution
//!   dominates on every cap, the discrete form of symmetry and
//!   monotonicity in `x1`;
//! * shift-sign equivalence ([`symcoeffs`]) — all shifts nonnegative iff
//!   all elementary symmetric coefficients nonnegative;
//! * coupling bounds ([`verify::compute_c`]) — the linearized coupling
//!   stays inside `[0, L]` for admissible source terms;
//! * punctured-domain tools ([`verify::green`], [`verify::barrier`]) —
//!   the disc Green function as a singular first component and the
//!   logarithmic barrier inequality near the puncture.
//!
//! The [`experiment`] module wires everything into a reproducible
//! file-based run; the `navierlab` binary is a thin CLI over it.

// Validation guards deliberately use the `!(x > 0.0)` form: the negation
// is true for NaN, so non-finite inputs fail closed instead of slipping
// past an `x <= 0.0` test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod discretize;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod solver;
pub mod symcoeffs;
pub mod verify;

pub use error::Error;
