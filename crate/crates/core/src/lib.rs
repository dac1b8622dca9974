//! Numerical laboratory for the scale-free shape functional
//!
//! ```text
//! F_q(Ω) = λ(Ω) T(Ω)^q / |Ω|^{α_q},   α_q = (q(d + 2) − 2) / d
//! ```
//!
//! where `T` is the torsional rigidity and `λ` the principal Dirichlet
//! eigenvalue of the Laplacian.
//!
//! The crate is organized by capability:
//!
//! - [`analytic`]: closed-form balls, boxes and thin slabs (the oracles).
//! - [`geometry`]: 2D star-shaped domains `ρ(θ) = 1 + φ(θ)` with a Fourier
//!   boundary, normalization, the nearly spherical class check, meshing.
//! - [`fem`]: P1 finite elements for `T` and `λ` on meshed star domains.
//! - [`capacitary`]: grid solver for potential measures `μ = V dx` on a box,
//!   γ-distance, measure scaling, derivative and L∞ bound checks.
//! - [`functionals`]: the `F_q` engine and inequality verifiers.
//! - [`optimizer`]: Nelder-Mead search for maximizers of `F_q`, stability
//!   constants near the disk and q-sweeps.
//! - [`cli`]: the pipeline behind the `shapeopt` binary.
//!
//! Runnable examples live in `examples/`, one per capability.

pub mod analytic;
pub mod capacitary;
pub mod cli;
pub mod error;
pub mod fem;
pub mod functionals;
pub mod geometry;
pub mod nelder_mead;
pub mod optimizer;
pub mod report;
pub mod sparse;

pub use error::{Error, Result};
