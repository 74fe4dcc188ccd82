//! Recovery of the spatial factor `f(x)` of a separable heat source
//! `F(x, t) = f(x) g(t)` from noisy point measurements of the terminal
//! state `u(·, T)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: CSR matrices, conjugate gradients, a banded Cholesky
//!   factorisation and a dense generalized eigensolver.
//! - [`fem`]: the structured P1 triangulation, mass and stiffness
//!   assembly, point evaluation and the discrete `L²`, `H¹`, `H⁻¹` norms.
//! - [`forward`]: backward-Euler time stepping of the heat equation, its
//!   exact discrete transpose composed with point sampling, and closed-form
//!   modal solutions for the unit Laplacian.
//! - [`sensing`]: sensor layouts, empirical norms, seeded noise and the
//!   measurement file format.
//! - [`inversion`]: the Tikhonov solve in the empirical norm, error metrics,
//!   the a-priori parameter rule and the self-consistent fixed-point
//!   selection of the regularisation parameter.
//! - [`experiments`]: parameter sweeps, Monte Carlo studies, rate checks,
//!   the spectral decay study and CSV/JSON reports.
//!
//! A narrative guide with runnable snippets lives in the `book/` directory
//! at the repository root; its code blocks are compiled as doc-tests of
//! this crate.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fem;
pub mod forward;
pub mod inversion;
pub mod json;
pub mod linalg;
pub mod sensing;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/forward.md")]
    mod forward {}
    #[doc = include_str!("../../../book/src/sensing.md")]
    mod sensing {}
    #[doc = include_str!("../../../book/src/tikhonov.md")]
    mod tikhonov {}
    #[doc = include_str!("../../../book/src/parameter_choice.md")]
    mod parameter_choice {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
