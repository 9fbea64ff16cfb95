//! Certified numerics for the explicit solution operators of a linearized
//! two-phase flow problem on adjacent half-spaces.
//!
//! The model couples a compressible capillary fluid (Navier-Stokes-Korteweg)
//! in the upper half-space `x_N > 0` with an incompressible viscous fluid
//! (Navier-Stokes) in the lower half-space `x_N < 0`, across a moving
//! interface at `x_N = 0` carrying surface tension. After linearization
//! around a flat interface, Laplace transform in time (resolvent parameter
//! `lambda`) and Fourier transform in the tangential variables (frequency
//! `xi'`, modulus `A = |xi'|`), each interface mode satisfies a two-point
//! boundary-value problem in `x_N` alone that can be solved in closed form.
//!
//! This crate implements that closed form and, more importantly, the
//! numerical certification that it is correct and well behaved:
//!
//! * [`params`] validates the physical constants and derives the capillary
//!   root pair `s_1, s_2` and the asymptotic-regime constants
//!   `omega_1 .. omega_4`.
//! * [`symbols`] computes the characteristic decay rates
//!   `B_plus, B_minus, t_1, t_2` with principal branches, and the
//!   cancellation-free difference kernels `M_{0+}, M_{i+}, M_-`.
//! * [`lopatinski`] builds the Lopatinski determinant of the reduced `2x2`
//!   interface system, verifies its closed-form factorization at every
//!   evaluation, and certifies sector-wide lower bounds for the scaled
//!   determinant and for the kinetic symbol `lambda + K_H` by scanning.
//! * [`multipliers`] evaluates the named solution-formula table
//!   (`Q^pm, P^pm, R^pm, S^pm`), certifies their symbol-class memberships
//!   by stencil-based derivative estimates, and probes the spatial decay of
//!   the reconstructed kernels.
//!
//! Everything downstream is built on these four foundations:
//!
//! * [`mode_solver`] assembles single-mode solutions from the explicit
//!   formulas, checks their residuals against the operative equations, and
//!   synthesizes planar physical-space fields.
//! * [`oracle`] re-solves the same two-point boundary-value problems by
//!   spectral collocation — an independent discretization with no shared
//!   formulas — and compares.
//! * [`config`], [`report`], and [`cli`] drive the companion binary `r2p`:
//!   sectioned config files with command-line overrides, append-only run
//!   directories with self-describing manifests, and the certification
//!   suites themselves.
//!
//! # Conventions
//!
//! Tangential indices `j, m` run over `1 .. N-1` and are 1-based in all
//! public names, matching the usual notation; the vertical component is
//! written `N`. Complex square roots are principal throughout, so all decay
//! rates have positive real part on the resolvent sector. The combined
//! frequency weight is `w = |lambda|^(1/2) + A`.

#![deny(missing_docs)]
#![deny(unsafe_code)]

pub mod cli;
pub mod config;
pub mod lopatinski;
pub mod mode_solver;
pub mod multipliers;
pub mod oracle;
pub mod params;
pub mod report;
pub mod symbols;
