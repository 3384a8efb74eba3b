//! Numerical laboratory for the viscoelastic wave equation
//!
//! ```text
//! u_tt − Δu + ∫₀ᵗ g(t−s) Δu(s) ds + a |u_t|^{m(x)−2} u_t = b |u|^{p(x)−2} u   in Ω × (0, T)
//! u = 0 on ∂Ω,   u(·,0) = u₀,   u_t(·,0) = u₁
//! ```
//!
//! on 1D intervals and 2D rectangles. The crate computes the potential-well
//! constants that govern global existence and blow-up, evaluates the explicit
//! energy-decay envelopes for exponentially and polynomially decaying memory
//! kernels, simulates trajectories, and audits them against those bounds.
//!
//! Module map:
//!
//! * [`varexp`]: exponent fields, modulars and Luxemburg norms.
//! * [`kernel`]: relaxation kernels, their masses and decay classes.
//! * [`domain`]: grids, the discrete Laplacian, gradient norms, `ω₁` and the
//!   embedding-constant bound.
//! * [`solver`]: leapfrog time stepping with pointwise implicit damping and
//!   convolution-quadrature memory.
//! * [`energy`]: discrete energies, dissipation rate and identity residuals.
//! * [`analysis`]: stable-set constants, condition reports, decay constants,
//!   envelopes, the integral-inequality oracle and decay fitting.
//! * [`config`] and [`commands`]: the JSON run specification and the
//!   check / simulate / verify / fit / sweep pipelines used by the binary.

// `!(x > 0.0)` is the NaN-rejecting form used throughout for input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod domain;
pub mod energy;
mod error;
pub mod kernel;
pub mod report;
pub mod solver;
pub mod varexp;

pub use domain::{DomainSpec, Field};
pub use error::{Error, Result};
pub use kernel::{KernelKind, RelaxationKernel, XiFunction};
pub use solver::{Outcome, SimConfig, SimState, Trajectory};
pub use varexp::ExponentField;

/// Schema tag carried by every JSON report.
pub const SCHEMA: &str = "viscodecay/1";
