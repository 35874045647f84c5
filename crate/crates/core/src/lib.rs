//! Relativistic Euler equations with Lorentz-invariant artificial viscosity
//! `∂_ν T^{μν} = ε □ u^μ` in 1+1 dimensions.
//!
//! - [`eos`]: barotropic pressure laws with subluminal sound speed.
//! - [`kinematics`]: fluid states, boosts, perfect-fluid stress tensor.
//! - [`jump`]: Rankine–Hugoniot solver and Lax classification.
//! - [`dispersion`]: Fourier–Laplace spectrum of the linearization at rest.
//! - [`profile`]: viscous shock profiles from the scalar traveling-wave ODE.
//! - [`fields`]: grid fields, the nonlinear residual, a method-of-lines
//!   evolver and covariance / classical-limit verifiers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod dispersion;
pub mod eos;
pub mod error;
pub mod exec;
pub mod fields;
pub mod jump;
pub mod kinematics;
pub mod profile;

pub use eos::{EosKind, EosSpec, EquationOfState};
pub use error::{Error, Result};
pub use exec::Execution;
pub use jump::{HugoniotBranch, ShockData, ShockFamily};
pub use kinematics::{FluidState, StressTensor};
