//! Adiabatic elimination of an emitter ensemble coupled to a cavity and a
//! single emitter, with full coherent and dissipative dipole-dipole couplings.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: physical parameters ([`SystemSpec`]) and the coupling
//!   structures ([`CouplingSet`]) derived from emitter geometry.
//! - [`dipole`]: the free-space dipole-dipole interaction and its
//!   dimensionless coherent/dissipative split.
//! - [`cslinalg`]: complex-symmetric eigendecomposition with
//!   transpose-orthonormal eigenvectors, and bilinear forms `Xᵀ M⁻¹ Y`.
//! - [`elimination`]: effective subsystem parameters, dissipator
//!   diagonalisation and validity diagnostics.
//! - [`classical`]: linear (low-excitation) dynamics, driven steady states,
//!   transmission spectra and polariton analysis.
//! - [`quantum`]: dense Lindblad models of the full and effective systems,
//!   used as a brute-force reference.
//!
//! Rates follow the amplitude convention: a dissipator `-γ D(x†, x)` with
//! `D(x, y)ρ = [x, yρ] + [ρx, y]` makes an isolated excited population decay
//! as `exp(-2γt)`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classical;
pub mod cslinalg;
pub mod dipole;
pub mod elimination;
mod error;
pub mod model;
pub mod ode;
pub mod quantum;

pub use error::{Error, Result};
pub use model::{CouplingSet, Subsystem, SystemSpec};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
