// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate synthesis on isotropic Heisenberg spin chains driven by a
//! piecewise-constant transverse field on the first spin.
//!
//! - [`chain`]: spin operators, drift and control Hamiltonians, gate targets
//! - [`propagation`]: exact piecewise-constant evolution, gate fidelity and
//!   the product-formula propagator for smooth fields
//! - [`optimizer`]: BFGS fidelity maximization with analytic gradients
//! - [`controllability`]: dynamical Lie algebra closure
//! - [`sensitivity`]: Monte-Carlo robustness to static amplitude errors
//! - [`filtering`]: power spectra, low-pass and Gaussian filtering

pub mod chain;
pub mod controllability;
pub mod error;
pub mod filtering;
pub mod linalg;
pub mod optimizer;
pub mod propagation;
pub mod rng;
pub mod sensitivity;

pub use chain::{ChainSpec, ControlAxis, GateKind, GateTarget};
pub use error::{ControlError, Result};
pub use linalg::{HermitianMatrix, UnitaryMatrix};
pub use propagation::{ControlMode, ControlSequence};
