// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the control library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The phase of tr(U†W) is ill-defined when the fidelity vanishes.
    #[error("fidelity gradient undefined: tr(U^dagger W) is zero")]
    UndefinedGradient,

    #[error("Lie closure reached {max_dim} elements without terminating")]
    ClosureLimit { max_dim: usize },
}

pub type Result<T> = std::result::Result<T, ControlError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(ControlError::Domain(msg.into()))
}
