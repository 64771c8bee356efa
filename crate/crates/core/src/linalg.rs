// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrices with role-specific invariants, plus the Hermitian
//! eigensolver and matrix helpers shared by the rest of the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, ControlError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Per-entry tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Max-abs tolerance on `U†U - I` for accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Kronecker product `a ⊗ b`; `a` is the more significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr(a† b)` without forming the product.
pub fn trace_adjoint_product(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    (0..n).all(|i| (i..n).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

/// Max-abs deviation of `U†U` from the identity.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let id = CMatrix::identity(m.nrows(), m.ncols());
    max_abs_diff(&prod, &id)
}

/// A complex square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
        }
        if !is_hermitian(&m, HERMITIAN_TOL) {
            return domain("matrix is not Hermitian within 1e-12");
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        debug_assert!(is_hermitian(&m, 1e-9));
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// True when every entry has a vanishing imaginary part.
    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(ControlError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self(&self.0 + &other.0))
    }

    /// `-i H`, the corresponding element of u(d).
    pub fn to_skew(&self) -> CMatrix {
        self.0.map(|z| -I * z)
    }
}

/// A complex square matrix with `U†U = I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
        }
        let dev = unitarity_deviation(&m);
        if dev.is_nan() || dev >= UNITARY_TOL {
            return domain(format!("matrix is not unitary (deviation {dev:e})"));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Product `self · other`, which acts with `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn with_phase(&self, phi: f64) -> Self {
        let p = C64::from_polar(1.0, phi);
        Self(self.0.map(|z| z * p))
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.0)
    }
}

/// Spectral form `V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Ascending.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*lam);
        }
        scaled * v.adjoint()
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(*lam);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
        }
        scaled * v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Real symmetric inputs take a real-arithmetic fast path. Both paths reduce
/// to tridiagonal form and run implicit-shift QR.
pub fn eigendecompose(h: &HermitianMatrix) -> EigenSystem {
    if h.is_real() {
        let re = h.as_matrix().map(|z| z.re);
        let (vals, vecs) = real_symmetric_eigen(&re);
        EigenSystem {
            eigenvalues: vals,
            eigenvectors: vecs.map(|x| C64::new(x, 0.0)),
        }
    } else {
        let eig = SymmetricEigen::new(h.as_matrix().clone());
        let order = ascending_order(eig.eigenvalues.as_slice());
        let n = order.len();
        let vals = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        EigenSystem {
            eigenvalues: vals,
            eigenvectors: vecs,
        }
    }
}

/// Real symmetric eigenproblem with ascending eigenvalues.
pub(crate) fn real_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let order = ascending_order(eig.eigenvalues.as_slice());
    let n = order.len();
    let vals = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vecs = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

fn ascending_order(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(HermitianMatrix::new(m), Err(ControlError::Domain(_))));
        let rect = CMatrix::zeros(2, 3);
        assert!(HermitianMatrix::new(rect).is_err());
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), ZERO, ZERO, ONE]);
        assert!(UnitaryMatrix::new(m).is_err());
    }

    #[test]
    fn diagonal_eigensystem() {
        let h = HermitianMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[ONE, ZERO, ZERO, c(-1.0, 0.0)],
        ))
        .unwrap();
        let es = eigendecompose(&h);
        assert_eq!(es.eigenvalues.as_slice(), &[-1.0, 1.0]);
        // column-permuted identity up to sign
        assert!((es.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((es.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
        assert!(es.eigenvectors[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn pauli_x_eigensystem() {
        let h = HermitianMatrix::new(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])).unwrap();
        let es = eigendecompose(&h);
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = es.eigenvectors.column(0);
        // (1, -1)/sqrt 2 up to phase
        let overlap = (v0[0] * s - v0[1] * s).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(&es.reconstruct(), h.as_matrix()) < 1e-12);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let h = HermitianMatrix::new(CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.0),
                c(0.5, -0.25),
                c(0.0, 2.0),
                c(0.5, 0.25),
                c(-0.3, 0.0),
                c(1.0, 1.0),
                c(0.0, -2.0),
                c(1.0, -1.0),
                c(0.7, 0.0),
            ],
        ))
        .unwrap();
        let es = eigendecompose(&h);
        assert!(max_abs_diff(&es.reconstruct(), h.as_matrix()) < 1e-10);
        assert!(unitarity_deviation(&es.eigenvectors) < 1e-10);
        assert!(es.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }
}
