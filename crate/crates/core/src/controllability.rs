// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Dynamical Lie algebra of the drift plus first-spin controls.
//!
//! Skew-Hermitian matrices are treated as vectors in a real inner-product
//! space with `⟨A, B⟩ = Re tr(A† B)`. The closure grows an orthonormal basis
//! breadth-first: every commutator of a newly added element with the current
//! basis is projected out against the basis and kept iff the residual is
//! larger than `1e-8` of its own norm.

use serde::{Deserialize, Serialize};

use crate::chain::{heisenberg_hamiltonian, spin_operator, Axis, ChainSpec};
use crate::error::{domain, ControlError, Result};
use crate::linalg::{commutator, CMatrix, C64};

/// Relative residual above which a commutator adds a new direction.
pub const REJECTION_THRESHOLD: f64 = 1e-8;
/// Absolute Frobenius residual below which an element counts as a member.
pub const MEMBERSHIP_THRESHOLD: f64 = 1e-8;
/// Commutators smaller than this are treated as zero.
const NULL_NORM: f64 = 1e-10;

/// Orthonormal basis of a real Lie algebra of skew-Hermitian matrices.
#[derive(Clone, Debug)]
pub struct LieBasis {
    pub dim_ambient: usize,
    pub elements: Vec<CMatrix>,
    /// True when growth stopped because `max_dim` was reached.
    pub truncated: bool,
}

impl LieBasis {
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    fn empty(d: usize) -> Self {
        Self {
            dim_ambient: d,
            elements: Vec::new(),
            truncated: false,
        }
    }

    /// Project `m` out of the span, twice for numerical orthogonality.
    fn residual(&self, m: &CMatrix) -> CMatrix {
        let mut r = m.clone();
        for _ in 0..2 {
            for b in &self.elements {
                let c = inner(b, &r);
                if c != 0.0 {
                    r.zip_apply(b, |x, y| *x -= y * c);
                }
            }
        }
        r
    }

    /// Adds `m` if it has a component outside the span. Returns whether it did.
    fn try_insert(&mut self, m: &CMatrix) -> bool {
        let norm = frobenius(m);
        if norm < NULL_NORM {
            return false;
        }
        let r = self.residual(m);
        let rn = frobenius(&r);
        if rn > REJECTION_THRESHOLD * norm && rn > NULL_NORM {
            self.elements.push(r.map(|z| z / rn));
            true
        } else {
            false
        }
    }

    pub fn contains(&self, element: &CMatrix) -> bool {
        algebra_membership(element, self).0
    }
}

/// `Re tr(A† B)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn frobenius(a: &CMatrix) -> f64 {
    inner(a, a).sqrt()
}

fn is_skew_hermitian(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    m.is_square() && (0..n).all(|i| (i..n).all(|j| (m[(i, j)] + m[(j, i)].conj()).norm() <= tol))
}

/// Smallest real Lie algebra containing `generators`, capped at `max_dim`.
pub fn lie_closure(generators: &[CMatrix], max_dim: usize) -> Result<LieBasis> {
    let Some(first) = generators.first() else {
        return domain("need at least one generator");
    };
    let d = first.nrows();
    for g in generators {
        if g.nrows() != d {
            return Err(ControlError::DimensionMismatch {
                expected: d,
                found: g.nrows(),
            });
        }
        if !is_skew_hermitian(g, 1e-12) {
            return domain("generators must be skew-Hermitian");
        }
    }

    let mut basis = LieBasis::empty(d);
    for g in generators {
        if basis.dimension() >= max_dim {
            basis.truncated = true;
            return Ok(basis);
        }
        basis.try_insert(g);
    }

    let mut frontier = 0;
    loop {
        let sweep_end = basis.dimension();
        let mut grew = false;
        for i in frontier..sweep_end {
            for j in 0..sweep_end {
                if i == j {
                    continue;
                }
                let c = commutator(&basis.elements[i], &basis.elements[j]);
                if basis.try_insert(&c) {
                    grew = true;
                    if basis.dimension() >= max_dim {
                        basis.truncated = basis.dimension() < d * d;
                        return Ok(basis);
                    }
                }
            }
        }
        if !grew {
            return Ok(basis);
        }
        frontier = sweep_end;
    }
}

/// Whether `element` lies in the span of `basis`, with the Frobenius norm of
/// the residual after projection.
pub fn algebra_membership(element: &CMatrix, basis: &LieBasis) -> (bool, f64) {
    let r = frobenius(&basis.residual(element));
    (r < MEMBERSHIP_THRESHOLD, r)
}

/// Which first-spin field components are available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlSet {
    Xy,
    XOnly,
}

/// `{-iH_0, -iS_{1x}}` plus `-iS_{1y}` for xy control.
pub fn control_generators(spec: &ChainSpec, controls: ControlSet) -> Vec<CMatrix> {
    let skew = |m: &CMatrix| m.map(|z| z * C64::new(0.0, -1.0));
    let mut gens = vec![
        skew(heisenberg_hamiltonian(spec).as_matrix()),
        skew(spin_operator(1, Axis::X, spec).expect("site 1").as_matrix()),
    ];
    if controls == ControlSet::Xy {
        gens.push(skew(spin_operator(1, Axis::Y, spec).expect("site 1").as_matrix()));
    }
    gens
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityVerdict {
    pub n_spins: usize,
    pub controls: ControlSet,
    pub hilbert_dim: usize,
    pub algebra_dim: usize,
    /// `d² - 1`, the dimension of su(d).
    pub su_dim: usize,
    /// Algebra is su(d) or u(d).
    pub fully_controllable: bool,
}

pub fn full_controllability_check(spec: &ChainSpec, controls: ControlSet) -> Result<ControllabilityVerdict> {
    let d = spec.dim();
    full_controllability_check_with_limit(spec, controls, d * d)
}

/// As [`full_controllability_check`] with an explicit cap on the closure size.
pub fn full_controllability_check_with_limit(
    spec: &ChainSpec,
    controls: ControlSet,
    max_dim: usize,
) -> Result<ControllabilityVerdict> {
    spec.validate()?;
    let d = spec.dim();
    let basis = lie_closure(&control_generators(spec, controls), max_dim)?;
    if basis.truncated {
        return Err(ControlError::ClosureLimit { max_dim });
    }
    let dim = basis.dimension();
    Ok(ControllabilityVerdict {
        n_spins: spec.n_spins,
        controls,
        hilbert_dim: d,
        algebra_dim: dim,
        su_dim: d * d - 1,
        fully_controllable: dim >= d * d - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{gate_target, GateTarget};

    fn spec(n: usize) -> ChainSpec {
        ChainSpec::with_spins(n).unwrap()
    }

    fn skew(m: &CMatrix) -> CMatrix {
        m.map(|z| z * C64::new(0.0, -1.0))
    }

    #[test]
    fn su2_from_two_spin_components() {
        let s = spec(1);
        let gx = skew(spin_operator(1, Axis::X, &s).unwrap().as_matrix());
        let gy = skew(spin_operator(1, Axis::Y, &s).unwrap().as_matrix());
        let b = lie_closure(&[gx, gy], 16).unwrap();
        assert_eq!(b.dimension(), 3);
        assert!(!b.truncated);
    }

    #[test]
    fn basis_is_orthonormal_and_skew() {
        let b = lie_closure(&control_generators(&spec(2), ControlSet::Xy), 16).unwrap();
        for (i, a) in b.elements.iter().enumerate() {
            assert!(is_skew_hermitian(a, 1e-12));
            for (j, c) in b.elements.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(a, c) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_spins() {
        let xy = full_controllability_check(&spec(2), ControlSet::Xy).unwrap();
        assert_eq!(xy.algebra_dim, 15);
        assert!(xy.fully_controllable);
        let x = full_controllability_check(&spec(2), ControlSet::XOnly).unwrap();
        assert!(x.algebra_dim < 15);
        assert!(!x.fully_controllable);
    }

    #[test]
    fn single_spin_x_only_is_abelian() {
        let v = full_controllability_check(&spec(1), ControlSet::XOnly).unwrap();
        // -iH_0 vanishes for one spin.
        assert_eq!(v.algebra_dim, 1);
        assert!(!v.fully_controllable);
    }

    #[test]
    fn generators_are_members_of_their_closure() {
        let gens = control_generators(&spec(3), ControlSet::XOnly);
        let b = lie_closure(&gens, 64).unwrap();
        for g in &gens {
            let (member, r) = algebra_membership(g, &b);
            assert!(member);
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn closure_is_idempotent() {
        let b = lie_closure(&control_generators(&spec(2), ControlSet::XOnly), 16).unwrap();
        let again = lie_closure(&b.elements, 16).unwrap();
        assert_eq!(again.dimension(), b.dimension());
    }

    #[test]
    fn closure_invariant_under_recombination() {
        let g = control_generators(&spec(2), ControlSet::XOnly);
        let mixed = vec![&g[0] * C64::new(2.0, 0.0) + &g[1], &g[0] - &g[1] * C64::new(0.5, 0.0)];
        let a = lie_closure(&g, 16).unwrap();
        let b = lie_closure(&mixed, 16).unwrap();
        assert_eq!(a.dimension(), b.dimension());
    }

    #[test]
    fn x_end_in_x_only_algebra_for_three_spins() {
        let b = lie_closure(&control_generators(&spec(3), ControlSet::XOnly), 64).unwrap();
        let x3 = gate_target(&GateTarget::x_end(3)).unwrap();
        let a = x3.as_matrix().map(|z| z * C64::new(0.0, -std::f64::consts::FRAC_PI_2));
        let (member, r) = algebra_membership(&a, &b);
        assert!(member, "residual {r}");
        let sy = skew(spin_operator(1, Axis::Y, &spec(3)).unwrap().as_matrix());
        let (member, r) = algebra_membership(&sy, &b);
        assert!(!member);
        assert!(r > 1e-3);
    }

    #[test]
    fn truncation_reported() {
        let err = full_controllability_check_with_limit(&spec(2), ControlSet::Xy, 5).unwrap_err();
        assert_eq!(err, ControlError::ClosureLimit { max_dim: 5 });
    }

    #[test]
    fn rejects_non_skew_generators() {
        let h = spin_operator(1, Axis::X, &spec(1)).unwrap().into_inner();
        assert!(lie_closure(&[h], 4).is_err());
        assert!(lie_closure(&[], 4).is_err());
    }
}
