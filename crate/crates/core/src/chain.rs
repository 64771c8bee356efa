// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin operators, the Heisenberg drift Hamiltonian, first-spin control
//! Hamiltonians and gate targets.
//!
//! Basis convention: the computational basis `|s₁ s₂ … s_N⟩` with `s₁` the most
//! significant bit, so basis index `= Σ s_i 2^{N-i}` and spin 1 is the
//! leftmost tensor factor. `|0⟩` is spin up (`S_z = +1/2`). ħ = 1, energies
//! in units of the coupling `J`, times in units of `1/J`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{kron, CMatrix, HermitianMatrix, UnitaryMatrix, C64, I, ONE, ZERO};

/// Chain length and exchange coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_spins: usize,
    #[serde(default = "default_coupling")]
    pub coupling: f64,
}

fn default_coupling() -> f64 {
    1.0
}

impl ChainSpec {
    pub fn new(n_spins: usize, coupling: f64) -> Result<Self> {
        let spec = Self { n_spins, coupling };
        spec.validate()?;
        Ok(spec)
    }

    /// Chain with `J = 1`.
    pub fn with_spins(n_spins: usize) -> Result<Self> {
        Self::new(n_spins, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return domain("chain needs at least one spin");
        }
        if self.n_spins > 12 {
            return domain(format!("{} spins exceeds the dense-matrix limit of 12", self.n_spins));
        }
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return domain(format!("coupling must be positive, got {}", self.coupling));
        }
        Ok(())
    }

    /// Hilbert-space dimension `2^n_spins`.
    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Axes available to the first-spin control field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlAxis {
    X,
    Y,
}

impl From<ControlAxis> for Axis {
    fn from(a: ControlAxis) -> Self {
        match a {
            ControlAxis::X => Axis::X,
            ControlAxis::Y => Axis::Y,
        }
    }
}

pub fn pauli(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// `op` placed on tensor slot `site` (1-based) of an `n`-spin chain.
fn embed(op: &CMatrix, site: usize, n_spins: usize) -> CMatrix {
    let id2 = CMatrix::identity(2, 2);
    let mut out = CMatrix::identity(1, 1);
    for slot in 1..=n_spins {
        out = if slot == site { kron(&out, op) } else { kron(&out, &id2) };
    }
    out
}

/// Local-operator embedding of a `k`-site operator on the last `k` spins.
fn embed_tail(op: &CMatrix, n_spins: usize) -> CMatrix {
    let k = op.nrows().trailing_zeros() as usize;
    let lead = CMatrix::identity(1 << (n_spins - k), 1 << (n_spins - k));
    kron(&lead, op)
}

/// Spin-1/2 operator `S_{site,axis} = σ_axis / 2` on a 1-based site.
pub fn spin_operator(site: usize, axis: Axis, spec: &ChainSpec) -> Result<HermitianMatrix> {
    if site == 0 || site > spec.n_spins {
        return domain(format!("site {site} outside 1..={}", spec.n_spins));
    }
    let half = pauli(axis).map(|z| z * 0.5);
    Ok(HermitianMatrix::new_unchecked(embed(&half, site, spec.n_spins)))
}

/// Total `S_z = Σ_i S_{iz}`; diagonal with entries `(N - 2·popcount)/2`.
pub fn total_sz(spec: &ChainSpec) -> HermitianMatrix {
    let d = spec.dim();
    let n = spec.n_spins as i64;
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        let down = k.count_ones() as i64;
        m[(k, k)] = C64::new((n - 2 * down) as f64 / 2.0, 0.0);
    }
    HermitianMatrix::new_unchecked(m)
}

/// Isotropic nearest-neighbour Heisenberg Hamiltonian
/// `H_0 = J Σ_i S_i · S_{i+1}`.
pub fn heisenberg_hamiltonian(spec: &ChainSpec) -> HermitianMatrix {
    let d = spec.dim();
    let mut h = CMatrix::zeros(d, d);
    // S_i·S_{i+1} = (SWAP_{i,i+1} - 1/2)/2 would also do; build it from the
    // spin operators to keep the definition literal.
    for i in 1..spec.n_spins {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let a = spin_operator(i, axis, spec).expect("site in range");
            let b = spin_operator(i + 1, axis, spec).expect("site in range");
            h += a.as_matrix() * b.as_matrix();
        }
    }
    h *= C64::new(spec.coupling, 0.0);
    // Products of Paulis on distinct sites are Hermitian; drop round-off.
    for z in h.iter_mut() {
        if z.im.abs() < 1e-15 {
            z.im = 0.0;
        }
    }
    HermitianMatrix::new_unchecked(h)
}

/// Zeeman control on the first spin, `amplitude · S_{1,axis}`.
pub fn control_hamiltonian(axis: ControlAxis, amplitude: f64, spec: &ChainSpec) -> HermitianMatrix {
    spin_operator(1, axis.into(), spec)
        .expect("site 1 always exists")
        .scale(amplitude)
}

/// Named gates acting on the end of the chain, or an explicit unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// Pauli X on the last spin.
    XEnd,
    /// CNOT with control = spin N-1, target = spin N.
    CnotEnd,
    /// Principal square root of SWAP on the last two spins.
    SqrtSwapEnd,
    Custom(UnitaryMatrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateTarget {
    pub kind: GateKind,
    pub n_spins: usize,
}

impl GateTarget {
    pub fn new(kind: GateKind, n_spins: usize) -> Self {
        Self { kind, n_spins }
    }

    pub fn x_end(n_spins: usize) -> Self {
        Self::new(GateKind::XEnd, n_spins)
    }

    pub fn cnot_end(n_spins: usize) -> Self {
        Self::new(GateKind::CnotEnd, n_spins)
    }

    pub fn sqrt_swap_end(n_spins: usize) -> Self {
        Self::new(GateKind::SqrtSwapEnd, n_spins)
    }

    pub fn custom(u: UnitaryMatrix) -> Self {
        let n = u.dim().trailing_zeros() as usize;
        Self::new(GateKind::Custom(u), n)
    }

    pub fn unitary(&self) -> Result<UnitaryMatrix> {
        gate_target(self)
    }
}

fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub(crate) fn swap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

fn sqrt_swap() -> CMatrix {
    let p = C64::new(0.5, 0.5);
    let q = C64::new(0.5, -0.5);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = p;
    m[(1, 2)] = q;
    m[(2, 1)] = q;
    m[(2, 2)] = p;
    m[(3, 3)] = ONE;
    m
}

/// SWAP of the last two spins, `I^{⊗(N-2)} ⊗ SWAP`.
pub fn swap_end(n_spins: usize) -> Result<UnitaryMatrix> {
    if n_spins < 2 {
        return domain("SWAP needs at least two spins");
    }
    Ok(UnitaryMatrix::new_unchecked(embed_tail(&swap(), n_spins)))
}

/// Realize a gate target as a `2^N × 2^N` unitary.
pub fn gate_target(target: &GateTarget) -> Result<UnitaryMatrix> {
    let n = target.n_spins;
    if n == 0 {
        return domain("gate target needs at least one spin");
    }
    let m = match &target.kind {
        GateKind::XEnd => embed_tail(&pauli(Axis::X), n),
        GateKind::CnotEnd | GateKind::SqrtSwapEnd if n < 2 => {
            return domain(format!("{:?} needs at least two spins, got {n}", target.kind));
        }
        GateKind::CnotEnd => embed_tail(&cnot(), n),
        GateKind::SqrtSwapEnd => embed_tail(&sqrt_swap(), n),
        GateKind::Custom(u) => {
            if u.dim() != 1 << n {
                return domain(format!(
                    "custom target has dimension {}, chain needs {}",
                    u.dim(),
                    1usize << n
                ));
            }
            return Ok(u.clone());
        }
    };
    Ok(UnitaryMatrix::new_unchecked(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, max_abs_diff, trace};

    fn spec(n: usize) -> ChainSpec {
        ChainSpec::with_spins(n).unwrap()
    }

    #[test]
    fn single_spin_sz() {
        let sz = spin_operator(1, Axis::Z, &spec(1)).unwrap();
        let m = sz.as_matrix();
        assert_eq!(m[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(m[(1, 1)], C64::new(-0.5, 0.0));
        assert_eq!(m[(0, 1)], ZERO);
    }

    #[test]
    fn first_site_sx_two_spins() {
        let sx = spin_operator(1, Axis::X, &spec(2)).unwrap();
        let m = sx.as_matrix();
        let nonzero = [(0, 2), (2, 0), (1, 3), (3, 1)];
        for r in 0..4 {
            for c in 0..4 {
                let want = if nonzero.contains(&(r, c)) { 0.5 } else { 0.0 };
                assert_eq!(m[(r, c)], C64::new(want, 0.0), "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn su2_commutation_every_site() {
        let s = spec(3);
        for site in 1..=3 {
            let x = spin_operator(site, Axis::X, &s).unwrap();
            let y = spin_operator(site, Axis::Y, &s).unwrap();
            let z = spin_operator(site, Axis::Z, &s).unwrap();
            let lhs = commutator(x.as_matrix(), y.as_matrix());
            let rhs = z.as_matrix().map(|w| w * I);
            assert!(max_abs_diff(&lhs, &rhs) < 1e-14);
        }
    }

    #[test]
    fn spin_operators_hermitian_traceless() {
        let s = spec(3);
        for site in 1..=3 {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let op = spin_operator(site, axis, &s).unwrap();
                assert!(HermitianMatrix::new(op.as_matrix().clone()).is_ok());
                assert!(trace(op.as_matrix()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn site_out_of_range() {
        assert!(spin_operator(0, Axis::X, &spec(2)).is_err());
        assert!(spin_operator(3, Axis::X, &spec(2)).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(ChainSpec::new(0, 1.0).is_err());
        assert!(ChainSpec::new(2, 0.0).is_err());
        assert!(ChainSpec::new(2, -1.0).is_err());
        assert!(ChainSpec::new(2, f64::NAN).is_err());
    }

    #[test]
    fn single_spin_drift_is_zero() {
        let h = heisenberg_hamiltonian(&spec(1));
        assert_eq!(h.dim(), 2);
        assert_eq!(max_abs(h.as_matrix()), 0.0);
    }

    #[test]
    fn drift_is_real_traceless_and_conserves_sz() {
        for n in 1..=4 {
            let s = spec(n);
            let h = heisenberg_hamiltonian(&s);
            assert!(h.is_real());
            assert!(trace(h.as_matrix()).norm() < 1e-13);
            let c = commutator(h.as_matrix(), total_sz(&s).as_matrix());
            assert!(max_abs(&c) < 1e-12);
        }
    }

    #[test]
    fn drift_scales_with_coupling() {
        let h1 = heisenberg_hamiltonian(&ChainSpec::new(3, 1.0).unwrap());
        let h2 = heisenberg_hamiltonian(&ChainSpec::new(3, 2.5).unwrap());
        assert!(max_abs_diff(&h1.scale(2.5).into_inner(), h2.as_matrix()) < 1e-14);
    }

    #[test]
    fn controls() {
        let s1 = spec(1);
        assert_eq!(max_abs(control_hamiltonian(ControlAxis::X, 0.0, &s1).as_matrix()), 0.0);
        let hx = control_hamiltonian(ControlAxis::X, 2.0, &s1);
        assert!(max_abs_diff(hx.as_matrix(), &pauli(Axis::X)) < 1e-15);
        let s3 = spec(3);
        for axis in [ControlAxis::X, ControlAxis::Y] {
            let h = control_hamiltonian(axis, 1.3, &s3);
            assert!(HermitianMatrix::new(h.into_inner()).is_ok());
        }
    }

    #[test]
    fn x_end_gates() {
        let x1 = gate_target(&GateTarget::x_end(1)).unwrap();
        assert!(max_abs_diff(x1.as_matrix(), &pauli(Axis::X)) < 1e-15);
        let x3 = gate_target(&GateTarget::x_end(3)).unwrap();
        let m = x3.as_matrix();
        for r in 0..8 {
            for c in 0..8 {
                let want = if r ^ c == 1 { ONE } else { ZERO };
                assert_eq!(m[(r, c)], want);
            }
        }
    }

    #[test]
    fn cnot_two_spins() {
        let u = gate_target(&GateTarget::cnot_end(2)).unwrap();
        let m = u.as_matrix();
        // |00>,|01> fixed; |10> <-> |11>
        assert_eq!(m[(0, 0)], ONE);
        assert_eq!(m[(1, 1)], ONE);
        assert_eq!(m[(3, 2)], ONE);
        assert_eq!(m[(2, 3)], ONE);
        assert_eq!(m[(2, 2)], ZERO);
    }

    #[test]
    fn two_qubit_gates_need_two_spins() {
        assert!(gate_target(&GateTarget::cnot_end(1)).is_err());
        assert!(gate_target(&GateTarget::sqrt_swap_end(1)).is_err());
        assert!(swap_end(1).is_err());
    }

    #[test]
    fn gate_algebra() {
        for n in 2..=4 {
            let d = 1 << n;
            let id = CMatrix::identity(d, d);
            for t in [GateTarget::x_end(n), GateTarget::cnot_end(n)] {
                let u = gate_target(&t).unwrap();
                let sq = u.as_matrix() * u.as_matrix();
                assert!(max_abs_diff(&sq, &id) < 1e-12);
                assert!(max_abs_diff(u.as_matrix(), &u.as_matrix().adjoint()) < 1e-15);
            }
            let r = gate_target(&GateTarget::sqrt_swap_end(n)).unwrap();
            assert!(r.unitarity_deviation() < 1e-12);
            let sq = r.as_matrix() * r.as_matrix();
            assert!(max_abs_diff(&sq, swap_end(n).unwrap().as_matrix()) < 1e-12);
        }
    }

    #[test]
    fn custom_dimension_checked() {
        let t = GateTarget::new(GateKind::Custom(UnitaryMatrix::identity(4)), 3);
        assert!(gate_target(&t).is_err());
        let t = GateTarget::custom(UnitaryMatrix::identity(8));
        assert_eq!(t.n_spins, 3);
        assert!(gate_target(&t).is_ok());
    }
}
