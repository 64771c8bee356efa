// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution under first-spin controls.
//!
//! Piecewise-constant sequences are propagated exactly, one spectral-form
//! exponential per pulse. Time-varying (filtered) fields go through a
//! first-order product formula that samples the field at the left edge of
//! each step and stays unitary for any step size.
//!
//! Every transverse first-spin field is a rotation about the total-`S_z` axis
//! of a pure x field, and the isotropic drift is invariant under that
//! rotation:
//!
//! `H_0 + h_x S_{1x} + h_y S_{1y} = R_φ (H_0 + ρ S_{1x}) R_φ†`,
//! `R_φ = exp(-i φ S_z^tot)`, `ρ e^{iφ} = h_x + i h_y`.
//!
//! `R_φ` is diagonal, so every pulse only needs a real symmetric
//! eigendecomposition. [`propagator_step`] keeps the general complex path.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::{heisenberg_hamiltonian, spin_operator, total_sz, Axis, ChainSpec, ControlAxis};
use crate::error::{domain, ControlError, Result};
use crate::linalg::{
    eigendecompose, real_symmetric_eigen, trace_adjoint_product, CMatrix, HermitianMatrix,
    UnitaryMatrix, C64,
};

/// Which axis each pulse uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMode {
    /// Pulses alternate x, y, x, y, …; amplitudes are stored `x₁, y₁, x₂, y₂, …`.
    AlternatingXy,
    XOnly,
}

impl ControlMode {
    pub fn axis_of(self, pulse: usize) -> ControlAxis {
        match self {
            ControlMode::XOnly => ControlAxis::X,
            ControlMode::AlternatingXy if pulse % 2 == 0 => ControlAxis::X,
            ControlMode::AlternatingXy => ControlAxis::Y,
        }
    }
}

/// Piecewise-constant control: `N_t` pulses of equal duration `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence {
    pub spec: ChainSpec,
    pub mode: ControlMode,
    pub pulse_duration: f64,
    pub amplitudes: Vec<f64>,
}

impl ControlSequence {
    pub fn new(
        spec: ChainSpec,
        mode: ControlMode,
        pulse_duration: f64,
        amplitudes: Vec<f64>,
    ) -> Result<Self> {
        let seq = Self {
            spec,
            mode,
            pulse_duration,
            amplitudes,
        };
        seq.validate()?;
        Ok(seq)
    }

    /// All-zero sequence with `T = total_time / n_pulses`.
    pub fn zeros(spec: ChainSpec, mode: ControlMode, n_pulses: usize, total_time: f64) -> Result<Self> {
        if n_pulses == 0 {
            return domain("sequence needs at least one pulse");
        }
        Self::new(spec, mode, total_time / n_pulses as f64, vec![0.0; n_pulses])
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.amplitudes.is_empty() {
            return domain("sequence needs at least one pulse");
        }
        if !(self.pulse_duration.is_finite() && self.pulse_duration > 0.0) {
            return domain(format!("pulse duration must be positive, got {}", self.pulse_duration));
        }
        if self.mode == ControlMode::AlternatingXy && self.amplitudes.len() % 2 != 0 {
            return domain(format!(
                "alternating x/y control needs an even pulse count, got {}",
                self.amplitudes.len()
            ));
        }
        if let Some(k) = self.amplitudes.iter().position(|h| !h.is_finite()) {
            return domain(format!("amplitude {k} is not finite"));
        }
        Ok(())
    }

    pub fn n_pulses(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn total_time(&self) -> f64 {
        self.pulse_duration * self.amplitudes.len() as f64
    }

    pub fn axis_of(&self, pulse: usize) -> ControlAxis {
        self.mode.axis_of(pulse)
    }

    /// `(h_x, h_y)` active during pulse `k` (0-based).
    pub fn field_of(&self, pulse: usize) -> [f64; 2] {
        let h = self.amplitudes[pulse];
        match self.axis_of(pulse) {
            ControlAxis::X => [h, 0.0],
            ControlAxis::Y => [0.0, h],
        }
    }

    /// Same structure, new amplitudes.
    pub fn with_amplitudes(&self, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != self.amplitudes.len() {
            return Err(ControlError::DimensionMismatch {
                expected: self.amplitudes.len(),
                found: amplitudes.len(),
            });
        }
        Self::new(self.spec, self.mode, self.pulse_duration, amplitudes)
    }

    /// Piecewise-constant field value at time `t`; zero outside `[0, t_f]`.
    pub fn field_at(&self, t: f64) -> [f64; 2] {
        if t < 0.0 || t > self.total_time() * (1.0 + 1e-15) {
            return [0.0, 0.0];
        }
        // Sample points on pulse boundaries belong to the later pulse.
        let k = ((t / self.pulse_duration) + 1e-9).floor() as usize;
        self.field_of(k.min(self.n_pulses() - 1))
    }

    /// `[t_start, t_end)` of pulse `k`.
    pub fn interval(&self, pulse: usize) -> (f64, f64) {
        let t = self.pulse_duration;
        (pulse as f64 * t, (pulse + 1) as f64 * t)
    }
}

/// Precomputed real operators for one chain, used on every hot path.
#[derive(Clone, Debug)]
pub struct ChainPropagator {
    spec: ChainSpec,
    drift: DMatrix<f64>,
    sx1: DMatrix<f64>,
    /// Diagonal of total `S_z`.
    magnetization: Vec<f64>,
}

/// Spectral data of one constant-field step.
pub(crate) struct StepSpectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl ChainPropagator {
    pub fn new(spec: &ChainSpec) -> Self {
        let drift = heisenberg_hamiltonian(spec).as_matrix().map(|z| z.re);
        let sx1 = spin_operator(1, Axis::X, spec)
            .expect("site 1 exists")
            .as_matrix()
            .map(|z| z.re);
        let magnetization = total_sz(spec).as_matrix().diagonal().iter().map(|z| z.re).collect();
        Self {
            spec: *spec,
            drift,
            sx1,
            magnetization,
        }
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub(crate) fn sx1(&self) -> &DMatrix<f64> {
        &self.sx1
    }

    /// Eigensystem of the real symmetric `H_0 + ρ S_{1x}`.
    pub(crate) fn x_spectrum(&self, rho: f64) -> StepSpectrum {
        let h = &self.drift + &self.sx1 * rho;
        let (values, vectors) = real_symmetric_eigen(&h);
        StepSpectrum { values, vectors }
    }

    /// `V diag(e^{-iλτ}) Vᵀ` for a real eigenbasis.
    pub(crate) fn exp_from_spectrum(sp: &StepSpectrum, duration: f64) -> CMatrix {
        let d = sp.values.len();
        let phases: Vec<C64> = sp
            .values
            .iter()
            .map(|l| C64::from_polar(1.0, -l * duration))
            .collect();
        let v = &sp.vectors;
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += phases[k] * (v[(i, k)] * v[(j, k)]);
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Conjugate by the diagonal rotation `R_φ = exp(-iφ S_z^tot)` in place.
    pub(crate) fn rotate_z(&self, m: &mut CMatrix, phi: f64) {
        if phi == 0.0 {
            return;
        }
        let d = self.dim();
        for j in 0..d {
            for i in 0..d {
                let angle = -phi * (self.magnetization[i] - self.magnetization[j]);
                m[(i, j)] *= C64::from_polar(1.0, angle);
            }
        }
    }

    /// Rotation angle taking the x axis to the given control axis.
    pub(crate) fn axis_angle(axis: ControlAxis) -> f64 {
        match axis {
            ControlAxis::X => 0.0,
            ControlAxis::Y => std::f64::consts::FRAC_PI_2,
        }
    }

    /// `exp(-i (H_0 + h_x S_{1x} + h_y S_{1y}) τ)`.
    pub fn step(&self, field: [f64; 2], duration: f64) -> CMatrix {
        let [hx, hy] = field;
        let rho = hx.hypot(hy);
        let phi = if rho == 0.0 { 0.0 } else { hy.atan2(hx) };
        let sp = self.x_spectrum(rho);
        let mut u = Self::exp_from_spectrum(&sp, duration);
        self.rotate_z(&mut u, phi);
        u
    }

    /// Propagator of a whole piecewise-constant sequence (no validation).
    pub(crate) fn evolve_unchecked(&self, seq: &ControlSequence) -> CMatrix {
        let d = self.dim();
        let mut u = CMatrix::identity(d, d);
        for k in 0..seq.n_pulses() {
            let step = self.step(seq.field_of(k), seq.pulse_duration);
            u = step * u;
        }
        u
    }
}

/// `exp(-i H τ)` through the spectral form of an arbitrary Hermitian `H`.
pub fn propagator_step(h: &HermitianMatrix, duration: f64) -> Result<UnitaryMatrix> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return domain(format!("duration must be finite and non-negative, got {duration}"));
    }
    let es = eigendecompose(h);
    Ok(UnitaryMatrix::new_unchecked(
        es.apply_fn(|l| C64::from_polar(1.0, -l * duration)),
    ))
}

/// Full propagator `U(t_f) = U_{N_t} ⋯ U_2 U_1`; the first pulse acts first.
pub fn evolve_sequence(seq: &ControlSequence) -> Result<UnitaryMatrix> {
    seq.validate()?;
    let prop = ChainPropagator::new(&seq.spec);
    Ok(UnitaryMatrix::new_unchecked(prop.evolve_unchecked(seq)))
}

/// Phase-insensitive gate fidelity `|tr(U† W)| / d`.
pub fn gate_fidelity(u: &UnitaryMatrix, target: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != target.dim() {
        return Err(ControlError::DimensionMismatch {
            expected: target.dim(),
            found: u.dim(),
        });
    }
    Ok(fidelity_raw(u.as_matrix(), target.as_matrix()))
}

pub(crate) fn fidelity_raw(u: &CMatrix, target: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    (trace_adjoint_product(u, target).norm() / d).min(1.0)
}

/// A time-dependent first-spin field `t ↦ (h_x(t), h_y(t))` on `[0, t_f]`.
pub trait ControlField: Send + Sync {
    fn total_time(&self) -> f64;
    fn pulse_duration(&self) -> f64;
    fn n_pulses(&self) -> usize;
    fn eval(&self, t: f64) -> [f64; 2];
}

impl ControlField for ControlSequence {
    fn total_time(&self) -> f64 {
        ControlSequence::total_time(self)
    }
    fn pulse_duration(&self) -> f64 {
        self.pulse_duration
    }
    fn n_pulses(&self) -> usize {
        ControlSequence::n_pulses(self)
    }
    fn eval(&self, t: f64) -> [f64; 2] {
        self.field_at(t)
    }
}

/// A control field together with the product-formula step `τ = T / m_T`.
#[derive(Clone)]
pub struct SampledField {
    field: Arc<dyn ControlField>,
    steps_per_pulse: usize,
}

impl std::fmt::Debug for SampledField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledField")
            .field("total_time", &self.field.total_time())
            .field("steps_per_pulse", &self.steps_per_pulse)
            .finish()
    }
}

impl SampledField {
    pub fn new(field: Arc<dyn ControlField>, steps_per_pulse: usize) -> Result<Self> {
        if steps_per_pulse == 0 {
            return domain("need at least one product-formula step per pulse");
        }
        Ok(Self {
            field,
            steps_per_pulse,
        })
    }

    /// Build from an explicit step `τ`, which must divide the pulse duration.
    pub fn with_step(field: Arc<dyn ControlField>, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return domain(format!("step must be positive, got {tau}"));
        }
        let ratio = field.pulse_duration() / tau;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
            return domain(format!(
                "step {tau} does not divide the pulse duration {}",
                field.pulse_duration()
            ));
        }
        Self::new(field, m as usize)
    }

    pub fn steps_per_pulse(&self) -> usize {
        self.steps_per_pulse
    }

    pub fn tau(&self) -> f64 {
        self.field.pulse_duration() / self.steps_per_pulse as f64
    }

    pub fn total_steps(&self) -> usize {
        self.field.n_pulses() * self.steps_per_pulse
    }

    pub fn field(&self) -> &Arc<dyn ControlField> {
        &self.field
    }

    /// Same field, step halved.
    pub fn refined(&self) -> Self {
        Self {
            field: Arc::clone(&self.field),
            steps_per_pulse: self.steps_per_pulse * 2,
        }
    }
}

/// Product-formula propagator
/// `Ũ(t_f) = e^{-iH^{(m_f-1)}τ} ⋯ e^{-iH^{(0)}τ}` with the field sampled at
/// `kτ`.
pub fn product_formula_evolve(field: &SampledField, spec: &ChainSpec) -> Result<UnitaryMatrix> {
    spec.validate()?;
    let prop = ChainPropagator::new(spec);
    Ok(UnitaryMatrix::new_unchecked(product_formula_with(&prop, field)))
}

pub(crate) fn product_formula_with(prop: &ChainPropagator, field: &SampledField) -> CMatrix {
    let d = prop.dim();
    let tau = field.tau();
    let m_t = field.steps_per_pulse;
    let pulse = field.field.pulse_duration();
    let mut u = CMatrix::identity(d, d);
    for j in 0..field.field.n_pulses() {
        for s in 0..m_t {
            let t = j as f64 * pulse + s as f64 * tau;
            let step = prop.step(field.field.eval(t), tau);
            u = step * u;
        }
    }
    u
}
