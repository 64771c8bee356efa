// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Spectral analysis and smoothing of piecewise-constant control fields.
//!
//! Filtering is done in closed form. An ideal low-pass window `|ω| ≤ ω₀`
//! turns each box pulse on `[a, b]` into
//! `(1/π)[Si(ω₀(b - t)) - Si(ω₀(a - t))]`; a unit-gain Gaussian window
//! `exp(-γω²)` turns it into `(1/2)[erf((b - t)/2√γ) - erf((a - t)/2√γ)]`.
//! The field is taken to vanish outside `[0, t_f]`.

pub mod quadrature;
pub mod special;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ControlAxis, GateTarget};
use crate::error::{domain, Result};
use crate::linalg::C64;
use crate::optimizer::{bfgs_maximize, objective, OptimizationReport, OptimizerConfig};
use crate::propagation::{
    fidelity_raw, product_formula_with, ChainPropagator, ControlField, ControlSequence, SampledField,
};

pub use special::{erf, si};

/// Initial product-formula steps per pulse.
pub const INITIAL_STEPS_PER_PULSE: usize = 20;
/// Finest allowed step is `T / MAX_STEPS_PER_PULSE`.
pub const MAX_STEPS_PER_PULSE: usize = 320;
/// Step halving stops once the fidelity moves less than this.
pub const STEP_CONVERGENCE_TOL: f64 = 1e-6;
/// Gauss–Legendre points per pulse when discretizing a filtered field.
pub const RESAMPLE_POINTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FilterSpec {
    /// Keep `|ω| ≤ cutoff` (units of J).
    IdealLowPass { cutoff: f64 },
    /// `exp(-γ ω²)`, centred at zero frequency.
    Gaussian { gamma: f64 },
}

impl FilterSpec {
    /// Gaussian with the given full width at half maximum, `γ = 4 ln 2 / FWHM²`.
    pub fn gaussian_fwhm(fwhm: f64) -> Self {
        FilterSpec::Gaussian {
            gamma: 4.0 * std::f64::consts::LN_2 / (fwhm * fwhm),
        }
    }

    /// `FWHM = 2 √(ln 2 / γ)` for Gaussian filters.
    pub fn fwhm(&self) -> Option<f64> {
        match *self {
            FilterSpec::Gaussian { gamma } => Some(2.0 * (std::f64::consts::LN_2 / gamma).sqrt()),
            FilterSpec::IdealLowPass { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FilterSpec::IdealLowPass { cutoff } if !(cutoff >= 0.0) || cutoff.is_nan() => {
                domain(format!("low-pass cutoff must be >= 0, got {cutoff}"))
            }
            FilterSpec::Gaussian { gamma } if !(gamma > 0.0) || !gamma.is_finite() => {
                domain(format!("Gaussian gamma must be positive, got {gamma}"))
            }
            _ => Ok(()),
        }
    }
}

/// `|F[h_x](ω)|²` and `|F[h_y](ω)|²` on a frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub omega: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Closed-form Fourier transform `∫ h(t) e^{-iωt} dt` of one axis of a
/// piecewise-constant field.
pub fn fourier_transform(seq: &ControlSequence, axis: ControlAxis, omega: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..seq.n_pulses() {
        if seq.axis_of(k) != axis {
            continue;
        }
        let (a, b) = seq.interval(k);
        let width = b - a;
        // (e^{-iωa} - e^{-iωb})/(iω) = width · e^{-iω(a+b)/2} · sinc(ω width / 2)
        let x = omega * width / 2.0;
        let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
        acc += C64::from_polar(seq.amplitudes[k] * width * sinc, -omega * (a + b) / 2.0);
    }
    acc
}

pub fn power_spectrum(seq: &ControlSequence, omegas: &[f64]) -> Result<PowerSpectrum> {
    if omegas.iter().any(|w| !w.is_finite()) {
        return domain("frequency grid must be finite");
    }
    let axis_power = |axis| omegas.iter().map(|&w| fourier_transform(seq, axis, w).norm_sqr()).collect();
    Ok(PowerSpectrum {
        omega: omegas.to_vec(),
        x: axis_power(ControlAxis::X),
        y: axis_power(ControlAxis::Y),
    })
}

/// A filtered piecewise-constant field, evaluable at any time.
#[derive(Clone, Debug)]
pub struct FilteredField {
    seq: ControlSequence,
    filter: FilterSpec,
}

impl FilteredField {
    pub fn new(seq: &ControlSequence, filter: FilterSpec) -> Result<Self> {
        seq.validate()?;
        filter.validate()?;
        Ok(Self {
            seq: seq.clone(),
            filter,
        })
    }

    pub fn sequence(&self) -> &ControlSequence {
        &self.seq
    }

    pub fn filter(&self) -> FilterSpec {
        self.filter
    }

    /// Kernel integral over `(-∞, m T - t]` up to a constant, with the
    /// normalization that makes a full box integrate to 1.
    fn edge(&self, m: usize, t: f64) -> f64 {
        let s = m as f64 * self.seq.pulse_duration - t;
        match self.filter {
            FilterSpec::IdealLowPass { cutoff } => si(cutoff * s) / std::f64::consts::PI,
            FilterSpec::Gaussian { gamma } => erf(s / (2.0 * gamma.sqrt())) / 2.0,
        }
    }

    pub fn value(&self, t: f64) -> [f64; 2] {
        let n = self.seq.n_pulses();
        let mut out = [0.0; 2];
        let mut prev = self.edge(0, t);
        for k in 0..n {
            let next = self.edge(k + 1, t);
            let slot = match self.seq.axis_of(k) {
                ControlAxis::X => 0,
                ControlAxis::Y => 1,
            };
            out[slot] += self.seq.amplitudes[k] * (next - prev);
            prev = next;
        }
        out
    }
}

impl ControlField for FilteredField {
    fn total_time(&self) -> f64 {
        self.seq.total_time()
    }
    fn pulse_duration(&self) -> f64 {
        self.seq.pulse_duration
    }
    fn n_pulses(&self) -> usize {
        self.seq.n_pulses()
    }
    fn eval(&self, t: f64) -> [f64; 2] {
        self.value(t)
    }
}

fn sampled(field: FilteredField) -> SampledField {
    SampledField::new(Arc::new(field), INITIAL_STEPS_PER_PULSE).expect("non-zero steps")
}

/// Ideal low-pass filtered field with cutoff `ω₀`, at the default step.
pub fn lowpass_filtered_field(seq: &ControlSequence, cutoff: f64) -> Result<SampledField> {
    Ok(sampled(FilteredField::new(seq, FilterSpec::IdealLowPass { cutoff })?))
}

/// Gaussian filtered field with width parameter `γ`, at the default step.
pub fn gaussian_filtered_field(seq: &ControlSequence, gamma: f64) -> Result<SampledField> {
    Ok(sampled(FilteredField::new(seq, FilterSpec::Gaussian { gamma })?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRefinement {
    pub steps_per_pulse: usize,
    pub tau: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub filter: FilterSpec,
    pub original_fidelity: f64,
    pub filtered_fidelity: f64,
    pub tau: f64,
    pub steps_per_pulse: usize,
    /// False when the step cap was hit before the fidelity settled.
    pub converged: bool,
    pub refinements: Vec<StepRefinement>,
}

/// Product-formula fidelity, halving `τ` from `T/20` until successive values
/// differ by less than `1e-6` or `τ = T/320`.
pub fn converged_fidelity(
    prop: &ChainPropagator,
    field: Arc<dyn ControlField>,
    target: &crate::linalg::CMatrix,
) -> Result<(f64, bool, Vec<StepRefinement>)> {
    let mut sf = SampledField::new(field, INITIAL_STEPS_PER_PULSE)?;
    let mut trace = Vec::new();
    loop {
        let u = product_formula_with(prop, &sf);
        let f = fidelity_raw(&u, target);
        trace.push(StepRefinement {
            steps_per_pulse: sf.steps_per_pulse(),
            tau: sf.tau(),
            fidelity: f,
        });
        if let [.., prev, last] = trace.as_slice() {
            if (last.fidelity - prev.fidelity).abs() < STEP_CONVERGENCE_TOL {
                return Ok((f, true, trace));
            }
        }
        if sf.steps_per_pulse() >= MAX_STEPS_PER_PULSE {
            return Ok((f, false, trace));
        }
        sf = sf.refined();
    }
}

pub fn filtered_fidelity(seq: &ControlSequence, filter: FilterSpec, target: &GateTarget) -> Result<FilterReport> {
    let field = FilteredField::new(seq, filter)?;
    let w = crate::chain::gate_target(target)?;
    let prop = ChainPropagator::new(&seq.spec);
    let original = objective(seq, target)?;
    let (f, converged, refinements) = converged_fidelity(&prop, Arc::new(field), w.as_matrix())?;
    let last = *refinements.last().expect("at least one refinement");
    Ok(FilterReport {
        filter,
        original_fidelity: original,
        filtered_fidelity: f,
        tau: last.tau,
        steps_per_pulse: last.steps_per_pulse,
        converged,
        refinements,
    })
}

/// Mean of `|h_k|` (equal-duration pulses, so the time average over `t_f`).
pub fn mean_abs_amplitude(seq: &ControlSequence) -> f64 {
    seq.amplitudes.iter().map(|h| h.abs()).sum::<f64>() / seq.n_pulses() as f64
}

/// Variance of `|h_k|` about [`mean_abs_amplitude`].
pub fn abs_amplitude_variance(seq: &ControlSequence) -> f64 {
    let m = mean_abs_amplitude(seq);
    seq.amplitudes.iter().map(|h| (h.abs() - m).powi(2)).sum::<f64>() / seq.n_pulses() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffCurve {
    pub cutoffs: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub converged: Vec<bool>,
    pub unfiltered_fidelity: f64,
    pub mean_abs_amplitude: f64,
    pub abs_amplitude_variance: f64,
}

/// Low-pass fidelity `F(ω₀)` over an ascending cutoff grid.
pub fn fidelity_vs_cutoff(seq: &ControlSequence, target: &GateTarget, cutoffs: &[f64]) -> Result<CutoffCurve> {
    if cutoffs.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("cutoff grid must be strictly ascending");
    }
    let reports: Vec<FilterReport> = cutoffs
        .par_iter()
        .map(|&c| filtered_fidelity(seq, FilterSpec::IdealLowPass { cutoff: c }, target))
        .collect::<Result<_>>()?;
    Ok(CutoffCurve {
        cutoffs: cutoffs.to_vec(),
        fidelities: reports.iter().map(|r| r.filtered_fidelity).collect(),
        converged: reports.iter().map(|r| r.converged).collect(),
        unfiltered_fidelity: objective(seq, target)?,
        mean_abs_amplitude: mean_abs_amplitude(seq),
        abs_amplitude_variance: abs_amplitude_variance(seq),
    })
}

/// Discretize a filtered field back onto the pulse grid: each pulse gets the
/// interval average of the filtered component on its own axis.
pub fn resample_onto_pulses(field: &FilteredField) -> Result<ControlSequence> {
    let seq = field.sequence();
    let rule = quadrature::gauss_legendre(RESAMPLE_POINTS);
    let amps = (0..seq.n_pulses())
        .map(|k| {
            let slot = match seq.axis_of(k) {
                ControlAxis::X => 0,
                ControlAxis::Y => 1,
            };
            let (a, b) = seq.interval(k);
            quadrature::interval_average(|t| field.value(t)[slot], a, b, &rule)
        })
        .collect();
    seq.with_amplitudes(amps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterRound {
    pub round: usize,
    /// Fidelity of the discretized filtered field used as the initial guess.
    pub resampled_fidelity: f64,
    pub optimization: OptimizationReport,
    /// Filtered fidelity of the re-optimized sequence.
    pub filter_report: FilterReport,
}

/// Filter, discretize, re-optimize from the discretized field, and filter
/// again, `rounds` times. Only restart 0 of `cfg` starts from the filtered
/// guess; use `n_restarts = 1` for the plain loop.
pub fn iterate_filter_optimize(
    seq: &ControlSequence,
    target: &GateTarget,
    filter: FilterSpec,
    rounds: usize,
    cfg: &OptimizerConfig,
) -> Result<Vec<FilterRound>> {
    if rounds == 0 {
        return domain("need at least one round");
    }
    let mut current = seq.clone();
    let mut out = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let guess = resample_onto_pulses(&FilteredField::new(&current, filter)?)?;
        let resampled_fidelity = objective(&guess, target)?;
        let optimization = bfgs_maximize(&guess, target, cfg)?;
        let filter_report = filtered_fidelity(&optimization.best_sequence, filter, target)?;
        current = optimization.best_sequence.clone();
        out.push(FilterRound {
            round,
            resampled_fidelity,
            optimization,
            filter_report,
        });
    }
    Ok(out)
}
