// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Fidelity maximization over pulse amplitudes.
//!
//! BFGS on `1 - F` with an Armijo backtracking line search, multistart from
//! seeded uniform initial guesses, and exact gradients from the
//! divided-difference (Daleckii–Krein) derivative of each pulse exponential.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{gate_target, ChainSpec, GateTarget};
use crate::error::{domain, ControlError, Result};
use crate::linalg::{trace_adjoint_product, CMatrix, C64};
use crate::propagation::{ChainPropagator, ControlMode, ControlSequence};
use crate::rng::{substream, symmetric_uniform, StreamPurpose};

const ARMIJO_C1: f64 = 1e-4;
const ARMIJO_CONTRACTION: f64 = 0.5;
const MIN_STEP: f64 = 1e-16;
/// Perturbation applied to amplitudes when a start has `F = 0`.
const ZERO_FIDELITY_KICK: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "defaults::max_iterations")]
    pub max_iterations: usize,
    /// Stop when the max-abs gradient of `F` drops below this.
    #[serde(default = "defaults::gradient_tolerance")]
    pub gradient_tolerance: f64,
    /// Stop as soon as `F ≥ fidelity_goal`.
    #[serde(default = "defaults::fidelity_goal")]
    pub fidelity_goal: f64,
    #[serde(default = "defaults::n_restarts")]
    pub n_restarts: usize,
    /// Restart amplitudes are drawn from `[-w, w]`, in units of J.
    #[serde(default = "defaults::initial_amplitude_halfwidth")]
    pub initial_amplitude_halfwidth: f64,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn max_iterations() -> usize {
        2000
    }
    pub fn gradient_tolerance() -> f64 {
        1e-9
    }
    pub fn fidelity_goal() -> f64 {
        1.0 - 1e-10
    }
    pub fn n_restarts() -> usize {
        20
    }
    pub fn initial_amplitude_halfwidth() -> f64 {
        2.0
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: defaults::max_iterations(),
            gradient_tolerance: defaults::gradient_tolerance(),
            fidelity_goal: defaults::fidelity_goal(),
            n_restarts: defaults::n_restarts(),
            initial_amplitude_halfwidth: defaults::initial_amplitude_halfwidth(),
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0) {
            return domain("gradient_tolerance must be positive");
        }
        if !(self.fidelity_goal > 0.0 && self.fidelity_goal <= 1.0) {
            return domain("fidelity_goal must lie in (0, 1]");
        }
        if self.n_restarts == 0 {
            return domain("n_restarts must be at least 1");
        }
        if !(self.initial_amplitude_halfwidth >= 0.0) || !self.initial_amplitude_halfwidth.is_finite() {
            return domain("initial_amplitude_halfwidth must be finite and non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GoalReached,
    GradientTolerance,
    MaxIterations,
    /// The line search could not find an ascent step (precision floor).
    LineSearchStalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub initial_fidelity: f64,
    pub final_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Fidelity after every accepted step, starting with the initial point.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub best_sequence: ControlSequence,
    pub best_fidelity: f64,
    pub best_restart: usize,
    pub per_restart: Vec<RestartOutcome>,
    pub config: OptimizerConfig,
    pub seed: u64,
}

/// Fidelity and gradient evaluation against a fixed target.
pub struct FidelityEvaluator {
    prop: ChainPropagator,
    target: CMatrix,
    mode: ControlMode,
    pulse_duration: f64,
}

impl FidelityEvaluator {
    pub fn new(seq: &ControlSequence, target: &GateTarget) -> Result<Self> {
        seq.validate()?;
        let w = gate_target(target)?;
        if w.dim() != seq.spec.dim() {
            return Err(ControlError::DimensionMismatch {
                expected: seq.spec.dim(),
                found: w.dim(),
            });
        }
        Ok(Self {
            prop: ChainPropagator::new(&seq.spec),
            target: w.into_inner(),
            mode: seq.mode,
            pulse_duration: seq.pulse_duration,
        })
    }

    fn trace_overlap(&self, amplitudes: &[f64]) -> C64 {
        let d = self.prop.dim();
        let mut u = CMatrix::identity(d, d);
        for (k, &h) in amplitudes.iter().enumerate() {
            let step = self.prop.step(field(self.mode, k, h), self.pulse_duration);
            u = step * u;
        }
        trace_adjoint_product(&self.target, &u)
    }

    pub fn fidelity(&self, amplitudes: &[f64]) -> f64 {
        (self.trace_overlap(amplitudes).norm() / self.prop.dim() as f64).min(1.0)
    }

    /// `F` and `∂F/∂h_k` for every pulse.
    pub fn fidelity_and_gradient(&self, amplitudes: &[f64]) -> Result<(f64, Vec<f64>)> {
        let d = self.prop.dim();
        let t = self.pulse_duration;
        let n = amplitudes.len();

        struct Pulse {
            values: DVector<f64>,
            vectors: CMatrix,
            coupling: DMatrix<f64>,
            phi: f64,
            unitary: CMatrix,
        }
        let pulses: Vec<Pulse> = amplitudes
            .iter()
            .enumerate()
            .map(|(k, &h)| {
                let axis = self.mode.axis_of(k);
                let phi = ChainPropagator::axis_angle(axis);
                let sp = self.prop.x_spectrum(h);
                let mut unitary = ChainPropagator::exp_from_spectrum(&sp, t);
                self.prop.rotate_z(&mut unitary, phi);
                let coupling = sp.vectors.transpose() * self.prop.sx1() * &sp.vectors;
                Pulse {
                    vectors: sp.vectors.map(|x| C64::new(x, 0.0)),
                    values: sp.values,
                    coupling,
                    phi,
                    unitary,
                }
            })
            .collect();

        // forward[k] = U_{k-1} ⋯ U_0
        let mut forward = Vec::with_capacity(n + 1);
        forward.push(CMatrix::identity(d, d));
        for p in &pulses {
            let next = &p.unitary * forward.last().expect("non-empty");
            forward.push(next);
        }
        let overlap = trace_adjoint_product(&self.target, &forward[n]);
        let modulus = overlap.norm();
        let fid = (modulus / d as f64).min(1.0);
        if modulus < 1e-300 {
            return Err(ControlError::UndefinedGradient);
        }

        let mut grad = vec![0.0; n];
        // backward = W† U_{N-1} ⋯ U_{k+1}
        let mut backward = self.target.adjoint();
        for k in (0..n).rev() {
            let p = &pulses[k];
            let mut m = &forward[k] * &backward;
            // Undo the axis rotation: R† M R.
            self.prop.rotate_z(&mut m, -p.phi);
            let m_eig = p.vectors.transpose() * m * &p.vectors;
            let mut dg = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    let (li, lj) = (p.values[i], p.values[j]);
                    let gamma = C64::from_polar(1.0, -(li + lj) * t / 2.0)
                        * C64::new(0.0, -t * sinc((li - lj) * t / 2.0));
                    dg += m_eig[(j, i)] * gamma * p.coupling[(i, j)];
                }
            }
            grad[k] = (overlap.conj() * dg).re / (modulus * d as f64);
            backward = backward * &p.unitary;
        }
        Ok((fid, grad))
    }
}

fn field(mode: ControlMode, pulse: usize, h: f64) -> [f64; 2] {
    match mode.axis_of(pulse) {
        crate::chain::ControlAxis::X => [h, 0.0],
        crate::chain::ControlAxis::Y => [0.0, h],
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `F(t_f)` of a sequence against a gate target.
pub fn objective(seq: &ControlSequence, target: &GateTarget) -> Result<f64> {
    Ok(FidelityEvaluator::new(seq, target)?.fidelity(&seq.amplitudes))
}

/// Analytic `∂F/∂h_k`.
pub fn fidelity_gradient(seq: &ControlSequence, target: &GateTarget) -> Result<Vec<f64>> {
    Ok(FidelityEvaluator::new(seq, target)?
        .fidelity_and_gradient(&seq.amplitudes)?
        .1)
}

/// Uniform random amplitudes on `[-halfwidth, halfwidth]` from the restart
/// substream `index`.
pub fn random_amplitudes(n_pulses: usize, halfwidth: f64, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = substream(seed, StreamPurpose::RestartInit, index as u64);
    (0..n_pulses).map(|_| symmetric_uniform(&mut rng, halfwidth)).collect()
}

/// Sequence with random initial amplitudes from restart substream 0.
pub fn random_sequence(
    spec: ChainSpec,
    mode: ControlMode,
    n_pulses: usize,
    total_time: f64,
    cfg: &OptimizerConfig,
) -> Result<ControlSequence> {
    if n_pulses == 0 {
        return domain("sequence needs at least one pulse");
    }
    let amps = random_amplitudes(n_pulses, cfg.initial_amplitude_halfwidth, cfg.seed, 0);
    ControlSequence::new(spec, mode, total_time / n_pulses as f64, amps)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct RestartResult {
    outcome: RestartOutcome,
    amplitudes: Vec<f64>,
}

/// One BFGS run maximizing `F` from `x0`.
fn bfgs_run(eval: &FidelityEvaluator, x0: Vec<f64>, cfg: &OptimizerConfig, restart: usize) -> RestartResult {
    let n = x0.len();
    let mut x = x0;
    let (mut fid, mut grad_f) = loop {
        match eval.fidelity_and_gradient(&x) {
            Ok(v) => break v,
            Err(_) => {
                let mut rng = substream(cfg.seed, StreamPurpose::Perturbation, restart as u64);
                for xi in x.iter_mut() {
                    *xi += symmetric_uniform(&mut rng, ZERO_FIDELITY_KICK);
                }
            }
        }
    };
    let initial_fidelity = fid;
    let mut trace = vec![fid];
    // Minimize f = 1 - F; its gradient is -∇F.
    let mut g: Vec<f64> = grad_f.iter().map(|v| -v).collect();
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut iterations = 0;
    let stop_reason = loop {
        if fid >= cfg.fidelity_goal {
            break StopReason::GoalReached;
        }
        if max_abs(&g) < cfg.gradient_tolerance {
            break StopReason::GradientTolerance;
        }
        if iterations >= cfg.max_iterations {
            break StopReason::MaxIterations;
        }
        iterations += 1;

        let gv = DVector::from_column_slice(&g);
        let mut p: Vec<f64> = (-(&hinv * &gv)).iter().copied().collect();
        let mut slope = dot(&p, &g);
        if !(slope < 0.0) {
            hinv.fill_with_identity();
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = dot(&p, &g);
        }

        // Armijo backtracking on f = 1 - F.
        let f0 = 1.0 - fid;
        let mut alpha = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + alpha * pi).collect();
            if let Ok((ft, gt)) = eval.fidelity_and_gradient(&trial) {
                if 1.0 - ft <= f0 + ARMIJO_C1 * alpha * slope && ft > fid {
                    break Some((trial, ft, gt));
                }
            }
            alpha *= ARMIJO_CONTRACTION;
            if alpha < MIN_STEP {
                break None;
            }
        };
        let Some((x_new, f_new, grad_new)) = accepted else {
            if fresh {
                break StopReason::LineSearchStalled;
            }
            hinv.fill_with_identity();
            fresh = true;
            continue;
        };

        let g_new: Vec<f64> = grad_new.iter().map(|v| -v).collect();
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if fresh {
                // Scale the identity by the observed curvature before the
                // first update.
                let scale = sy / dot(&y, &y);
                hinv.fill_with_identity();
                hinv *= scale;
                fresh = false;
            }
            let rho = 1.0 / sy;
            let sv = DVector::from_column_slice(&s);
            let yv = DVector::from_column_slice(&y);
            let hy = &hinv * &yv;
            let yhy = yv.dot(&hy);
            // H ← H - ρ(H y sᵀ + s yᵀ H) + ρ(1 + ρ yᵀHy) s sᵀ
            hinv -= (&hy * sv.transpose() + &sv * hy.transpose()) * rho;
            hinv += (&sv * sv.transpose()) * (rho * (1.0 + rho * yhy));
        } else {
            hinv.fill_with_identity();
            fresh = true;
        }

        x = x_new;
        fid = f_new;
        grad_f = grad_new;
        g = g_new;
        trace.push(fid);
    };
    let _ = grad_f;
    let converged = matches!(stop_reason, StopReason::GoalReached | StopReason::GradientTolerance);
    RestartResult {
        outcome: RestartOutcome {
            restart,
            initial_fidelity,
            final_fidelity: fid,
            iterations,
            converged,
            stop_reason,
            trace,
        },
        amplitudes: x,
    }
}

/// Multistart BFGS maximization of the gate fidelity.
///
/// Restart 0 starts from `seq0`; restart `i > 0` draws its amplitudes
/// uniformly from `[-w, w]` with substream `(seed, i)`. If `seq0` already
/// meets the fidelity goal it is returned unchanged.
pub fn bfgs_maximize(
    seq0: &ControlSequence,
    target: &GateTarget,
    cfg: &OptimizerConfig,
) -> Result<OptimizationReport> {
    cfg.validate()?;
    let eval = FidelityEvaluator::new(seq0, target)?;
    let f0 = eval.fidelity(&seq0.amplitudes);
    if f0 >= cfg.fidelity_goal {
        return Ok(OptimizationReport {
            best_sequence: seq0.clone(),
            best_fidelity: f0,
            best_restart: 0,
            per_restart: vec![RestartOutcome {
                restart: 0,
                initial_fidelity: f0,
                final_fidelity: f0,
                iterations: 0,
                converged: true,
                stop_reason: StopReason::GoalReached,
                trace: vec![f0],
            }],
            config: cfg.clone(),
            seed: cfg.seed,
        });
    }

    let n = seq0.n_pulses();
    let results: Vec<RestartResult> = (0..cfg.n_restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = if r == 0 {
                seq0.amplitudes.clone()
            } else {
                random_amplitudes(n, cfg.initial_amplitude_halfwidth, cfg.seed, r)
            };
            bfgs_run(&eval, x0, cfg, r)
        })
        .collect();

    // Ties go to the lowest restart index.
    let best = results
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| {
            if r.outcome.final_fidelity > results[b].outcome.final_fidelity {
                i
            } else {
                b
            }
        });
    let best_sequence = seq0.with_amplitudes(results[best].amplitudes.clone())?;
    Ok(OptimizationReport {
        best_fidelity: results[best].outcome.final_fidelity,
        best_restart: best,
        best_sequence,
        per_restart: results.into_iter().map(|r| r.outcome).collect(),
        config: cfg.clone(),
        seed: cfg.seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeScanPoint {
    pub total_time: f64,
    pub best_fidelity: f64,
    pub report: OptimizationReport,
}

/// Best achievable fidelity on a grid of total times at fixed `N_t`.
pub fn minimal_time_scan(
    spec: ChainSpec,
    target: &GateTarget,
    mode: ControlMode,
    n_pulses: usize,
    total_times: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<TimeScanPoint>> {
    if total_times.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("total-time grid must be strictly ascending");
    }
    total_times
        .iter()
        .map(|&tf| {
            let seq0 = random_sequence(spec, mode, n_pulses, tf, cfg)?;
            let report = bfgs_maximize(&seq0, target, cfg)?;
            Ok(TimeScanPoint {
                total_time: tf,
                best_fidelity: report.best_fidelity,
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_spin(h: f64, t: f64) -> ControlSequence {
        ControlSequence::new(ChainSpec::with_spins(1).unwrap(), ControlMode::XOnly, t, vec![h]).unwrap()
    }

    #[test]
    fn single_spin_fidelity_is_sine() {
        for &(h, t) in &[(0.3, 1.0), (2.0, 0.7), (-1.5, 2.2), (3.14, 1.0)] {
            let f = objective(&single_spin(h, t), &GateTarget::x_end(1)).unwrap();
            assert!((f - (h * t / 2.0).sin().abs()).abs() < 1e-13);
        }
    }

    #[test]
    fn single_spin_gradient_closed_form() {
        for &(h, t) in &[(0.3, 1.0), (2.0, 0.7), (-1.5, 2.2)] {
            let g = fidelity_gradient(&single_spin(h, t), &GateTarget::x_end(1)).unwrap();
            let x = h * t / 2.0;
            let want = t / 2.0 * x.cos() * x.sin().signum();
            assert!((g[0] - want).abs() < 1e-12, "h={h}: {} vs {want}", g[0]);
        }
    }

    #[test]
    fn zero_fidelity_gradient_is_an_error() {
        let seq = single_spin(0.0, 1.0);
        assert_eq!(
            fidelity_gradient(&seq, &GateTarget::x_end(1)),
            Err(ControlError::UndefinedGradient)
        );
    }

    #[test]
    fn free_evolution_target_is_reached_exactly() {
        let spec = ChainSpec::with_spins(3).unwrap();
        let seq = ControlSequence::zeros(spec, ControlMode::AlternatingXy, 4, 2.0).unwrap();
        let u = crate::propagation::evolve_sequence(&seq).unwrap();
        let f = objective(&seq, &GateTarget::custom(u)).unwrap();
        assert!((f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn already_optimal_returns_immediately() {
        let t = 1.0;
        let h = std::f64::consts::PI / t;
        let seq = single_spin(h, t);
        let report = bfgs_maximize(&seq, &GateTarget::x_end(1), &OptimizerConfig::default()).unwrap();
        assert_eq!(report.per_restart.len(), 1);
        assert_eq!(report.per_restart[0].iterations, 0);
        assert_eq!(report.best_sequence, seq);
    }

    #[test]
    fn single_spin_flip_is_found() {
        let seq = single_spin(0.4, 1.0);
        let cfg = OptimizerConfig {
            n_restarts: 3,
            ..Default::default()
        };
        let report = bfgs_maximize(&seq, &GateTarget::x_end(1), &cfg).unwrap();
        assert!(report.best_fidelity > 1.0 - 1e-9);
        for r in &report.per_restart {
            assert!(r.trace.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            OptimizerConfig { gradient_tolerance: 0.0, ..Default::default() },
            OptimizerConfig { fidelity_goal: 1.5, ..Default::default() },
            OptimizerConfig { fidelity_goal: 0.0, ..Default::default() },
            OptimizerConfig { n_restarts: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn scan_grid_must_ascend() {
        let spec = ChainSpec::with_spins(1).unwrap();
        let r = minimal_time_scan(spec, &GateTarget::x_end(1), ControlMode::XOnly, 1, &[2.0, 1.0], &OptimizerConfig::default());
        assert!(r.is_err());
    }
}
