// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Robustness of optimized sequences to static random amplitude errors.
//!
//! Each Monte-Carlo sample adds one independent uniform offset on `[-δ, δ]`
//! to every pulse amplitude. Sample `i` always reads substream `(seed, i)`
//! and scales the same unit draws by `δ`, so curves over a δ grid use common
//! random numbers and are bitwise reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::GateTarget;
use crate::error::{domain, Result};
use crate::optimizer::FidelityEvaluator;
use crate::propagation::ControlSequence;
use crate::rng::{substream, symmetric_uniform, StreamPurpose};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Half-width δ of the uniform error distribution, units of J.
    #[serde(default)]
    pub halfwidth: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    1000
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            halfwidth: 0.0,
            n_samples: default_samples(),
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return domain("noise model needs at least one sample");
        }
        if !(self.halfwidth >= 0.0) || !self.halfwidth.is_finite() {
            return domain(format!("noise half-width must be finite and >= 0, got {}", self.halfwidth));
        }
        Ok(())
    }
}

/// Sample mean and sample standard deviation of the fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub delta_grid: Vec<f64>,
    pub mean_fidelity: Vec<f64>,
    pub std_fidelity: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    /// FNV-1a hash of the sequence structure and amplitudes, hex.
    pub sequence_fingerprint: String,
}

fn offsets(n: usize, delta: f64, seed: u64, draw: usize) -> impl Iterator<Item = f64> {
    let mut rng = substream(seed, StreamPurpose::NoiseSample, draw as u64);
    (0..n).map(move |_| symmetric_uniform(&mut rng, 1.0) * delta)
}

/// `h_k + u_k` with `u_k` uniform on `[-δ, δ]` from draw `draw`.
pub fn perturb_sequence(seq: &ControlSequence, delta: f64, seed: u64, draw: usize) -> Result<ControlSequence> {
    if !(delta >= 0.0) {
        return domain(format!("noise half-width must be >= 0, got {delta}"));
    }
    let amps = seq
        .amplitudes
        .iter()
        .zip(offsets(seq.n_pulses(), delta, seed, draw))
        .map(|(h, u)| h + u)
        .collect();
    seq.with_amplitudes(amps)
}

pub fn average_fidelity_under_noise(
    seq: &ControlSequence,
    target: &GateTarget,
    noise: &NoiseModel,
) -> Result<NoiseStats> {
    noise.validate()?;
    let eval = FidelityEvaluator::new(seq, target)?;
    Ok(noise_stats(&eval, seq, noise))
}

fn noise_stats(eval: &FidelityEvaluator, seq: &ControlSequence, noise: &NoiseModel) -> NoiseStats {
    let n = seq.n_pulses();
    let samples: Vec<f64> = (0..noise.n_samples)
        .into_par_iter()
        .map(|i| {
            let amps: Vec<f64> = seq
                .amplitudes
                .iter()
                .zip(offsets(n, noise.halfwidth, noise.seed, i))
                .map(|(h, u)| h + u)
                .collect();
            eval.fidelity(&amps)
        })
        .collect();
    mean_std(&samples)
}

/// Fixed-order mean and (n-1)-normalized standard deviation.
pub(crate) fn mean_std(xs: &[f64]) -> NoiseStats {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    NoiseStats {
        mean,
        std: var.sqrt(),
    }
}

/// Average gate fidelity `1/d` of the fully depolarizing channel.
pub fn saturation_value(d: usize) -> Result<f64> {
    if d < 2 {
        return domain(format!("dimension must be >= 2, got {d}"));
    }
    Ok(1.0 / d as f64)
}

/// `{0} ∪` 30 log-spaced points on `[1e-3, 10]`.
pub fn default_delta_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let (lo, hi) = (-3.0_f64, 1.0_f64);
    grid.extend((0..30).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / 29.0)));
    grid
}

/// `F̄(δ)` and `σ_F(δ)` over a δ grid.
pub fn sensitivity_sweep(
    seq: &ControlSequence,
    target: &GateTarget,
    delta_grid: &[f64],
    template: &NoiseModel,
) -> Result<SensitivityReport> {
    template.validate()?;
    if delta_grid.is_empty() {
        return domain("delta grid is empty");
    }
    if delta_grid[0] != 0.0 {
        return domain("delta grid must start at 0");
    }
    if delta_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("delta grid must be strictly ascending");
    }
    let eval = FidelityEvaluator::new(seq, target)?;
    let stats: Vec<NoiseStats> = delta_grid
        .iter()
        .map(|&delta| {
            if delta == 0.0 {
                NoiseStats {
                    mean: eval.fidelity(&seq.amplitudes),
                    std: 0.0,
                }
            } else {
                noise_stats(&eval, seq, &NoiseModel { halfwidth: delta, ..*template })
            }
        })
        .collect();
    Ok(SensitivityReport {
        delta_grid: delta_grid.to_vec(),
        mean_fidelity: stats.iter().map(|s| s.mean).collect(),
        std_fidelity: stats.iter().map(|s| s.std).collect(),
        n_samples: template.n_samples,
        seed: template.seed,
        sequence_fingerprint: fingerprint(seq),
    })
}

/// FNV-1a over the mode, chain, pulse duration and amplitude bit patterns.
pub fn fingerprint(seq: &ControlSequence) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(format!("{:?}", seq.mode).as_bytes());
    feed(&(seq.spec.n_spins as u64).to_le_bytes());
    feed(&seq.spec.coupling.to_bits().to_le_bytes());
    feed(&seq.pulse_duration.to_bits().to_le_bytes());
    for a in &seq.amplitudes {
        feed(&a.to_bits().to_le_bytes());
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainSpec;
    use crate::propagation::ControlMode;

    fn seq() -> ControlSequence {
        ControlSequence::new(
            ChainSpec::with_spins(2).unwrap(),
            ControlMode::AlternatingXy,
            0.5,
            vec![0.3, -1.0, 2.0, 0.4],
        )
        .unwrap()
    }

    #[test]
    fn zero_delta_is_identity() {
        let s = seq();
        assert_eq!(perturb_sequence(&s, 0.0, 9, 4).unwrap(), s);
        assert!(perturb_sequence(&s, -1.0, 9, 4).is_err());
    }

    #[test]
    fn offsets_bounded_by_delta() {
        let s = seq();
        for draw in 0..200 {
            let p = perturb_sequence(&s, 0.25, 3, draw).unwrap();
            assert_eq!(p.n_pulses(), s.n_pulses());
            assert_eq!(p.pulse_duration, s.pulse_duration);
            for (a, b) in p.amplitudes.iter().zip(&s.amplitudes) {
                assert!((a - b).abs() <= 0.25);
            }
        }
    }

    #[test]
    fn offsets_have_zero_mean() {
        let delta = 0.7;
        let n = 100_000;
        let mean = offsets(n, delta, 11, 0).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * delta / (3.0 * n as f64).sqrt());
    }

    #[test]
    fn vanishing_noise_recovers_fidelity() {
        let s = seq();
        let t = GateTarget::x_end(2);
        let f0 = crate::optimizer::objective(&s, &t).unwrap();
        let stats = average_fidelity_under_noise(&s, &t, &NoiseModel { halfwidth: 0.0, n_samples: 50, seed: 1 }).unwrap();
        assert!((stats.mean - f0).abs() < 1e-14);
        assert!(stats.std < 1e-14);
    }

    #[test]
    fn saturation_values() {
        assert_eq!(saturation_value(8).unwrap(), 0.125);
        assert_eq!(saturation_value(16).unwrap(), 0.0625);
        assert_eq!(saturation_value(2).unwrap(), 0.5);
        assert!(saturation_value(1).is_err());
    }

    #[test]
    fn sweep_grid_checks() {
        let s = seq();
        let t = GateTarget::x_end(2);
        let nm = NoiseModel { n_samples: 20, ..Default::default() };
        assert!(sensitivity_sweep(&s, &t, &[0.1, 0.2], &nm).is_err());
        assert!(sensitivity_sweep(&s, &t, &[0.0, 0.2, 0.1], &nm).is_err());
        let single = sensitivity_sweep(&s, &t, &[0.0], &nm).unwrap();
        let f0 = crate::optimizer::objective(&s, &t).unwrap();
        assert_eq!(single.mean_fidelity, vec![f0]);
        assert_eq!(single.std_fidelity, vec![0.0]);
    }

    #[test]
    fn sweep_is_reproducible() {
        let s = seq();
        let t = GateTarget::x_end(2);
        let nm = NoiseModel { n_samples: 64, seed: 5, ..Default::default() };
        let grid = [0.0, 0.01, 0.1, 1.0];
        let a = sensitivity_sweep(&s, &t, &grid, &nm).unwrap();
        let b = sensitivity_sweep(&s, &t, &grid, &nm).unwrap();
        assert_eq!(a, b);
        assert!(a.mean_fidelity.iter().all(|f| (0.0..=1.0).contains(f)));
        assert!(a.std_fidelity.iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn default_grid_shape() {
        let g = default_delta_grid();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert!((g[30] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn fingerprint_tracks_amplitudes() {
        let s = seq();
        let mut t = s.clone();
        t.amplitudes[2] += 1e-12;
        assert_ne!(fingerprint(&s), fingerprint(&t));
        assert_eq!(fingerprint(&s), fingerprint(&s.clone()));
    }
}
