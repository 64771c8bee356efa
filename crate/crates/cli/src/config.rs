// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration. TOML on input; reports embed the resolved form as JSON,
//! and a `.json` config is accepted too so any report can be replayed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinchain_control::controllability::ControlSet;
use spinchain_control::filtering::FilterSpec;
use spinchain_control::optimizer::OptimizerConfig;
use spinchain_control::{ChainSpec, ControlMode, GateTarget};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Master seed; overrides `optimizer.seed` and `noise.seed` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub chain: ChainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlConfig>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulses: Option<PulseSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lie: Option<LieConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateName {
    XEnd,
    CnotEnd,
    SqrtSwapEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub gate: GateName,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub mode: ControlMode,
    pub n_pulses: usize,
    /// Exactly one of `total_time` and `pulse_duration`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_duration: Option<f64>,
}

/// Where analysis commands read their pulse sequence from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSource {
    /// An `optimize` report (`.json`) or a pulse table (`.csv`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Inline amplitudes, interpreted with the `[control]` section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to 0 plus 30 log-spaced points on `[1e-3, 10]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
}

fn default_samples() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub total_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    #[serde(default = "default_omega_max")]
    pub omega_max: f64,
    #[serde(default = "default_omega_points")]
    pub n_points: usize,
}

fn default_omega_max() -> f64 {
    20.0
}

fn default_omega_points() -> usize {
    401
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    IdealLowPass,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub kind: FilterKind,
    /// Low-pass cutoffs ω₀ (units of J), ascending.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cutoffs: Vec<f64>,
    /// Gaussian widths, ascending.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fwhms: Vec<f64>,
    /// Rounds for `iterate-filter`.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

fn default_rounds() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieConfig {
    pub controls: ControlSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?
        };
        // pulse files are relative to the config that names them
        if let Some(file) = cfg.pulses.as_mut().and_then(|p| p.file.as_mut()) {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                *file = base.join(&*file);
            }
        }
        Ok(cfg)
    }

    /// Apply a seed override, propagate the master seed, and validate.
    pub fn resolve(mut self, seed_override: Option<u64>) -> Result<Self, CliError> {
        if seed_override.is_some() {
            self.seed = seed_override;
        }
        if let Some(seed) = self.seed {
            self.optimizer.seed = seed;
            if let Some(noise) = self.noise.as_mut() {
                noise.seed = seed;
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.chain.validate().map_err(|e| bad(format!("chain: {e}")))?;
        self.optimizer.validate().map_err(|e| bad(format!("optimizer: {e}")))?;
        if let Some(f) = &self.filter {
            let values = match f.kind {
                FilterKind::IdealLowPass => &f.cutoffs,
                FilterKind::Gaussian => &f.fwhms,
            };
            if values.is_empty() {
                return Err(bad(match f.kind {
                    FilterKind::IdealLowPass => "filter: ideal-low-pass needs `cutoffs`",
                    FilterKind::Gaussian => "filter: gaussian needs `fwhms`",
                }));
            }
            if values.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(bad("filter: values must be strictly ascending"));
            }
            for spec in f.specs() {
                spec.validate().map_err(|e| bad(format!("filter: {e}")))?;
            }
            if f.rounds == 0 {
                return Err(bad("filter: rounds must be >= 1"));
            }
        }
        if let Some(n) = &self.noise {
            if n.n_samples == 0 {
                return Err(bad("noise: n_samples must be >= 1"));
            }
        }
        Ok(())
    }

    pub fn target(&self) -> Result<GateTarget, CliError> {
        let t = self.target.as_ref().ok_or_else(|| bad("missing [target] section"))?;
        let n = self.chain.n_spins;
        if n < 2 && t.gate != GateName::XEnd {
            return Err(bad("two-spin gates need n_spins >= 2"));
        }
        Ok(match t.gate {
            GateName::XEnd => GateTarget::x_end(n),
            GateName::CnotEnd => GateTarget::cnot_end(n),
            GateName::SqrtSwapEnd => GateTarget::sqrt_swap_end(n),
        })
    }

    pub fn control(&self) -> Result<&ControlConfig, CliError> {
        self.control.as_ref().ok_or_else(|| bad("missing [control] section"))
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| bad(format!("missing [{name}] section")))
    }
}

impl ControlConfig {
    pub fn check_pulse_count(&self) -> Result<(), CliError> {
        if self.n_pulses == 0 {
            return Err(bad("control: n_pulses must be >= 1"));
        }
        if self.mode == ControlMode::AlternatingXy && self.n_pulses % 2 == 1 {
            return Err(bad("control: alternating-xy needs an even n_pulses"));
        }
        Ok(())
    }

    pub fn pulse_duration(&self) -> Result<f64, CliError> {
        self.check_pulse_count()?;
        let t = match (self.total_time, self.pulse_duration) {
            (Some(tf), None) => tf / self.n_pulses as f64,
            (None, Some(t)) => t,
            _ => return Err(bad("control: give exactly one of total_time and pulse_duration")),
        };
        if !(t > 0.0) || !t.is_finite() {
            return Err(bad("control: pulse duration must be positive"));
        }
        Ok(t)
    }
}

impl FilterConfig {
    pub fn specs(&self) -> Vec<FilterSpec> {
        match self.kind {
            FilterKind::IdealLowPass => self.cutoffs.iter().map(|&cutoff| FilterSpec::IdealLowPass { cutoff }).collect(),
            FilterKind::Gaussian => self.fwhms.iter().map(|&w| FilterSpec::gaussian_fwhm(w)).collect(),
        }
    }

    pub fn parameters(&self) -> &[f64] {
        match self.kind {
            FilterKind::IdealLowPass => &self.cutoffs,
            FilterKind::Gaussian => &self.fwhms,
        }
    }
}
