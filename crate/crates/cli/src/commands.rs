// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;
use spinchain_control::controllability::{full_controllability_check_with_limit, ControllabilityVerdict};
use spinchain_control::filtering::{
    abs_amplitude_variance, filtered_fidelity, iterate_filter_optimize, mean_abs_amplitude, power_spectrum,
    FilterReport, FilterRound, FilteredField, PowerSpectrum,
};
use spinchain_control::optimizer::{bfgs_maximize, minimal_time_scan, objective, random_sequence, OptimizationReport, TimeScanPoint};
use spinchain_control::sensitivity::{default_delta_grid, fingerprint, sensitivity_sweep, NoiseModel};
use spinchain_control::{ControlAxis, ControlSequence};

use crate::config::{FilterKind, NoiseConfig, RunConfig, SpectrumConfig};
use crate::error::CliError;
use crate::output::{num, OutputDir};

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn axis_name(axis: ControlAxis) -> &'static str {
    match axis {
        ControlAxis::X => "x",
        ControlAxis::Y => "y",
    }
}

fn pulse_rows(seq: &ControlSequence) -> Vec<Vec<String>> {
    (0..seq.n_pulses())
        .map(|k| vec![k.to_string(), axis_name(seq.axis_of(k)).into(), num(seq.amplitudes[k])])
        .collect()
}

/// The pulse sequence an analysis command works on.
pub fn load_pulses(cfg: &RunConfig) -> Result<ControlSequence, CliError> {
    let src = cfg
        .pulses
        .as_ref()
        .ok_or_else(|| config_err("missing pulse input: set [pulses] file or amplitudes"))?;
    let from_control = |amps: Vec<f64>| -> Result<ControlSequence, CliError> {
        let c = cfg.control()?;
        if amps.len() != c.n_pulses {
            return Err(config_err(format!("expected {} amplitudes, found {}", c.n_pulses, amps.len())));
        }
        ControlSequence::new(cfg.chain, c.mode, c.pulse_duration()?, amps).map_err(|e| config_err(e.to_string()))
    };
    match (&src.file, &src.amplitudes) {
        (Some(path), None) => {
            let read_err = |e: &dyn std::fmt::Display| config_err(format!("pulse file {}: {e}", path.display()));
            if path.extension().is_some_and(|e| e == "json") {
                let text = std::fs::read_to_string(path).map_err(|e| read_err(&e))?;
                let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| read_err(&e))?;
                let seq = value
                    .pointer("/result/best_sequence")
                    .ok_or_else(|| read_err(&"no result.best_sequence (not an optimize report)"))?;
                let seq: ControlSequence = serde_json::from_value(seq.clone()).map_err(|e| read_err(&e))?;
                if seq.spec != cfg.chain {
                    return Err(read_err(&"chain in pulse file differs from [chain]"));
                }
                seq.validate().map_err(|e| read_err(&e))?;
                Ok(seq)
            } else {
                let mut rdr = csv::Reader::from_path(path).map_err(|e| read_err(&e))?;
                let headers = rdr.headers().map_err(|e| read_err(&e))?.clone();
                let col = headers
                    .iter()
                    .position(|h| h == "amplitude")
                    .ok_or_else(|| read_err(&"no `amplitude` column"))?;
                let mut amps = Vec::new();
                for rec in rdr.records() {
                    let rec = rec.map_err(|e| read_err(&e))?;
                    amps.push(rec[col].trim().parse::<f64>().map_err(|e| read_err(&e))?);
                }
                from_control(amps)
            }
        }
        (None, Some(amps)) => from_control(amps.clone()),
        _ => Err(config_err("[pulses] needs exactly one of file and amplitudes")),
    }
}

pub fn optimize(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let target = cfg.target()?;
    let c = cfg.control()?;
    let t = c.pulse_duration()?;
    let seq0 = random_sequence(cfg.chain, c.mode, c.n_pulses, t * c.n_pulses as f64, &cfg.optimizer)?;
    let report: OptimizationReport = bfgs_maximize(&seq0, &target, &cfg.optimizer)?;
    out.report("optimize_report.json", "optimize", cfg.optimizer.seed, cfg, &report)?;
    out.table("pulses.csv", &["pulse", "axis", "amplitude"], &pulse_rows(&report.best_sequence))?;
    let rows: Vec<Vec<String>> = report
        .per_restart
        .iter()
        .map(|r| {
            vec![
                r.restart.to_string(),
                num(r.initial_fidelity),
                num(r.final_fidelity),
                r.iterations.to_string(),
                r.converged.to_string(),
                serde_json::to_value(r.stop_reason).unwrap().as_str().unwrap_or_default().to_string(),
            ]
        })
        .collect();
    out.table(
        "restarts.csv",
        &["restart", "initial_fidelity", "final_fidelity", "iterations", "converged", "stop_reason"],
        &rows,
    )?;
    Ok(format!("best fidelity {} (restart {})", num(report.best_fidelity), report.best_restart))
}

pub fn min_time(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let target = cfg.target()?;
    let c = cfg.control()?;
    c.check_pulse_count()?;
    let scan = cfg.section(&cfg.scan, "scan")?;
    if scan.total_times.is_empty() || scan.total_times.iter().any(|t| !(*t > 0.0)) {
        return Err(config_err("scan: total_times must be non-empty and positive"));
    }
    if scan.total_times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(config_err("scan: total_times must be strictly ascending"));
    }
    let points: Vec<TimeScanPoint> =
        minimal_time_scan(cfg.chain, &target, c.mode, c.n_pulses, &scan.total_times, &cfg.optimizer)?;
    out.report("min_time_report.json", "min-time", cfg.optimizer.seed, cfg, &points)?;
    let rows: Vec<Vec<String>> = points.iter().map(|p| vec![num(p.total_time), num(p.best_fidelity)]).collect();
    out.table("min_time.csv", &["total_time", "best_fidelity"], &rows)?;
    let best = points.iter().map(|p| p.best_fidelity).fold(0.0, f64::max);
    Ok(format!("{} total times scanned, best fidelity {}", points.len(), num(best)))
}

pub fn sensitivity(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let target = cfg.target()?;
    let seq = load_pulses(cfg)?;
    let noise = cfg.noise.clone().unwrap_or(NoiseConfig {
        n_samples: 1000,
        seed: cfg.seed.unwrap_or(0),
        deltas: None,
    });
    let grid = noise.deltas.clone().unwrap_or_else(default_delta_grid);
    let model = NoiseModel {
        halfwidth: 0.0,
        n_samples: noise.n_samples,
        seed: noise.seed,
    };
    let report = sensitivity_sweep(&seq, &target, &grid, &model).map_err(|e| match e {
        spinchain_control::ControlError::Domain(m) => config_err(format!("noise: {m}")),
        other => other.into(),
    })?;
    out.report("sensitivity_report.json", "sensitivity", noise.seed, cfg, &report)?;
    let rows: Vec<Vec<String>> = (0..report.delta_grid.len())
        .map(|i| {
            vec![
                num(report.delta_grid[i]),
                num(report.mean_fidelity[i]),
                num(report.std_fidelity[i]),
                report.n_samples.to_string(),
            ]
        })
        .collect();
    out.table("sensitivity.csv", &["delta", "mean_fidelity", "std_fidelity", "n_samples"], &rows)?;
    let last = report.mean_fidelity.len() - 1;
    Ok(format!(
        "{} deltas, mean fidelity at delta={} is {}",
        report.delta_grid.len(),
        num(report.delta_grid[last]),
        num(report.mean_fidelity[last])
    ))
}

#[derive(Serialize)]
struct SpectrumResult {
    sequence_fingerprint: String,
    spectrum: PowerSpectrum,
}

pub fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let seq = load_pulses(cfg)?;
    let sc = cfg.spectrum.clone().unwrap_or(SpectrumConfig {
        omegas: None,
        omega_max: 20.0,
        n_points: 401,
    });
    let omegas = match &sc.omegas {
        Some(w) => w.clone(),
        None => {
            if sc.n_points < 2 || !(sc.omega_max > 0.0) {
                return Err(config_err("spectrum: need n_points >= 2 and omega_max > 0"));
            }
            (0..sc.n_points).map(|i| sc.omega_max * i as f64 / (sc.n_points - 1) as f64).collect()
        }
    };
    let spectrum = power_spectrum(&seq, &omegas).map_err(|e| config_err(format!("spectrum: {e}")))?;
    let rows: Vec<Vec<String>> =
        (0..omegas.len()).map(|i| vec![num(omegas[i]), num(spectrum.x[i]), num(spectrum.y[i])]).collect();
    out.table("spectrum.csv", &["omega", "power_x", "power_y"], &rows)?;
    let result = SpectrumResult {
        sequence_fingerprint: fingerprint(&seq),
        spectrum,
    };
    out.report("spectrum_report.json", "spectrum", cfg.seed.unwrap_or(0), cfg, &result)?;
    Ok(format!("{} frequencies", omegas.len()))
}

#[derive(Serialize)]
struct FilterResult {
    kind: FilterKind,
    parameters: Vec<f64>,
    unfiltered_fidelity: f64,
    mean_abs_amplitude: f64,
    abs_amplitude_variance: f64,
    reports: Vec<FilterReport>,
}

pub fn filter(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let target = cfg.target()?;
    let seq = load_pulses(cfg)?;
    let fc = cfg.section(&cfg.filter, "filter")?;
    let specs = fc.specs();
    let reports: Vec<FilterReport> = {
        use rayon::prelude::*;
        specs
            .par_iter()
            .map(|s| filtered_fidelity(&seq, *s, &target))
            .collect::<Result<_, _>>()?
    };
    let result = FilterResult {
        kind: fc.kind,
        parameters: fc.parameters().to_vec(),
        unfiltered_fidelity: objective(&seq, &target)?,
        mean_abs_amplitude: mean_abs_amplitude(&seq),
        abs_amplitude_variance: abs_amplitude_variance(&seq),
        reports,
    };
    let param = match fc.kind {
        FilterKind::IdealLowPass => "cutoff",
        FilterKind::Gaussian => "fwhm",
    };
    let rows: Vec<Vec<String>> = result
        .parameters
        .iter()
        .zip(&result.reports)
        .map(|(p, r)| vec![num(*p), num(r.filtered_fidelity), r.converged.to_string(), r.steps_per_pulse.to_string()])
        .collect();
    out.table("filter.csv", &[param, "fidelity", "converged", "steps_per_pulse"], &rows)?;
    if specs.len() == 1 {
        let field = FilteredField::new(&seq, specs[0])?;
        let per_pulse = 20;
        let n = seq.n_pulses() * per_pulse;
        let rows: Vec<Vec<String>> = (0..=n)
            .map(|i| {
                let t = seq.total_time() * i as f64 / n as f64;
                let raw = seq.field_at(t.min(seq.total_time() * (1.0 - 1e-12)));
                let v = field.value(t);
                vec![num(t), num(raw[0]), num(raw[1]), num(v[0]), num(v[1])]
            })
            .collect();
        out.table("filtered_field.csv", &["t", "h_x", "h_y", "filtered_h_x", "filtered_h_y"], &rows)?;
    }
    out.report("filter_report.json", "filter", cfg.seed.unwrap_or(0), cfg, &result)?;
    let worst = result.reports.iter().map(|r| r.filtered_fidelity).fold(1.0, f64::min);
    Ok(format!("{} filter settings, lowest filtered fidelity {}", specs.len(), num(worst)))
}

pub fn iterate_filter(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let target = cfg.target()?;
    let seq = load_pulses(cfg)?;
    let fc = cfg.section(&cfg.filter, "filter")?;
    let specs = fc.specs();
    if specs.len() != 1 {
        return Err(config_err("iterate-filter needs exactly one cutoff or fwhm"));
    }
    let rounds: Vec<FilterRound> = iterate_filter_optimize(&seq, &target, specs[0], fc.rounds, &cfg.optimizer)?;
    out.report("iterate_filter_report.json", "iterate-filter", cfg.optimizer.seed, cfg, &rounds)?;
    let rows: Vec<Vec<String>> = rounds
        .iter()
        .map(|r| {
            vec![
                r.round.to_string(),
                num(r.resampled_fidelity),
                num(r.optimization.best_fidelity),
                num(r.filter_report.filtered_fidelity),
                r.filter_report.converged.to_string(),
            ]
        })
        .collect();
    out.table(
        "iterate_filter.csv",
        &["round", "resampled_fidelity", "optimized_fidelity", "filtered_fidelity", "converged"],
        &rows,
    )?;
    let last = rounds.last().expect("rounds >= 1");
    Ok(format!("{} rounds, final filtered fidelity {}", rounds.len(), num(last.filter_report.filtered_fidelity)))
}

pub fn lie_dim(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let lie = cfg.section(&cfg.lie, "lie")?;
    let d = cfg.chain.dim();
    let verdict: ControllabilityVerdict =
        full_controllability_check_with_limit(&cfg.chain, lie.controls, lie.max_dim.unwrap_or(d * d))?;
    out.report("lie_dim_report.json", "lie-dim", cfg.seed.unwrap_or(0), cfg, &verdict)?;
    out.table(
        "lie_dim.csv",
        &["n_spins", "hilbert_dim", "algebra_dim", "su_dim", "fully_controllable"],
        &[vec![
            verdict.n_spins.to_string(),
            verdict.hilbert_dim.to_string(),
            verdict.algebra_dim.to_string(),
            verdict.su_dim.to_string(),
            verdict.fully_controllable.to_string(),
        ]],
    )?;
    Ok(format!("algebra dimension {} of su({d}) = {}", verdict.algebra_dim, verdict.su_dim))
}
