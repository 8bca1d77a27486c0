//! One-parameter scans over the gate metrics, with deterministic tables.
//!
//! A sweep takes a baseline run configuration, varies a single knob over a
//! range, and evaluates the gate at every point. Points that fail
//! validation or integration become error-annotated rows instead of
//! aborting the scan. Values are rounded to 12 significant digits when the
//! table is built, so emitting, re-parsing, and emitting again reproduces
//! the bytes exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, PulseSpec, Resolved, RunConfig};
use crate::dynamics::integrate_branch;
use crate::error::{Error, Result};
use crate::protocol::{gate_from_overlaps, GateResult};
use crate::transfer::{branch_overlap, Branch};
use crate::wavepacket::Wavepacket;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    G,
    Kappa,
    Delta,
    Gamma,
    PulseWidth,
    StorageEfficiency,
}

impl SweepTarget {
    pub fn name(self) -> &'static str {
        match self {
            SweepTarget::G => "g",
            SweepTarget::Kappa => "kappa",
            SweepTarget::Delta => "delta",
            SweepTarget::Gamma => "gamma",
            SweepTarget::PulseWidth => "pulse_width",
            SweepTarget::StorageEfficiency => "storage_efficiency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ControlledPhase,
    FidelityRaw,
    FidelityOpt,
    Leakage1,
    Leakage2,
    PhaseError,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::ControlledPhase => "controlled_phase",
            Metric::FidelityRaw => "fidelity_raw",
            Metric::FidelityOpt => "fidelity_opt",
            Metric::Leakage1 => "leakage_1",
            Metric::Leakage2 => "leakage_2",
            Metric::PhaseError => "phase_error",
        }
    }

    pub fn all() -> Vec<Metric> {
        vec![
            Metric::ControlledPhase,
            Metric::FidelityRaw,
            Metric::FidelityOpt,
            Metric::Leakage1,
            Metric::Leakage2,
            Metric::PhaseError,
        ]
    }
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
    #[serde(default)]
    pub baseline: RunConfig,
    #[serde(default = "Metric::all")]
    pub metrics: Vec<Metric>,
    /// Audit switch: obtain the branch overlaps by integrating the
    /// equations of motion instead of the closed-form spectra.
    #[serde(default)]
    pub time_domain: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidSweep("range endpoints must be finite".into()));
        }
        if self.n_points < 2 {
            return Err(Error::InvalidSweep("n_points must be at least 2".into()));
        }
        if self.start >= self.stop {
            return Err(Error::InvalidSweep("start must be less than stop".into()));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::InvalidSweep(
                "log spacing requires positive endpoints".into(),
            ));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidSweep("metrics must not be empty".into()));
        }
        Ok(())
    }

    /// Endpoint-inclusive grid over the range; the first and last entries
    /// are the configured endpoints exactly, not reconstructed ones.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.start
                } else if i == n - 1 {
                    self.stop
                } else {
                    let f = i as f64 / (n - 1) as f64;
                    match self.spacing {
                        Spacing::Linear => self.start + f * (self.stop - self.start),
                        Spacing::Log => {
                            (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                        }
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// Metric values aligned with the spec's metric list; absent when the
    /// point failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub version: String,
    /// The full spec, baseline config included, as provenance.
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

/// Rounds to `digits` significant decimal digits, mapping -0.0 to 0.0 and
/// passing non-finite values through. Printing the result with
/// digits-significant formatting and parsing it back is bit-exact for the
/// magnitudes that show up in these tables.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let d = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - d);
    let y = (x * scale).round() / scale;
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

fn metric_value(m: Metric, r: &GateResult, delta: f64) -> f64 {
    match m {
        Metric::ControlledPhase => r.controlled_phase,
        Metric::FidelityRaw => r.fidelity_raw,
        Metric::FidelityOpt => r.fidelity_opt,
        Metric::Leakage1 => r.leakage_1,
        Metric::Leakage2 => r.leakage_2,
        // the ideal conditional phase is +/- pi with the sign of delta
        Metric::PhaseError => r.controlled_phase - std::f64::consts::PI.copysign(delta),
    }
}

fn overlaps_from_dynamics(
    params: &crate::model::Params,
    packet: &Wavepacket,
    solver: &crate::dynamics::SolverOptions,
) -> Result<(num_complex::Complex64, num_complex::Complex64)> {
    let mut out = [num_complex::Complex64::new(0.0, 0.0); 2];
    for (slot, branch) in out.iter_mut().zip([Branch::Atom1, Branch::Atom2]) {
        let traj = integrate_branch(params, branch, packet, solver)?;
        let chi_end = traj.chi.last().map_or(0.0, |c| c.norm());
        if chi_end >= 1e-8 {
            return Err(Error::TransientNotDecayed { chi_end });
        }
        let reflected = Wavepacket::from_temporal_raw(traj.grid, traj.f_out)?;
        *slot = packet.overlap(&reflected)?;
    }
    Ok((out[0], out[1]))
}

fn eval_point(
    spec: &SweepSpec,
    base: &Resolved,
    shared_packet: Option<&Wavepacket>,
    v: f64,
) -> std::result::Result<Vec<f64>, String> {
    let mut params = base.params;
    let mut storage = base.storage;
    let mut pulse = base.pulse;
    match spec.target {
        SweepTarget::G => params.g = v,
        SweepTarget::Kappa => params.kappa = v,
        SweepTarget::Delta => params.delta = v,
        SweepTarget::Gamma => params.gamma = v,
        SweepTarget::PulseWidth => match &mut pulse {
            PulseSpec::Gaussian { width, .. } => *width = v,
            PulseSpec::RisingExponential { .. } => {
                unreachable!("run_sweep rejects non-gaussian pulse_width sweeps")
            }
        },
        SweepTarget::StorageEfficiency => storage.efficiency = v,
    }
    params.validate().map_err(|e| e.to_string())?;
    storage.validate().map_err(|e| e.to_string())?;

    let built;
    let packet = match shared_packet {
        Some(p) => p,
        None => {
            built = pulse.build(base.grid).map_err(|e| e.to_string())?;
            &built
        }
    };

    let (c1, c2) = if spec.time_domain {
        overlaps_from_dynamics(&params, packet, &base.solver).map_err(|e| e.to_string())?
    } else {
        let c1 = branch_overlap(&params, Branch::Atom1, packet).map_err(|e| e.to_string())?;
        let c2 = branch_overlap(&params, Branch::Atom2, packet).map_err(|e| e.to_string())?;
        (c1, c2)
    };
    let gate = gate_from_overlaps(c1, c2, &storage);
    Ok(spec
        .metrics
        .iter()
        .map(|m| round_sig(metric_value(*m, &gate, params.delta), 12))
        .collect())
}

/// Runs the scan. Points execute in parallel on the ambient rayon pool;
/// results are gathered in range order, so the table is identical to a
/// sequential run.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;

    // the swept parameter may be absent from the baseline; patch a
    // placeholder for resolution only, the provenance keeps the original
    let mut cfg = spec.baseline.clone();
    match spec.target {
        SweepTarget::G if cfg.g.is_none() => cfg.g = Some(1.0),
        SweepTarget::Delta if cfg.delta.is_none() => cfg.delta = Some(1.0),
        _ => {}
    }
    let base = cfg.resolve()?;
    if spec.target == SweepTarget::PulseWidth
        && !matches!(base.pulse, PulseSpec::Gaussian { .. })
    {
        return Err(Error::InvalidSweep(
            "pulse_width sweeps need a gaussian baseline pulse".into(),
        ));
    }

    let shared_packet = if spec.target == SweepTarget::PulseWidth {
        None
    } else {
        Some(base.pulse.build(base.grid)?)
    };

    let values = spec.values();
    let results: Vec<std::result::Result<Vec<f64>, String>> = values
        .par_iter()
        .map(|&v| eval_point(spec, &base, shared_packet.as_ref(), v))
        .collect();

    let rows: Vec<SweepRow> = values
        .iter()
        .zip(results)
        .map(|(&v, res)| match res {
            Ok(metrics) => SweepRow {
                value: round_sig(v, 12),
                metrics: Some(metrics),
                error: None,
            },
            Err(error) => SweepRow {
                value: round_sig(v, 12),
                metrics: None,
                error: Some(error),
            },
        })
        .collect();

    if rows.iter().all(|r| r.error.is_some()) {
        let first = rows[0].error.clone().unwrap_or_default();
        return Err(Error::InvalidSweep(format!(
            "every point failed; first error: {first}"
        )));
    }

    Ok(SweepTable {
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.clone(),
        rows,
    })
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// CSV rendering: header names the swept parameter, the metrics, and a
/// trailing error column; 12-significant-digit scientific notation.
pub fn emit_csv(table: &SweepTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![table.spec.target.name().to_string()];
    header.extend(table.spec.metrics.iter().map(|m| m.name().to_string()));
    header.push("error".to_string());
    w.write_record(&header).map_err(csv_err)?;
    for row in &table.rows {
        let mut rec = vec![format!("{:.11e}", row.value)];
        match &row.metrics {
            Some(ms) => rec.extend(ms.iter().map(|m| format!("{m:.11e}"))),
            None => rec.extend(std::iter::repeat(String::new()).take(table.spec.metrics.len())),
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}

/// Parses a table back out of [`emit_csv`] output: the header and the rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<SweepRow>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 || header.last().map(String::as_str) != Some("error") {
        return Err(csv_err("expected a value column, metrics, and an error column"));
    }
    let n_metrics = header.len() - 2;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(csv_err(format!(
                "row has {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        let value: f64 = record[0].parse().map_err(csv_err)?;
        let error = record[header.len() - 1].to_string();
        if error.is_empty() {
            let metrics = (1..=n_metrics)
                .map(|i| record[i].parse::<f64>().map_err(csv_err))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(SweepRow {
                value,
                metrics: Some(metrics),
                error: None,
            });
        } else {
            rows.push(SweepRow {
                value,
                metrics: None,
                error: Some(error),
            });
        }
    }
    Ok((header, rows))
}

/// JSON rendering with the provenance block (version and full spec).
pub fn emit_json(table: &SweepTable) -> Result<String> {
    let mut text = serde_json::to_string_pretty(table).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes the table in the chosen format.
pub fn emit(table: &SweepTable, format: OutputFormat, dest: &mut impl std::io::Write) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => emit_csv(table)?,
        OutputFormat::Json => emit_json(table)?,
    };
    dest.write_all(text.as_bytes())?;
    Ok(())
}
