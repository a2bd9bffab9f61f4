//! Experiment execution: expands a spec into a grid of evaluation points,
//! runs both engines, and collects rows with per-point status. Failures at
//! a point land in that row; the run keeps going.

use crate::config::{ConfigError, Evaluator, ExperimentSpec, SeriesSpec, SweepParameter};
use fogsim_core::analytic;
use fogsim_core::params::{Mode, NetworkParams};
use fogsim_core::quad::QuadratureSettings;
use fogsim_core::sim;
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// Secondary-parameter label, e.g. "d2d_sir_threshold_db=6".
    pub series_label: Option<String>,
    pub sweep_value: f64,
    pub mode: Mode,
    pub evaluator: Evaluator,
    /// Absent when the point failed; see `status`.
    pub mean: Option<f64>,
    /// Zero for analytic rows.
    pub ci95_half_width: Option<f64>,
    /// Zero for analytic rows.
    pub trials: u64,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Builds the parameter set for one grid point.
fn point_params(
    spec: &ExperimentSpec,
    series: Option<&SeriesSpec>,
    value: f64,
) -> Result<NetworkParams, ConfigError> {
    let mut p = spec.base_params.clone();
    if let Some(s) = series {
        s.parameter.apply(&mut p, s.value)?;
    }
    spec.swept_parameter.apply(&mut p, value)?;
    Ok(p)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeds are keyed by the point's physical identity (swept value, series
/// value, mode), not its grid position, so subsetting or extending a sweep
/// reproduces the surviving cells bit for bit.
fn point_seed(master: u64, series: Option<&SeriesSpec>, value: f64, mode: Mode) -> u64 {
    let mode_idx = Mode::ALL.iter().position(|m| *m == mode).unwrap() as u64;
    let series_bits = series.map(|s| s.value.to_bits()).unwrap_or(0);
    let mut h = splitmix64(master);
    h = splitmix64(h ^ value.to_bits());
    h = splitmix64(h ^ series_bits);
    splitmix64(h ^ (mode_idx + 1))
}

fn analytic_row(
    spec: &ExperimentSpec,
    series: Option<&SeriesSpec>,
    value: f64,
    mode: Mode,
    q: &QuadratureSettings,
) -> ResultRow {
    let outcome = point_params(spec, series, value)
        .map_err(|e| e.to_string())
        .and_then(|p| {
            analytic::mode_metrics(mode, &p, q)
                .map(|m| m.rate)
                .map_err(|e| e.to_string())
        });
    let (mean, ci, status) = match outcome {
        Ok(rate) => (Some(rate), Some(0.0), "ok".to_string()),
        Err(e) => (None, None, format!("error: {e}")),
    };
    ResultRow {
        series_label: series.map(|s| s.label.clone()),
        sweep_value: value,
        mode,
        evaluator: Evaluator::Analytic,
        mean,
        ci95_half_width: ci,
        trials: 0,
        status,
    }
}

/// Runs the full grid. Monte Carlo points fan out to the worker pool and
/// land back in deterministic slots; analytic points are cheap and run in
/// place. Row order is series, then sweep value, then mode, then evaluator
/// in spec order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable, ConfigError> {
    spec.validate()?;
    let q = QuadratureSettings::default();

    // None stands for the single unlabeled series.
    let series_slots: Vec<Option<&SeriesSpec>> = if spec.series.is_empty() {
        vec![None]
    } else {
        spec.series.iter().map(Some).collect()
    };

    let wants_mc = spec.evaluators.contains(&Evaluator::MonteCarlo);
    let mc_jobs: Vec<(usize, usize, Mode)> = if wants_mc {
        series_slots
            .iter()
            .enumerate()
            .flat_map(|(si, _)| {
                let modes = &spec.modes;
                (0..spec.sweep_values.len())
                    .flat_map(move |vi| modes.iter().map(move |&m| (si, vi, m)))
            })
            .collect()
    } else {
        Vec::new()
    };

    let mc_results: Vec<Result<sim::MetricEstimate, String>> = mc_jobs
        .par_iter()
        .map(|&(si, vi, mode)| {
            let value = spec.sweep_values[vi];
            let params = point_params(spec, series_slots[si], value).map_err(|e| e.to_string())?;
            let seed = point_seed(spec.master_seed, series_slots[si], value, mode);
            sim::estimate_rate(mode, &params, &spec.sim, spec.trials_per_point, seed)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut rows = Vec::new();
    let mut job_idx = 0;
    for (si, series) in series_slots.iter().enumerate() {
        for &value in &spec.sweep_values {
            for &mode in &spec.modes {
                for &evaluator in &spec.evaluators {
                    match evaluator {
                        Evaluator::Analytic => {
                            rows.push(analytic_row(spec, *series, value, mode, &q));
                        }
                        Evaluator::MonteCarlo => {
                            // Jobs were enumerated with this exact nesting,
                            // so the slot lines up by construction.
                            debug_assert_eq!(mc_jobs[job_idx].0, si);
                            debug_assert_eq!(mc_jobs[job_idx].2, mode);
                            let (mean, ci, trials, status) = match &mc_results[job_idx] {
                                Ok(est) => (
                                    Some(est.mean),
                                    Some(est.half_width_95),
                                    est.trials,
                                    "ok".to_string(),
                                ),
                                Err(e) => (None, None, 0, format!("error: {e}")),
                            };
                            rows.push(ResultRow {
                                series_label: series.map(|s| s.label.clone()),
                                sweep_value: value,
                                mode,
                                evaluator,
                                mean,
                                ci95_half_width: ci,
                                trials,
                                status,
                            });
                            job_idx += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(ResultTable { rows })
}

/// Side-by-side view of both engines at every grid point, for the compare
/// subcommand. Pure function of the table, so output stays deterministic.
pub fn deviation_report(spec: &ExperimentSpec, table: &ResultTable) -> String {
    let mut out = String::new();
    let mut within = 0usize;
    let mut outside = 0usize;
    let mut incomplete = 0usize;
    let _ = writeln!(
        out,
        "analytic vs monte-carlo rate, {} ({} swept):",
        spec.experiment_id,
        spec.swept_parameter.name()
    );
    let mut cells: Vec<(Option<&str>, f64, Mode)> = Vec::new();
    for row in &table.rows {
        let key = (row.series_label.as_deref(), row.sweep_value, row.mode);
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    for (label, value, mode) in cells {
        let pick = |ev: Evaluator| {
            table.rows.iter().find(|r| {
                r.series_label.as_deref() == label
                    && r.sweep_value == value
                    && r.mode == mode
                    && r.evaluator == ev
            })
        };
        let name = match label {
            Some(l) => format!("{mode} {}={value} [{l}]", spec.swept_parameter.name()),
            None => format!("{mode} {}={value}", spec.swept_parameter.name()),
        };
        match (pick(Evaluator::Analytic), pick(Evaluator::MonteCarlo)) {
            (Some(a), Some(m)) if a.is_ok() && m.is_ok() => {
                let (an, mc, hw) = (a.mean.unwrap(), m.mean.unwrap(), m.ci95_half_width.unwrap());
                let delta = mc - an;
                let rel = if an != 0.0 { delta / an } else { f64::INFINITY };
                let verdict = if delta.abs() <= hw {
                    within += 1;
                    "within 95% CI"
                } else {
                    outside += 1;
                    "outside 95% CI"
                };
                let _ = writeln!(
                    out,
                    "  {name}: analytic {an:.6}, mc {mc:.6} +/- {hw:.6}, delta {delta:+.6} ({:+.2}%), {verdict}",
                    rel * 100.0
                );
            }
            (a, m) => {
                incomplete += 1;
                let why = [a, m]
                    .iter()
                    .flatten()
                    .filter(|r| !r.is_ok())
                    .map(|r| r.status.clone())
                    .collect::<Vec<_>>()
                    .join("; ");
                let _ = writeln!(out, "  {name}: incomplete ({why})");
            }
        }
    }
    let _ = writeln!(
        out,
        "summary: {within} within CI, {outside} outside CI, {incomplete} incomplete"
    );
    out
}

/// The built-in sweep presets. Grids match the reference operating points;
/// each preset writes `<name>.csv` and `<name>.svg` unless overridden.
pub fn figure_preset(name: &str) -> Result<ExperimentSpec, ConfigError> {
    let db = crate::config::db_to_linear;
    let mut spec = ExperimentSpec::single_point(name);
    spec.out_svg = Some(std::path::PathBuf::from(format!("{name}.svg")));
    match name {
        "fig1" => {
            spec.swept_parameter = SweepParameter::D2dLinkDistance;
            spec.sweep_values = vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0];
            spec.trials_per_point = 50_000;
            spec.modes = vec![Mode::D2d];
            spec.series = [0.0, 6.0]
                .iter()
                .map(|&t| SeriesSpec {
                    label: format!("d2d_sir_threshold_db={t}"),
                    parameter: SweepParameter::D2dSirThreshold,
                    value: db(t),
                })
                .collect();
        }
        "fig2" => {
            spec.swept_parameter = SweepParameter::FapDensity;
            spec.sweep_values = vec![1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 6e-4, 7e-4, 8e-4, 9e-4, 1e-3];
            spec.trials_per_point = 20_000;
            spec.modes = vec![Mode::NearestFap];
            spec.series = [0.0, 6.0]
                .iter()
                .map(|&t| SeriesSpec {
                    label: format!("fap_sir_threshold_db={t}"),
                    parameter: SweepParameter::FapSirThreshold,
                    value: db(t),
                })
                .collect();
        }
        "fig3" => {
            spec.swept_parameter = SweepParameter::ClusterRadius;
            spec.sweep_values = vec![45.0, 50.0, 55.0, 60.0, 65.0, 70.0];
            spec.trials_per_point = 10_000;
            spec.modes = vec![Mode::Coordination];
            spec.series = [200.0, 400.0, 800.0]
                .iter()
                .map(|&c| SeriesSpec {
                    label: format!("fap_cache_size={c}"),
                    parameter: SweepParameter::FapCacheSize,
                    value: c,
                })
                .collect();
        }
        other => {
            return Err(ConfigError(format!(
                "unknown figure preset '{other}' (available: fig1, fig2, fig3)"
            )))
        }
    }
    spec.out_csv = std::path::PathBuf::from(format!("{name}.csv"));
    spec.validate()?;
    Ok(spec)
}
