//! Experiment configuration: the spec type, the flat key-value config
//! format, and the sweepable-parameter vocabulary.
//!
//! The config format is one `key = value` pair per line, `#` comments,
//! blank lines ignored. Keys carry their unit in the suffix: `_dbm` and
//! `_db` inputs are converted to linear milliwatts and linear ratios while
//! parsing, so everything downstream is linear. Serialization emits the
//! canonical linear keys with shortest round-trip float formatting, which
//! makes parse(serialize(spec)) reproduce the spec exactly.

use fogsim_core::cache::ContentCatalog;
use fogsim_core::params::{Mode, NetworkParams};
use fogsim_core::sim::{Placement, SimOptions};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Which engine produces a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    Analytic,
    MonteCarlo,
}

impl Evaluator {
    pub const ALL: [Evaluator; 2] = [Evaluator::Analytic, Evaluator::MonteCarlo];

    pub fn label(self) -> &'static str {
        match self {
            Evaluator::Analytic => "analytic",
            Evaluator::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Evaluator {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "analytic" => Ok(Evaluator::Analytic),
            "monte-carlo" => Ok(Evaluator::MonteCarlo),
            other => Err(err(format!(
                "unknown evaluator '{other}' (expected analytic or monte-carlo)"
            ))),
        }
    }
}

/// A parameter the sweep (or a series grid) can vary. Names are the config
/// keys of the linear form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    FapDensity,
    UserDensity,
    D2dSupport,
    D2dPowerMw,
    FapPowerMw,
    D2dPathloss,
    FapPathloss,
    D2dSirThreshold,
    FapSirThreshold,
    D2dRange,
    ClusterRadius,
    D2dLinkDistance,
    D2dCacheSize,
    FapCacheSize,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::FapDensity => "fap_density_per_m2",
            SweepParameter::UserDensity => "user_density_per_m2",
            SweepParameter::D2dSupport => "d2d_support_probability",
            SweepParameter::D2dPowerMw => "d2d_power_mw",
            SweepParameter::FapPowerMw => "fap_power_mw",
            SweepParameter::D2dPathloss => "d2d_pathloss_exponent",
            SweepParameter::FapPathloss => "fap_pathloss_exponent",
            SweepParameter::D2dSirThreshold => "d2d_sir_threshold",
            SweepParameter::FapSirThreshold => "fap_sir_threshold",
            SweepParameter::D2dRange => "d2d_range_m",
            SweepParameter::ClusterRadius => "cluster_radius_m",
            SweepParameter::D2dLinkDistance => "d2d_link_distance_m",
            SweepParameter::D2dCacheSize => "d2d_cache_size",
            SweepParameter::FapCacheSize => "fap_cache_size",
        }
    }

    /// Applies one swept value to a parameter set. Cache sizes rebuild the
    /// catalog and demand integral values.
    pub fn apply(self, params: &mut NetworkParams, value: f64) -> Result<(), ConfigError> {
        let name = self.name();
        if !value.is_finite() {
            return Err(err(format!(
                "sweep value for {name} must be finite, got {value}"
            )));
        }
        let mut set_cache = |d2d: Option<f64>, fap: Option<f64>| -> Result<(), ConfigError> {
            let as_count = |v: f64| -> Result<usize, ConfigError> {
                if v.fract() != 0.0 || v < 1.0 {
                    return Err(err(format!(
                        "sweep value for {name} must be a positive integer, got {v}"
                    )));
                }
                Ok(v as usize)
            };
            let c = &params.catalog;
            params.catalog = ContentCatalog::new(
                c.content_count(),
                c.d2d_exponent(),
                c.fap_exponent(),
                d2d.map(&as_count)
                    .transpose()?
                    .unwrap_or(c.d2d_cache_size()),
                fap.map(&as_count)
                    .transpose()?
                    .unwrap_or(c.fap_cache_size()),
            )
            .map_err(|e| err(format!("sweep value for {name}: {e}")))?;
            Ok(())
        };
        match self {
            SweepParameter::FapDensity => params.fap_density = value,
            SweepParameter::UserDensity => params.user_density = value,
            SweepParameter::D2dSupport => params.d2d_support = value,
            SweepParameter::D2dPowerMw => params.d2d_power_mw = value,
            SweepParameter::FapPowerMw => params.fap_power_mw = value,
            SweepParameter::D2dPathloss => params.d2d_pathloss = value,
            SweepParameter::FapPathloss => params.fap_pathloss = value,
            SweepParameter::D2dSirThreshold => params.d2d_sir_threshold = value,
            SweepParameter::FapSirThreshold => params.fap_sir_threshold = value,
            SweepParameter::D2dRange => params.d2d_range_m = value,
            SweepParameter::ClusterRadius => params.cluster_radius_m = value,
            SweepParameter::D2dLinkDistance => params.d2d_link_distance_m = value,
            SweepParameter::D2dCacheSize => set_cache(Some(value), None)?,
            SweepParameter::FapCacheSize => set_cache(None, Some(value))?,
        }
        Ok(())
    }
}

impl FromStr for SweepParameter {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        for p in [
            SweepParameter::FapDensity,
            SweepParameter::UserDensity,
            SweepParameter::D2dSupport,
            SweepParameter::D2dPowerMw,
            SweepParameter::FapPowerMw,
            SweepParameter::D2dPathloss,
            SweepParameter::FapPathloss,
            SweepParameter::D2dSirThreshold,
            SweepParameter::FapSirThreshold,
            SweepParameter::D2dRange,
            SweepParameter::ClusterRadius,
            SweepParameter::D2dLinkDistance,
            SweepParameter::D2dCacheSize,
            SweepParameter::FapCacheSize,
        ] {
            if p.name() == s {
                return Ok(p);
            }
        }
        Err(err(format!("'{s}' does not name a sweepable parameter")))
    }
}

/// One secondary-parameter setting, producing one curve per mode and
/// evaluator in the outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    /// Shown in outputs; derived from the config key and value as written.
    pub label: String,
    pub parameter: SweepParameter,
    /// Linear value (dB given in the config already converted).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment_id: String,
    pub base_params: NetworkParams,
    pub swept_parameter: SweepParameter,
    /// Non-empty and strictly monotone.
    pub sweep_values: Vec<f64>,
    pub trials_per_point: u64,
    pub master_seed: u64,
    pub out_csv: PathBuf,
    pub out_svg: Option<PathBuf>,
    pub modes: Vec<Mode>,
    pub evaluators: Vec<Evaluator>,
    /// Secondary grid; empty means a single unlabeled series.
    pub series: Vec<SeriesSpec>,
    pub sim: SimOptions,
}

impl ExperimentSpec {
    /// A single-point run at the Table I operating point; subcommands
    /// without a config file start from this.
    pub fn single_point(id: &str) -> Self {
        Self {
            experiment_id: id.to_string(),
            base_params: NetworkParams::default(),
            swept_parameter: SweepParameter::D2dLinkDistance,
            sweep_values: vec![NetworkParams::default().d2d_link_distance_m],
            trials_per_point: 20_000,
            master_seed: 42,
            out_csv: PathBuf::from(format!("{id}.csv")),
            out_svg: None,
            modes: Mode::ALL.to_vec(),
            evaluators: Evaluator::ALL.to_vec(),
            series: Vec::new(),
            sim: SimOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.base_params
            .validate()
            .map_err(|e| err(format!("base parameters: {e}")))?;
        self.sim
            .validate()
            .map_err(|e| err(format!("sim options: {e}")))?;
        if self.experiment_id.is_empty() {
            return Err(err("experiment_id must be non-empty"));
        }
        if self.sweep_values.is_empty() {
            return Err(err("sweep_values must be non-empty"));
        }
        let ascending = self.sweep_values.windows(2).all(|w| w[0] < w[1]);
        let descending = self.sweep_values.windows(2).all(|w| w[0] > w[1]);
        if !(ascending || descending) {
            return Err(err("sweep_values must be strictly monotone"));
        }
        if self.trials_per_point == 0 {
            return Err(err("trials_per_point must be positive"));
        }
        if self.modes.is_empty() {
            return Err(err("modes must be non-empty"));
        }
        if self.evaluators.is_empty() {
            return Err(err("evaluators must be non-empty"));
        }
        // Every grid point must produce a valid parameter set.
        for series in std::iter::once(None).chain(self.series.iter().map(Some)) {
            for &v in &self.sweep_values {
                let mut p = self.base_params.clone();
                if let Some(s) = series {
                    s.parameter.apply(&mut p, s.value)?;
                }
                self.swept_parameter.apply(&mut p, v)?;
                p.validate().map_err(|e| {
                    err(format!(
                        "sweep point {}={v}{}: {e}",
                        self.swept_parameter.name(),
                        series
                            .map(|s| format!(" ({})", s.label))
                            .unwrap_or_default()
                    ))
                })?;
            }
        }
        Ok(())
    }
}

const REQUIRED_KEYS: [&str; 6] = [
    "experiment_id",
    "swept_parameter",
    "sweep_values",
    "trials_per_point",
    "master_seed",
    "out_csv",
];

/// All recognized keys, for unknown-key rejection and diagnostics. Keys
/// with unit variants list every accepted spelling.
const KNOWN_KEYS: [&str; 32] = [
    "experiment_id",
    "swept_parameter",
    "sweep_values",
    "trials_per_point",
    "master_seed",
    "out_csv",
    "out_svg",
    "modes",
    "evaluators",
    "series_parameter",
    "series_values",
    "window_radius_m",
    "placement",
    "fap_density_per_m2",
    "user_density_per_m2",
    "d2d_support_probability",
    "d2d_power_mw",
    "d2d_power_dbm",
    "fap_power_mw",
    "fap_power_dbm",
    "d2d_pathloss_exponent",
    "fap_pathloss_exponent",
    "d2d_sir_threshold",
    "d2d_sir_threshold_db",
    "fap_sir_threshold",
    "fap_sir_threshold_db",
    "d2d_range_m",
    "cluster_radius_m",
    "d2d_link_distance_m",
    "content_count",
    "d2d_popularity_exponent",
    "fap_popularity_exponent",
];

const CACHE_KEYS: [&str; 2] = ["d2d_cache_size", "fap_cache_size"];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

struct RawConfig {
    /// key -> (line number, value text)
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                err(format!(
                    "line {line_no}: expected 'key = value', got '{line}'"
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) && !CACHE_KEYS.contains(&key.as_str()) {
                return Err(err(format!("line {line_no}: unknown key '{key}'")));
            }
            if let Some((prev_line, _)) = entries.insert(key.clone(), (line_no, value)) {
                return Err(err(format!(
                    "line {line_no}: key '{key}' already set on line {prev_line}"
                )));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn parse_as<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, text)) => text.parse::<T>().map(Some).map_err(|_| {
                err(format!(
                    "line {line}: key '{key}': cannot parse '{text}' as {what}"
                ))
            }),
        }
    }

    /// One logical field with a linear spelling and a dB spelling; both
    /// present is ambiguous and rejected.
    fn linear_or_db(
        &mut self,
        linear_key: &str,
        db_key: &str,
        convert: fn(f64) -> f64,
    ) -> Result<Option<f64>, ConfigError> {
        let linear: Option<f64> = self.parse_as(linear_key, "a number")?;
        let db_entry = self.take(db_key);
        match (linear, db_entry) {
            (Some(_), Some((line, _))) => Err(err(format!(
                "line {line}: '{db_key}' conflicts with '{linear_key}'; give one"
            ))),
            (Some(v), None) => Ok(Some(v)),
            (None, Some((line, text))) => {
                let db: f64 = text.parse().map_err(|_| {
                    err(format!(
                        "line {line}: key '{db_key}': cannot parse '{text}' as a number"
                    ))
                })?;
                Ok(Some(convert(db)))
            }
            (None, None) => Ok(None),
        }
    }
}

fn parse_list<T: FromStr>(
    text: &str,
    key: &str,
    line: usize,
    what: &str,
) -> Result<Vec<T>, ConfigError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>().map_err(|_| {
                err(format!(
                    "line {line}: key '{key}': cannot parse '{s}' as {what}"
                ))
            })
        })
        .collect()
}

fn parse_mode(s: &str) -> Result<Mode, ConfigError> {
    match s {
        "d2d" => Ok(Mode::D2d),
        "fap" => Ok(Mode::NearestFap),
        "coord" => Ok(Mode::Coordination),
        other => Err(err(format!(
            "unknown mode '{other}' (expected d2d, fap, or coord)"
        ))),
    }
}

/// Parses config text into a spec. Unknown keys are rejected with their
/// line; dB-suffixed fields come out linear; anything not given falls back
/// to the reference defaults.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let mut raw = RawConfig::parse(text)?;

    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .copied()
        .filter(|k| !raw.entries.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(err(format!(
            "missing required keys: {}",
            missing.join(", ")
        )));
    }

    let mut params = NetworkParams::default();
    if let Some(v) = raw.parse_as("fap_density_per_m2", "a number")? {
        params.fap_density = v;
    }
    if let Some(v) = raw.parse_as("user_density_per_m2", "a number")? {
        params.user_density = v;
    }
    if let Some(v) = raw.parse_as("d2d_support_probability", "a number")? {
        params.d2d_support = v;
    }
    if let Some(v) = raw.linear_or_db("d2d_power_mw", "d2d_power_dbm", dbm_to_mw)? {
        params.d2d_power_mw = v;
    }
    if let Some(v) = raw.linear_or_db("fap_power_mw", "fap_power_dbm", dbm_to_mw)? {
        params.fap_power_mw = v;
    }
    if let Some(v) = raw.parse_as("d2d_pathloss_exponent", "a number")? {
        params.d2d_pathloss = v;
    }
    if let Some(v) = raw.parse_as("fap_pathloss_exponent", "a number")? {
        params.fap_pathloss = v;
    }
    if let Some(v) = raw.linear_or_db("d2d_sir_threshold", "d2d_sir_threshold_db", db_to_linear)? {
        params.d2d_sir_threshold = v;
    }
    if let Some(v) = raw.linear_or_db("fap_sir_threshold", "fap_sir_threshold_db", db_to_linear)? {
        params.fap_sir_threshold = v;
    }
    if let Some(v) = raw.parse_as("d2d_range_m", "a number")? {
        params.d2d_range_m = v;
    }
    if let Some(v) = raw.parse_as("cluster_radius_m", "a number")? {
        params.cluster_radius_m = v;
    }
    if let Some(v) = raw.parse_as("d2d_link_distance_m", "a number")? {
        params.d2d_link_distance_m = v;
    }

    let c = &params.catalog;
    let content_count = raw
        .parse_as("content_count", "a count")?
        .unwrap_or(c.content_count());
    let d2d_exp = raw
        .parse_as("d2d_popularity_exponent", "a number")?
        .unwrap_or(c.d2d_exponent());
    let fap_exp = raw
        .parse_as("fap_popularity_exponent", "a number")?
        .unwrap_or(c.fap_exponent());
    let d2d_cache = raw
        .parse_as("d2d_cache_size", "a count")?
        .unwrap_or(c.d2d_cache_size());
    let fap_cache = raw
        .parse_as("fap_cache_size", "a count")?
        .unwrap_or(c.fap_cache_size());
    params.catalog = ContentCatalog::new(content_count, d2d_exp, fap_exp, d2d_cache, fap_cache)
        .map_err(|e| err(format!("catalog: {e}")))?;

    let mut sim = SimOptions::default();
    if let Some(v) = raw.parse_as("window_radius_m", "a number")? {
        sim.window_radius_m = v;
    }
    if let Some((line, text)) = raw.take("placement") {
        sim.placement = match text.as_str() {
            "thinning" => Placement::Thinning,
            "identical" => Placement::Identical,
            other => {
                return Err(err(format!(
                    "line {line}: unknown placement '{other}' (expected thinning or identical)"
                )))
            }
        };
    }

    let experiment_id = raw.take("experiment_id").expect("required").1;
    let (swept_line, swept_text) = raw.take("swept_parameter").expect("required");
    // A dB-suffixed sweep name means the sweep values are given in dB.
    let (swept_parameter, sweep_in_db) = match swept_text.as_str() {
        "d2d_sir_threshold_db" => (SweepParameter::D2dSirThreshold, true),
        "fap_sir_threshold_db" => (SweepParameter::FapSirThreshold, true),
        "d2d_power_dbm" => (SweepParameter::D2dPowerMw, true),
        "fap_power_dbm" => (SweepParameter::FapPowerMw, true),
        name => (
            name.parse::<SweepParameter>()
                .map_err(|e| err(format!("line {swept_line}: {e}")))?,
            false,
        ),
    };
    let (values_line, values_text) = raw.take("sweep_values").expect("required");
    let mut sweep_values: Vec<f64> =
        parse_list(&values_text, "sweep_values", values_line, "a number")?;
    if sweep_in_db {
        for v in &mut sweep_values {
            *v = db_to_linear(*v);
        }
    }

    let trials_per_point = raw
        .parse_as("trials_per_point", "a count")?
        .expect("required");
    let master_seed = raw
        .parse_as("master_seed", "a 64-bit seed")?
        .expect("required");
    let out_csv = PathBuf::from(raw.take("out_csv").expect("required").1);
    let out_svg = raw.take("out_svg").map(|(_, text)| PathBuf::from(text));

    let modes = match raw.take("modes") {
        None => Mode::ALL.to_vec(),
        Some((line, text)) => text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_mode(s).map_err(|e| err(format!("line {line}: {e}"))))
            .collect::<Result<_, _>>()?,
    };
    let evaluators = match raw.take("evaluators") {
        None => Evaluator::ALL.to_vec(),
        Some((line, text)) => text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<Evaluator>()
                    .map_err(|e| err(format!("line {line}: {e}")))
            })
            .collect::<Result<_, _>>()?,
    };

    let series = match (raw.take("series_parameter"), raw.take("series_values")) {
        (None, None) => Vec::new(),
        (Some((line, _)), None) | (None, Some((line, _))) => {
            return Err(err(format!(
                "line {line}: series_parameter and series_values must be given together"
            )))
        }
        (Some((p_line, p_text)), Some((v_line, v_text))) => {
            let (parameter, in_db) = match p_text.as_str() {
                "d2d_sir_threshold_db" => (SweepParameter::D2dSirThreshold, true),
                "fap_sir_threshold_db" => (SweepParameter::FapSirThreshold, true),
                "d2d_power_dbm" => (SweepParameter::D2dPowerMw, true),
                "fap_power_dbm" => (SweepParameter::FapPowerMw, true),
                name => (
                    name.parse::<SweepParameter>()
                        .map_err(|e| err(format!("line {p_line}: {e}")))?,
                    false,
                ),
            };
            let raw_values: Vec<f64> = parse_list(&v_text, "series_values", v_line, "a number")?;
            raw_values
                .into_iter()
                .map(|v| SeriesSpec {
                    label: format!("{p_text}={v}"),
                    parameter,
                    value: if in_db { db_to_linear(v) } else { v },
                })
                .collect()
        }
    };

    // Everything recognized was consumed above; RawConfig::parse already
    // rejected unknown keys, so nothing can remain.
    debug_assert!(raw.entries.is_empty());

    let spec = ExperimentSpec {
        experiment_id,
        base_params: params,
        swept_parameter,
        sweep_values,
        trials_per_point,
        master_seed,
        out_csv,
        out_svg,
        modes,
        evaluators,
        series,
        sim,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &std::path::Path) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| err(format!("{}: {e}", path.display())))
}

/// Emits the canonical linear-key config for a spec. `{:?}` float
/// formatting is shortest-round-trip, so re-parsing reproduces the spec
/// bit for bit.
pub fn serialize_config(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    let p = &spec.base_params;
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("experiment_id", spec.experiment_id.clone());
    kv("swept_parameter", spec.swept_parameter.name().to_string());
    kv(
        "sweep_values",
        spec.sweep_values
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    kv("trials_per_point", spec.trials_per_point.to_string());
    kv("master_seed", spec.master_seed.to_string());
    kv("out_csv", spec.out_csv.display().to_string());
    if let Some(svg) = &spec.out_svg {
        kv("out_svg", svg.display().to_string());
    }
    kv(
        "modes",
        spec.modes
            .iter()
            .map(|m| m.label())
            .collect::<Vec<_>>()
            .join(", "),
    );
    kv(
        "evaluators",
        spec.evaluators
            .iter()
            .map(|e| e.label())
            .collect::<Vec<_>>()
            .join(", "),
    );
    if !spec.series.is_empty() {
        // Labels are always "key=value" as the config (or preset) wrote
        // them; emitting those exact fragments makes re-parse rebuild both
        // the linear values and the labels verbatim.
        let key = spec.series[0]
            .label
            .split_once('=')
            .map(|(k, _)| k)
            .unwrap_or(spec.series[0].parameter.name());
        kv("series_parameter", key.to_string());
        kv(
            "series_values",
            spec.series
                .iter()
                .map(|s| {
                    s.label
                        .split_once('=')
                        .map(|(_, v)| v.to_string())
                        .unwrap_or_else(|| format!("{:?}", s.value))
                })
                .collect::<Vec<_>>()
                .join(", "),
        );
    }
    kv("fap_density_per_m2", format!("{:?}", p.fap_density));
    kv("user_density_per_m2", format!("{:?}", p.user_density));
    kv("d2d_support_probability", format!("{:?}", p.d2d_support));
    kv("d2d_power_mw", format!("{:?}", p.d2d_power_mw));
    kv("fap_power_mw", format!("{:?}", p.fap_power_mw));
    kv("d2d_pathloss_exponent", format!("{:?}", p.d2d_pathloss));
    kv("fap_pathloss_exponent", format!("{:?}", p.fap_pathloss));
    kv("d2d_sir_threshold", format!("{:?}", p.d2d_sir_threshold));
    kv("fap_sir_threshold", format!("{:?}", p.fap_sir_threshold));
    kv("d2d_range_m", format!("{:?}", p.d2d_range_m));
    kv("cluster_radius_m", format!("{:?}", p.cluster_radius_m));
    kv(
        "d2d_link_distance_m",
        format!("{:?}", p.d2d_link_distance_m),
    );
    kv("content_count", p.catalog.content_count().to_string());
    kv(
        "d2d_popularity_exponent",
        format!("{:?}", p.catalog.d2d_exponent()),
    );
    kv(
        "fap_popularity_exponent",
        format!("{:?}", p.catalog.fap_exponent()),
    );
    kv("d2d_cache_size", p.catalog.d2d_cache_size().to_string());
    kv("fap_cache_size", p.catalog.fap_cache_size().to_string());
    kv("window_radius_m", format!("{:?}", spec.sim.window_radius_m));
    kv(
        "placement",
        match spec.sim.placement {
            Placement::Thinning => "thinning".to_string(),
            Placement::Identical => "identical".to_string(),
        },
    );
    out
}
