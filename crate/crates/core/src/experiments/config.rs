//! Layered run configuration.
//!
//! Values come from three layers, later ones winning: built-in defaults
//! (the reference network of 500 files, 100 heads, 250 members, ...), a flat
//! `key = value` file, and command-line flags. Every layer is a list of
//! string pairs, so file keys and flags share one parser and one set of
//! error messages.
//!
//! | key | flag | meaning | default |
//! |-----|------|---------|---------|
//! | `cell_radius` | `--cell-radius` | cell radius R_C in meters | 200 |
//! | `cluster_radius` | `--cluster-radius` | D2D radius R_D in meters | 50 |
//! | `files` | `--files` | library size M | 500 |
//! | `gamma` | `--gamma` | Zipf exponent | 1 |
//! | `heads` | `--heads` | cluster heads | 100 |
//! | `members` | `--members` | cluster members | 250 |
//! | `omega_cache` | `--omega-cache` | files per head cache | 10 |
//! | `omega` | `--omega` | D2D/cellular energy ratio | 0.1 |
//! | `seed` | `--seed` | master seed | 42 |
//! | `region` | `--region` | `torus` or `disk` | torus |
//! | `trials` | `--trials` | deployments per simulated point | 400 |
//! | `requests_per_trial` | `--requests-per-trial` | request rounds per deployment | 1 |
//! | `format` | `--format` | `csv` or `csv+svg` | csv |
//! | `preset` | `--preset` | `fig2`..`fig6` or `custom` | |
//! | `swept` | `--swept` | `mo`, `gamma` or `phi` | per preset |
//! | `grid` | `--grid` | comma-separated swept values | per preset |
//! | `strategies` | `--strategies` | comma list of `lhp`, `lec`, `mpc`, `eprc`, `topm`, `topm:<n>` | per preset |
//! | `metric` | `--metric` | `hit`, `active`, `ec` or `mo` | per preset |
//! | `version` | | informational, written to manifests | |

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::montecarlo::SimConfig;
use crate::popularity::ZipfCatalog;
use crate::spatial::{NetworkParams, RegionMode};

use super::sweep::{Metric, PlacementRule, Preset, SweepSpec, SweptVariable};
use super::CliError;

pub const KEYS: &[&str] = &[
    "cell_radius",
    "cluster_radius",
    "files",
    "gamma",
    "heads",
    "members",
    "omega_cache",
    "omega",
    "seed",
    "region",
    "trials",
    "requests_per_trial",
    "format",
    "preset",
    "swept",
    "grid",
    "strategies",
    "metric",
    "version",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    CsvSvg,
}

impl OutputFormat {
    fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::CsvSvg => "csv+svg",
        }
    }
}

/// Simulation settings shared by every simulated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub trials: u32,
    pub requests_per_trial: u32,
    pub region: RegionMode,
    pub seed: u64,
}

impl SimSettings {
    pub fn config(&self, strategy: crate::caching::CacheStrategy) -> SimConfig {
        SimConfig {
            trials: self.trials,
            requests_per_trial: self.requests_per_trial,
            region: self.region,
            seed: self.seed,
            strategy,
        }
    }
}

/// Ordered `key = value` pairs from one configuration layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer {
    pairs: Vec<(String, String)>,
}

impl Layer {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.pairs.push((key.to_string(), value.into()));
    }

    /// Parses the flat file format: one `key = value` per line, `#` starts
    /// a comment, blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut layer = Layer::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected 'key = value', got '{line}'", n + 1))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::key(key, "unknown configuration key"));
            }
            layer.set(key, value.trim());
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: NetworkParams,
    pub files: u32,
    pub gamma: f64,
    pub sim: SimSettings,
    pub format: OutputFormat,
    /// Present only when a preset was selected.
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn catalog(&self) -> ZipfCatalog {
        ZipfCatalog::new(self.files, self.gamma).expect("validated at resolution")
    }

    /// The resolved configuration in the file format; feeding it back via
    /// `--config` reproduces the run.
    pub fn manifest(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "# d2dcache run manifest");
        let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "cell_radius = {}", p.cell_radius);
        let _ = writeln!(out, "cluster_radius = {}", p.cluster_radius);
        let _ = writeln!(out, "files = {}", self.files);
        let _ = writeln!(out, "gamma = {}", self.gamma);
        let _ = writeln!(out, "heads = {}", p.heads);
        let _ = writeln!(out, "members = {}", p.members);
        let _ = writeln!(out, "omega_cache = {}", p.capacity);
        let _ = writeln!(out, "omega = {}", p.energy_ratio);
        let _ = writeln!(out, "seed = {}", self.sim.seed);
        let _ = writeln!(out, "region = {}", self.sim.region);
        let _ = writeln!(out, "trials = {}", self.sim.trials);
        let _ = writeln!(out, "requests_per_trial = {}", self.sim.requests_per_trial);
        let _ = writeln!(out, "format = {}", self.format.as_str());
        if let Some(s) = &self.sweep {
            let _ = writeln!(out, "preset = {}", s.preset);
            let _ = writeln!(out, "swept = {}", s.swept);
            let grid: Vec<String> = s.grid.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "grid = {}", grid.join(","));
            let rules: Vec<String> = s.strategies.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(out, "strategies = {}", rules.join(","));
            let _ = writeln!(out, "metric = {}", s.metric);
        }
        out
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::key(key, format!("invalid value '{value}'")))
}

fn parse_list<T, F>(key: &str, value: &str, item: F) -> Result<Vec<T>, CliError>
where
    F: Fn(&str) -> Result<T, String>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(s).map_err(|e| CliError::key(key, e)))
        .collect()
}

#[derive(Default)]
struct SweepKeys {
    preset: Option<Preset>,
    swept: Option<SweptVariable>,
    grid: Option<Vec<f64>>,
    strategies: Option<Vec<PlacementRule>>,
    metric: Option<Metric>,
}

/// Merges `layers` (lowest priority first) over the defaults and validates
/// the result. Errors name the offending key.
pub fn resolve(layers: &[Layer]) -> Result<RunConfig, CliError> {
    let mut params = NetworkParams::default();
    let mut files = 500u32;
    let mut gamma = 1.0f64;
    let mut sim = SimSettings {
        trials: 400,
        requests_per_trial: 1,
        region: RegionMode::Torus,
        seed: 42,
    };
    let mut format = OutputFormat::Csv;
    let mut sk = SweepKeys::default();

    for (key, value) in layers.iter().flat_map(|l| &l.pairs) {
        let (key, value) = (key.as_str(), value.as_str());
        match key {
            "cell_radius" => params.cell_radius = parse_num(key, value)?,
            "cluster_radius" => params.cluster_radius = parse_num(key, value)?,
            "files" => files = parse_num(key, value)?,
            "gamma" => gamma = parse_num(key, value)?,
            "heads" => params.heads = parse_num(key, value)?,
            "members" => params.members = parse_num(key, value)?,
            "omega_cache" => params.capacity = parse_num(key, value)?,
            "omega" => params.energy_ratio = parse_num(key, value)?,
            "seed" => sim.seed = parse_num(key, value)?,
            "region" => sim.region = value.parse().map_err(|e: String| CliError::key(key, e))?,
            "trials" => sim.trials = parse_num(key, value)?,
            "requests_per_trial" => sim.requests_per_trial = parse_num(key, value)?,
            "format" => {
                format = match value {
                    "csv" => OutputFormat::Csv,
                    "csv+svg" => OutputFormat::CsvSvg,
                    _ => return Err(CliError::key(key, format!("unknown format '{value}' (expected csv|csv+svg)"))),
                }
            }
            "preset" => sk.preset = Some(value.parse().map_err(|e: String| CliError::key(key, e))?),
            "swept" => sk.swept = Some(value.parse().map_err(|e: String| CliError::key(key, e))?),
            "grid" => sk.grid = Some(parse_list(key, value, |s| {
                s.parse::<f64>().map_err(|_| format!("invalid grid value '{s}'"))
            })?),
            "strategies" => sk.strategies = Some(parse_list(key, value, str::parse)?),
            "metric" => sk.metric = Some(value.parse().map_err(|e: String| CliError::key(key, e))?),
            "version" => {}
            _ => return Err(CliError::key(key, "unknown configuration key")),
        }
    }

    if !(params.cell_radius.is_finite() && params.cell_radius > 0.0) {
        return Err(CliError::key("cell_radius", "must be positive"));
    }
    if !(params.cluster_radius > 0.0 && params.cluster_radius <= params.cell_radius) {
        return Err(CliError::key(
            "cluster_radius",
            format!("must satisfy 0 < R_D <= R_C = {}", params.cell_radius),
        ));
    }
    if files == 0 {
        return Err(CliError::key("files", "library must hold at least one file"));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(CliError::key("gamma", "must be finite and >= 0"));
    }
    if params.capacity == 0 {
        return Err(CliError::key("omega_cache", "cache capacity must be >= 1"));
    }
    if params.capacity > files {
        return Err(CliError::key(
            "omega_cache",
            format!("cache capacity Omega = {} must satisfy Omega <= M = {files}", params.capacity),
        ));
    }
    if !(params.energy_ratio.is_finite() && params.energy_ratio >= 0.0) {
        return Err(CliError::key("omega", "energy ratio must be finite and >= 0"));
    }
    if sim.trials == 0 {
        return Err(CliError::key("trials", "must be >= 1"));
    }
    if sim.requests_per_trial == 0 {
        return Err(CliError::key("requests_per_trial", "must be >= 1"));
    }

    let sweep = match sk.preset {
        Some(preset) => Some(SweepSpec::resolve(
            preset,
            sk.swept,
            sk.grid,
            sk.strategies,
            sk.metric,
            &params,
            files,
        )?),
        None => {
            if sk.swept.is_some() || sk.grid.is_some() || sk.strategies.is_some() || sk.metric.is_some() {
                return Err(CliError::key("preset", "sweep keys given without a preset"));
            }
            None
        }
    };

    Ok(RunConfig {
        params,
        files,
        gamma,
        sim,
        format,
        sweep,
    })
}
