//! Figure sweeps: grids of analytic and simulated points.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic::{self, SumForm};
use crate::caching::CacheStrategy;
use crate::montecarlo::{simulate, Estimate};
use crate::optimize::{optimize_lec, optimize_lhp};
use crate::popularity::ZipfCatalog;
use crate::spatial::NetworkParams;

use super::config::{OutputFormat, RunConfig};
use super::output::{render_svg, write_csv};
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Hit probability against `M_o` for several Zipf exponents.
    Fig2,
    /// Hit probability against the Zipf exponent per strategy and head count.
    Fig3,
    /// Energy ratio against the Zipf exponent per strategy and head count.
    Fig4,
    /// Optimal `M_o` against the Zipf exponent.
    Fig5,
    /// Energy ratio against the member count.
    Fig6,
    Custom,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Custom => "custom",
        })
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "fig2" => Preset::Fig2,
            "fig3" => Preset::Fig3,
            "fig4" => Preset::Fig4,
            "fig5" => Preset::Fig5,
            "fig6" => Preset::Fig6,
            "custom" => Preset::Custom,
            _ => return Err(format!("unknown preset '{s}' (expected fig2..fig6|custom)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptVariable {
    CachedFiles,
    Gamma,
    Members,
}

impl fmt::Display for SweptVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweptVariable::CachedFiles => "mo",
            SweptVariable::Gamma => "gamma",
            SweptVariable::Members => "phi",
        })
    }
}

impl FromStr for SweptVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "mo" => SweptVariable::CachedFiles,
            "gamma" => SweptVariable::Gamma,
            "phi" => SweptVariable::Members,
            _ => return Err(format!("unknown swept variable '{s}' (expected mo|gamma|phi)")),
        })
    }
}

/// What each point reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    HitProb,
    ActiveHeads,
    EcRatio,
    /// The cached-file count chosen by the rule; analytic only.
    CachedFiles,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::HitProb => "hit",
            Metric::ActiveHeads => "active",
            Metric::EcRatio => "ec",
            Metric::CachedFiles => "mo",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "hit" => Metric::HitProb,
            "active" => Metric::ActiveHeads,
            "ec" => Metric::EcRatio,
            "mo" => Metric::CachedFiles,
            _ => return Err(format!("unknown metric '{s}' (expected hit|active|ec|mo)")),
        })
    }
}

/// How a point picks its cached-file count and cache placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementRule {
    /// Top `M_o` with `M_o` maximizing hit probability.
    Lhp,
    /// Top `M_o` with `M_o` minimizing the energy ratio.
    Lec,
    Mpc,
    Eprc,
    /// Top `n` files; `None` takes `n` from the swept value.
    TopM(Option<u32>),
}

impl fmt::Display for PlacementRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementRule::Lhp => f.write_str("lhp"),
            PlacementRule::Lec => f.write_str("lec"),
            PlacementRule::Mpc => f.write_str("mpc"),
            PlacementRule::Eprc => f.write_str("eprc"),
            PlacementRule::TopM(None) => f.write_str("topm"),
            PlacementRule::TopM(Some(n)) => write!(f, "topm:{n}"),
        }
    }
}

impl FromStr for PlacementRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "lhp" => PlacementRule::Lhp,
            "lec" => PlacementRule::Lec,
            "mpc" => PlacementRule::Mpc,
            "eprc" => PlacementRule::Eprc,
            "topm" => PlacementRule::TopM(None),
            _ => match s.strip_prefix("topm:").map(str::parse) {
                Some(Ok(n)) => PlacementRule::TopM(Some(n)),
                _ => {
                    return Err(format!(
                        "unknown strategy '{s}' (expected lhp|lec|mpc|eprc|topm|topm:<n>)"
                    ))
                }
            },
        })
    }
}

impl PlacementRule {
    /// The cached-file count and cache strategy this rule selects.
    pub fn resolve(
        &self,
        params: &NetworkParams,
        catalog: &ZipfCatalog,
        swept_m_o: Option<u32>,
    ) -> Result<(u32, CacheStrategy), CliError> {
        Ok(match *self {
            PlacementRule::Lhp => {
                let m = optimize_lhp(params, catalog)?.m_o_star;
                (m, CacheStrategy::TopM(m))
            }
            PlacementRule::Lec => {
                let m = optimize_lec(params, catalog)?.m_o_star;
                (m, CacheStrategy::TopM(m))
            }
            PlacementRule::Mpc => (params.capacity, CacheStrategy::Mpc),
            PlacementRule::Eprc => (catalog.files(), CacheStrategy::Eprc),
            PlacementRule::TopM(Some(n)) => (n, CacheStrategy::TopM(n)),
            PlacementRule::TopM(None) => {
                let n = swept_m_o.ok_or_else(|| {
                    CliError::key("strategies", "'topm' without a count needs swept = mo")
                })?;
                (n, CacheStrategy::TopM(n))
            }
        })
    }
}

/// Parameter overrides distinguishing the curves of one figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub gamma: Option<f64>,
    pub heads: Option<u32>,
}

impl Series {
    fn label(&self) -> Option<String> {
        match (self.gamma, self.heads) {
            (Some(g), _) => Some(format!("gamma={g}")),
            (None, Some(h)) => Some(format!("heads={h}")),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub preset: Preset,
    pub swept: SweptVariable,
    pub grid: Vec<f64>,
    pub strategies: Vec<PlacementRule>,
    pub metric: Metric,
    pub series: Vec<Series>,
}

/// `{0.5, 0.6, ..., 2.0}` built from exact decimal ratios.
pub fn default_gamma_grid() -> Vec<f64> {
    (5..=20).map(|k| k as f64 / 10.0).collect()
}

impl SweepSpec {
    /// Fills preset defaults, applies the overrides and validates.
    pub fn resolve(
        preset: Preset,
        swept: Option<SweptVariable>,
        grid: Option<Vec<f64>>,
        strategies: Option<Vec<PlacementRule>>,
        metric: Option<Metric>,
        params: &NetworkParams,
        files: u32,
    ) -> Result<SweepSpec, CliError> {
        use PlacementRule::*;
        let by_gamma = |gs: &[f64]| -> Vec<Series> {
            gs.iter().map(|&g| Series { gamma: Some(g), heads: None }).collect()
        };
        let by_heads = |hs: &[u32]| -> Vec<Series> {
            hs.iter().map(|&h| Series { gamma: None, heads: Some(h) }).collect()
        };
        let defaults = match preset {
            Preset::Fig2 => Some((
                SweptVariable::CachedFiles,
                (params.capacity..=files).map(f64::from).collect(),
                vec![TopM(None)],
                Metric::HitProb,
                by_gamma(&[0.8, 1.0, 1.2, 1.4]),
            )),
            Preset::Fig3 => Some((
                SweptVariable::Gamma,
                default_gamma_grid(),
                vec![Lhp, Mpc, Eprc],
                Metric::HitProb,
                by_heads(&[100, 150]),
            )),
            Preset::Fig4 => Some((
                SweptVariable::Gamma,
                default_gamma_grid(),
                vec![Lec, Mpc, Eprc],
                Metric::EcRatio,
                by_heads(&[100, 150]),
            )),
            Preset::Fig5 => Some((
                SweptVariable::Gamma,
                default_gamma_grid(),
                vec![Lhp, Lec],
                Metric::CachedFiles,
                by_heads(&[100, 150]),
            )),
            Preset::Fig6 => Some((
                SweptVariable::Members,
                (1..=10).map(|k| 50.0 * k as f64).collect(),
                vec![Lec, Lhp, Eprc],
                Metric::EcRatio,
                by_gamma(&[1.0, 1.4]),
            )),
            Preset::Custom => None,
        };

        let spec = match defaults {
            Some((d_swept, d_grid, d_rules, d_metric, series)) => {
                if swept.is_some_and(|s| s != d_swept) {
                    return Err(CliError::key("swept", format!("fixed to '{d_swept}' by preset {preset}")));
                }
                if metric.is_some_and(|m| m != d_metric) {
                    return Err(CliError::key("metric", format!("fixed to '{d_metric}' by preset {preset}")));
                }
                SweepSpec {
                    preset,
                    swept: d_swept,
                    grid: grid.unwrap_or(d_grid),
                    strategies: strategies.unwrap_or(d_rules),
                    metric: d_metric,
                    series,
                }
            }
            None => SweepSpec {
                preset,
                swept: swept.ok_or_else(|| CliError::key("swept", "required for the custom preset"))?,
                grid: grid.ok_or_else(|| CliError::key("grid", "required for the custom preset"))?,
                strategies: strategies
                    .ok_or_else(|| CliError::key("strategies", "required for the custom preset"))?,
                metric: metric.unwrap_or(Metric::HitProb),
                series: vec![Series { gamma: None, heads: None }],
            },
        };
        spec.validate(params, files)?;
        Ok(spec)
    }

    fn validate(&self, params: &NetworkParams, files: u32) -> Result<(), CliError> {
        if self.grid.is_empty() {
            return Err(CliError::key("grid", "must not be empty"));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(CliError::key("grid", "values must be finite"));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::key("grid", "values must be strictly increasing"));
        }
        if self.strategies.is_empty() {
            return Err(CliError::key("strategies", "must not be empty"));
        }
        let integral = |v: f64| v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64;
        match self.swept {
            SweptVariable::CachedFiles => {
                if !self.grid.iter().all(|&v| integral(v) && v >= params.capacity as f64 && v <= files as f64) {
                    return Err(CliError::key(
                        "grid",
                        format!("M_o values must be integers in [{}, {files}]", params.capacity),
                    ));
                }
                if self.strategies.iter().any(|r| *r != PlacementRule::TopM(None)) {
                    return Err(CliError::key("strategies", "sweeping mo requires strategies = topm"));
                }
                if self.metric == Metric::CachedFiles {
                    return Err(CliError::key("metric", "'mo' cannot be reported while sweeping mo"));
                }
            }
            SweptVariable::Gamma => {
                if self.grid.iter().any(|&v| v < 0.0) {
                    return Err(CliError::key("grid", "gamma values must be >= 0"));
                }
            }
            SweptVariable::Members => {
                if !self.grid.iter().all(|&v| integral(v) && v >= 1.0) {
                    return Err(CliError::key("grid", "member counts must be positive integers"));
                }
            }
        }
        for rule in &self.strategies {
            match *rule {
                PlacementRule::TopM(Some(n)) if n < params.capacity || n > files => {
                    return Err(CliError::key(
                        "strategies",
                        format!("topm:{n} needs Omega = {} <= n <= M = {files}", params.capacity),
                    ))
                }
                PlacementRule::TopM(None) if self.swept != SweptVariable::CachedFiles => {
                    return Err(CliError::key("strategies", "'topm' without a count needs swept = mo"))
                }
                _ => {}
            }
        }
        if self.metric == Metric::EcRatio && params.members == 0 && self.swept != SweptVariable::Members {
            return Err(CliError::key("members", "energy ratio needs at least one member"));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub swept_value: f64,
    pub strategy: String,
    pub analytic_value: f64,
    pub mc: Option<Estimate>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
struct Point<'a> {
    series: &'a Series,
    rule: PlacementRule,
    x: f64,
}

fn evaluate_point(config: &RunConfig, spec: &SweepSpec, pt: &Point<'_>) -> Result<Row, CliError> {
    let mut params = config.params;
    let mut gamma = pt.series.gamma.unwrap_or(config.gamma);
    if let Some(h) = pt.series.heads {
        params.heads = h;
    }
    let mut swept_m_o = None;
    match spec.swept {
        SweptVariable::CachedFiles => swept_m_o = Some(pt.x as u32),
        SweptVariable::Gamma => gamma = pt.x,
        SweptVariable::Members => params.members = pt.x as u32,
    }
    let catalog = ZipfCatalog::new(config.files, gamma)?;
    let (m_o, strategy) = pt.rule.resolve(&params, &catalog, swept_m_o)?;

    let analytic_value = match spec.metric {
        Metric::HitProb => analytic::hit_prob(&params, &catalog, m_o, SumForm::Closed)?,
        Metric::ActiveHeads => analytic::expected_active_heads(&params, &catalog, m_o, SumForm::Closed)?,
        Metric::EcRatio => analytic::ec_ratio(&params, &catalog, m_o, SumForm::Closed)?,
        Metric::CachedFiles => m_o as f64,
    };
    let mc = match spec.metric {
        Metric::CachedFiles => None,
        metric => {
            let r = simulate(&params, &catalog, &config.sim.config(strategy))?;
            Some(match metric {
                Metric::HitProb => r.hit_rate,
                Metric::ActiveHeads => r.active_heads,
                _ => r.ec_ratio,
            })
        }
    };
    let strategy = match pt.series.label() {
        Some(series) => format!("{}/{series}", pt.rule),
        None => pt.rule.to_string(),
    };
    Ok(Row {
        swept_value: pt.x,
        strategy,
        analytic_value,
        mc,
        seed: config.sim.seed,
    })
}

/// Evaluates every (series, strategy, grid value) point and returns rows
/// sorted by swept value, then strategy label. Every simulated point uses
/// the master seed, so curves share common random numbers.
pub fn run_points(config: &RunConfig, spec: &SweepSpec) -> Result<Vec<Row>, CliError> {
    let points: Vec<Point<'_>> = spec
        .series
        .iter()
        .flat_map(|series| {
            spec.strategies.iter().flat_map(move |&rule| {
                spec.grid.iter().map(move |&x| Point { series, rule, x })
            })
        })
        .collect();
    let mut rows = points
        .par_iter()
        .map(|pt| evaluate_point(config, spec, pt))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| {
        a.swept_value
            .total_cmp(&b.swept_value)
            .then_with(|| a.strategy.cmp(&b.strategy))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: usize,
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub manifest: PathBuf,
}

/// Runs the configured sweep and writes `<preset>.csv`, the optional
/// `<preset>.svg` and `manifest.conf` into `out_dir`. Nothing is written if
/// the sweep fails.
pub fn run_sweep(config: &RunConfig, out_dir: &Path) -> Result<SweepSummary, CliError> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::key("preset", "no sweep preset configured"))?;
    let rows = run_points(config, spec)?;

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let name = spec.preset.to_string();
    let csv = out_dir.join(format!("{name}.csv"));
    write_csv(&csv, &rows)?;
    let svg = match config.format {
        OutputFormat::CsvSvg => {
            let path = out_dir.join(format!("{name}.svg"));
            render_svg(&path, spec, &rows)?;
            Some(path)
        }
        OutputFormat::Csv => None,
    };
    let manifest = out_dir.join("manifest.conf");
    fs::write(&manifest, config.manifest()).map_err(|e| CliError::io(&manifest, e))?;
    Ok(SweepSummary {
        rows: rows.len(),
        csv,
        svg,
        manifest,
    })
}
