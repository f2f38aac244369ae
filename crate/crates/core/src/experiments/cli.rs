//! `d2dcache` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::{self, EcFormula, SumForm};
use crate::montecarlo::{simulate, Estimate};
use crate::optimize::{self, Direction, ObjectiveKind};

use super::config::{resolve, Layer, RunConfig};
use super::output::format_sig9;
use super::sweep::{run_sweep, PlacementRule};
use super::CliError;

const KEY_HELP: &str = "\
Configuration file (--config): one `key = value` per line, `#` comments.
Keys: cell_radius, cluster_radius, files, gamma, heads, members,
omega_cache (files per head), omega (D2D/cellular energy ratio), seed,
region (torus|disk), trials, requests_per_trial, format (csv|csv+svg),
preset (fig2..fig6|custom), swept (mo|gamma|phi), grid (comma list),
strategies (comma list of lhp|lec|mpc|eprc|topm|topm:<n>),
metric (hit|active|ec|mo), version (ignored).
Flags override file values, which override the built-in defaults
(R_C=200 m, R_D=50 m, M=500, Omega=10, heads=100, omega=0.1, members=250).

Exit codes: 0 success, 1 usage or validation error, 2 runtime or I/O error.";

#[derive(Debug, Parser)]
#[command(name = "d2dcache", version, about = "Cache-enabled multicast D2D network model", after_help = KEY_HELP)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Flat `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// torus | disk
    #[arg(long, global = true)]
    region: Option<String>,
    /// Deployments per simulated point
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    requests_per_trial: Option<String>,
    /// csv | csv+svg
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    cell_radius: Option<String>,
    #[arg(long, global = true)]
    cluster_radius: Option<String>,
    /// Library size M
    #[arg(long, global = true)]
    files: Option<String>,
    /// Zipf exponent
    #[arg(long, global = true)]
    gamma: Option<String>,
    #[arg(long, global = true)]
    heads: Option<String>,
    #[arg(long, global = true)]
    members: Option<String>,
    /// Files per head cache
    #[arg(long, global = true)]
    omega_cache: Option<String>,
    /// D2D/cellular per-bit energy ratio
    #[arg(long, global = true)]
    omega: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SumArg {
    Closed,
    Truncated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EcFormulaArg {
    Reconciled,
    Printed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OptimizeStrategy {
    Lhp,
    Lec,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Min,
    Max,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form report at one cached-file count
    Analytic {
        /// Cached-file count M_o (default: the cache capacity)
        #[arg(long)]
        mo: Option<u32>,
        #[arg(long, value_enum, default_value = "closed")]
        sum: SumArg,
        #[arg(long, value_enum, default_value = "reconciled")]
        ec_formula: EcFormulaArg,
    },
    /// Monte Carlo estimate at one point, next to the closed form
    Simulate {
        /// lhp | lec | mpc | eprc | topm:<n>
        #[arg(long, default_value = "lhp")]
        strategy: String,
    },
    /// Exhaustive search for the optimal cached-file count
    Optimize {
        #[arg(long, value_enum)]
        strategy: OptimizeStrategy,
        /// Search direction (default: max for lhp, min for lec)
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
    },
    /// Figure sweeps written as CSV (and optionally SVG)
    Sweep {
        /// fig2 | fig3 | fig4 | fig5 | fig6 | custom
        #[arg(long)]
        preset: Option<String>,
        /// mo | gamma | phi (custom preset)
        #[arg(long)]
        swept: Option<String>,
        /// Comma-separated swept values
        #[arg(long)]
        grid: Option<String>,
        /// Comma list of lhp|lec|mpc|eprc|topm|topm:<n>
        #[arg(long)]
        strategies: Option<String>,
        /// hit | active | ec | mo
        #[arg(long)]
        metric: Option<String>,
    },
}

impl GlobalArgs {
    fn layer(&self) -> Layer {
        let mut l = Layer::default();
        let flags = [
            ("seed", &self.seed),
            ("region", &self.region),
            ("trials", &self.trials),
            ("requests_per_trial", &self.requests_per_trial),
            ("format", &self.format),
            ("cell_radius", &self.cell_radius),
            ("cluster_radius", &self.cluster_radius),
            ("files", &self.files),
            ("gamma", &self.gamma),
            ("heads", &self.heads),
            ("members", &self.members),
            ("omega_cache", &self.omega_cache),
            ("omega", &self.omega),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                l.set(key, v.clone());
            }
        }
        l
    }
}

/// Parses `args` and runs the command, writing its report to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    let mut layers = Vec::new();
    if let Some(path) = &cli.global.config {
        layers.push(Layer::from_file(path)?);
    }
    layers.push(cli.global.layer());
    if let Command::Sweep { preset, swept, grid, strategies, metric } = &cli.command {
        let mut l = Layer::default();
        for (key, value) in [
            ("preset", preset),
            ("swept", swept),
            ("grid", grid),
            ("strategies", strategies),
            ("metric", metric),
        ] {
            if let Some(v) = value {
                l.set(key, v.clone());
            }
        }
        layers.push(l);
    }
    let config = resolve(&layers)?;

    let mut report = Vec::new();
    match cli.global.workers {
        Some(0) => return Err(CliError::Usage("--workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| execute(&cli, &config, &mut report))?,
        None => execute(&cli, &config, &mut report)?,
    }
    out.write_all(&report).map_err(io_out)
}

fn io_out(e: std::io::Error) -> CliError {
    CliError::io(std::path::Path::new("<stdout>"), e)
}

fn execute(cli: &Cli, config: &RunConfig, out: &mut Vec<u8>) -> Result<(), CliError> {
    let params = &config.params;
    let catalog = config.catalog();
    match &cli.command {
        Command::Analytic { mo, sum, ec_formula } => {
            let m_o = mo.unwrap_or(params.capacity);
            let form = match sum {
                SumArg::Closed => SumForm::Closed,
                SumArg::Truncated => SumForm::Truncated,
            };
            let r = analytic::evaluate(params, &catalog, m_o, form)?;
            let ec = match ec_formula {
                EcFormulaArg::Reconciled => r.ec_ratio,
                EcFormulaArg::Printed => {
                    analytic::ec_ratio_with(params, &catalog, m_o, form, EcFormula::AsPrinted)?
                }
            };
            writeln!(out, "M_o = {}", r.m_o).map_err(io_out)?;
            writeln!(out, "head_intensity = {}", format_sig9(params.head_intensity())).map_err(io_out)?;
            writeln!(out, "member_intensity = {}", format_sig9(params.member_intensity())).map_err(io_out)?;
            writeln!(out, "hit_prob = {}", format_sig9(r.hit_prob)).map_err(io_out)?;
            writeln!(out, "d2d_service_prob = {}", format_sig9(r.d2d_service_prob)).map_err(io_out)?;
            writeln!(out, "active_heads = {}", format_sig9(r.active_heads)).map_err(io_out)?;
            writeln!(out, "ec_ratio = {}", format_sig9(ec)).map_err(io_out)?;
        }
        Command::Simulate { strategy } => {
            let rule: PlacementRule = strategy.parse().map_err(|e: String| CliError::key("strategy", e))?;
            if rule == PlacementRule::TopM(None) {
                return Err(CliError::key("strategy", "topm needs a count, e.g. topm:27"));
            }
            let (m_o, cache) = rule.resolve(params, &catalog, None)?;
            let a = analytic::evaluate(params, &catalog, m_o, SumForm::Closed)?;
            let r = simulate(params, &catalog, &config.sim.config(cache))?;
            let line = |e: Estimate, closed: f64| {
                format!(
                    "{} +- {} (closed form {})",
                    format_sig9(e.mean),
                    format_sig9(e.half_width),
                    format_sig9(closed)
                )
            };
            writeln!(out, "strategy = {cache}").map_err(io_out)?;
            writeln!(out, "region = {}", config.sim.region).map_err(io_out)?;
            writeln!(out, "seed = {}", config.sim.seed).map_err(io_out)?;
            writeln!(out, "trials = {}", config.sim.trials).map_err(io_out)?;
            writeln!(out, "samples = {}", r.samples).map_err(io_out)?;
            writeln!(out, "hit_rate = {}", line(r.hit_rate, a.hit_prob)).map_err(io_out)?;
            writeln!(out, "active_heads = {}", line(r.active_heads, a.active_heads)).map_err(io_out)?;
            writeln!(out, "ec_ratio = {}", line(r.ec_ratio, a.ec_ratio)).map_err(io_out)?;
        }
        Command::Optimize { strategy, objective } => {
            let (kind, default_dir) = match strategy {
                OptimizeStrategy::Lhp => (ObjectiveKind::HitProb, Direction::Max),
                OptimizeStrategy::Lec => (ObjectiveKind::EcRatio, Direction::Min),
            };
            let direction = match objective {
                Some(ObjectiveArg::Min) => Direction::Min,
                Some(ObjectiveArg::Max) => Direction::Max,
                None => default_dir,
            };
            let r = optimize::scan(params, &catalog, kind, direction, SumForm::Closed)?;
            let name = match kind {
                ObjectiveKind::HitProb => "hit_prob",
                ObjectiveKind::EcRatio => "ec_ratio",
            };
            writeln!(out, "objective = {direction} {name}").map_err(io_out)?;
            writeln!(out, "M_o* = {}", r.m_o_star).map_err(io_out)?;
            writeln!(out, "{name} = {}", format_sig9(r.objective_value)).map_err(io_out)?;
            if let Some(dir) = &cli.global.out {
                fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let path = dir.join(format!("scan_{name}.csv"));
                let mut text = format!("m_o,{name}\n");
                for (m, v) in &r.scan_trace {
                    text.push_str(&format!("{m},{}\n", format_sig9(*v)));
                }
                fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                writeln!(out, "trace = {}", path.display()).map_err(io_out)?;
            }
        }
        Command::Sweep { .. } => {
            let dir = cli.global.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            let s = run_sweep(config, &dir)?;
            writeln!(out, "rows = {}", s.rows).map_err(io_out)?;
            writeln!(out, "csv = {}", s.csv.display()).map_err(io_out)?;
            if let Some(svg) = &s.svg {
                writeln!(out, "svg = {}", svg.display()).map_err(io_out)?;
            }
            writeln!(out, "manifest = {}", s.manifest.display()).map_err(io_out)?;
        }
    }
    Ok(())
}

/// Entry point: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("d2dcache").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        run(cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn analytic_report() {
        let text = run_args(&["analytic", "--mo", "27"]).unwrap();
        assert!(text.contains("hit_prob = 0.516286236"), "{text}");
        assert!(text.contains("ec_ratio = 0.522260786"), "{text}");
        let printed = run_args(&["analytic", "--mo", "27", "--ec-formula", "printed"]).unwrap();
        assert!(printed.contains("ec_ratio = 0.483798545"), "{printed}");
    }

    #[test]
    fn optimize_reports() {
        let text = run_args(&["optimize", "--strategy", "lec", "--gamma", "1.4"]).unwrap();
        assert!(text.contains("M_o* = 19"), "{text}");
        let text = run_args(&["optimize", "--strategy", "lhp"]).unwrap();
        assert!(text.contains("M_o* = 27"), "{text}");
    }

    #[test]
    fn validation_errors_exit_one() {
        let err = run_args(&["analytic", "--omega-cache", "600"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("Omega <= M"));
        assert_eq!(run_args(&["analytic", "--mo", "5"]).unwrap_err().exit_code(), 1);
        assert_eq!(run_args(&["simulate", "--strategy", "nope"]).unwrap_err().exit_code(), 1);
        assert_eq!(run_args(&["analytic", "--workers", "0"]).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn missing_config_file_is_io_error() {
        let err = run_args(&["analytic", "--config", "/nonexistent/x.conf"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn clap_errors_map_to_exit_one() {
        assert_eq!(main_with_args(["d2dcache", "frobnicate"]), 1);
        assert_eq!(main_with_args(["d2dcache", "optimize", "--strategy", "best"]), 1);
    }
}
