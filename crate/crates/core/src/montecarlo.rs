//! Spatial Monte Carlo estimates of hit rate, active heads and energy ratio.
//!
//! Each trial draws its own deployment and cache assignment from a ChaCha8
//! stream selected by the trial index, so results do not depend on how
//! trials are scheduled across threads. Per-trial values are collected in
//! trial order and reduced sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::caching::{assign_caches, CacheStrategy};
use crate::error::{ModelError, Result};
use crate::popularity::ZipfCatalog;
use crate::spatial::{sample_deployment, GridIndex, NetworkParams, RegionMode};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub trials: u32,
    /// Request rounds drawn on each deployment.
    pub requests_per_trial: u32,
    pub region: RegionMode,
    pub seed: u64,
    pub strategy: CacheStrategy,
}

impl SimConfig {
    pub fn new(strategy: CacheStrategy, trials: u32, seed: u64) -> Self {
        SimConfig {
            trials,
            requests_per_trial: 1,
            region: RegionMode::Torus,
            seed,
            strategy,
        }
    }
}

/// Sample mean with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    /// Fewer than two samples: the half-width is infinite.
    pub degenerate: bool,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        match confidence_halfwidth(samples) {
            Some(half_width) => Estimate {
                mean,
                half_width,
                degenerate: false,
            },
            None => Estimate {
                mean,
                half_width: f64::INFINITY,
                degenerate: true,
            },
        }
    }

    /// Whether `value` lies within `k` half-widths of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub hit_rate: Estimate,
    pub active_heads: Estimate,
    pub ec_ratio: Estimate,
    /// Total member requests simulated.
    pub samples: u64,
}

/// `1.96 * s / sqrt(n)` with `s` the sample standard deviation; `None` when
/// fewer than two samples are given.
pub fn confidence_halfwidth(samples: &[f64]) -> Option<f64> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    // the rounded mean of identical values need not equal them
    if samples.iter().all(|&x| x == samples[0]) {
        return Some(0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    Some(Z_95 * (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

/// Half-width for `successes` out of `n` Bernoulli trials, with the same
/// sample-deviation convention as [`confidence_halfwidth`].
pub fn bernoulli_halfwidth(successes: u64, n: u64) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let p = successes as f64 / n as f64;
    let var = p * (1.0 - p) * n as f64 / (n - 1) as f64;
    Some(Z_95 * (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy)]
struct TrialStats {
    hit_rate: f64,
    active_heads: f64,
}

/// Runs `config.trials` independent deployments. In every request round each
/// member requests one Zipf-drawn file; the request hits when a head within
/// `R_D` caches it, and every such head counts as active for the round.
pub fn simulate(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    config: &SimConfig,
) -> Result<SimResult> {
    params.validate()?;
    if config.trials == 0 {
        return Err(ModelError::out_of_range("trials", 0, "trials >= 1"));
    }
    if config.requests_per_trial == 0 {
        return Err(ModelError::out_of_range(
            "requests_per_trial",
            0,
            "requests_per_trial >= 1",
        ));
    }
    if params.members == 0 {
        return Err(ModelError::Undefined(
            "simulation needs at least one cluster member",
        ));
    }

    let stats = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(params, catalog, config, trial))
        .collect::<Result<Vec<_>>>()?;

    let hits: Vec<f64> = stats.iter().map(|s| s.hit_rate).collect();
    let active: Vec<f64> = stats.iter().map(|s| s.active_heads).collect();
    let scale = params.energy_ratio / params.members as f64;
    let ec: Vec<f64> = stats
        .iter()
        .map(|s| (1.0 - s.hit_rate) + scale * s.active_heads)
        .collect();

    Ok(SimResult {
        hit_rate: Estimate::from_samples(&hits),
        active_heads: Estimate::from_samples(&active),
        ec_ratio: Estimate::from_samples(&ec),
        samples: config.trials as u64
            * config.requests_per_trial as u64
            * params.members as u64,
    })
}

fn run_trial(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    config: &SimConfig,
    trial: u32,
) -> Result<TrialStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64);

    let deployment = sample_deployment(params, config.region, &mut rng);
    let caches = assign_caches(config.strategy, params, catalog, &mut rng)?;
    let grid = GridIndex::new(deployment.region, &deployment.heads, params.cluster_radius);

    // in-range heads of every member, flattened
    let mut offsets = Vec::with_capacity(deployment.members.len() + 1);
    let mut in_range = Vec::new();
    let mut scratch = Vec::new();
    offsets.push(0);
    for &m in &deployment.members {
        grid.within_into(m, params.cluster_radius, &mut scratch);
        in_range.extend(scratch.iter().map(|&h| h as u32));
        offsets.push(in_range.len());
    }

    let mut active = vec![false; deployment.heads.len()];
    let (mut hits, mut active_total) = (0u64, 0u64);
    for _ in 0..config.requests_per_trial {
        active.fill(false);
        for w in offsets.windows(2) {
            let file = catalog.sample_request(&mut rng);
            let mut hit = false;
            for &h in &in_range[w[0]..w[1]] {
                if caches.head_caches_file(h as usize, file) {
                    hit = true;
                    active[h as usize] = true;
                }
            }
            hits += hit as u64;
        }
        active_total += active.iter().filter(|&&a| a).count() as u64;
    }

    let rounds = config.requests_per_trial as f64;
    Ok(TrialStats {
        hit_rate: hits as f64 / (rounds * params.members as f64),
        active_heads: active_total as f64 / rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{self, SumForm};

    #[test]
    fn halfwidth_examples() {
        assert_eq!(confidence_halfwidth(&[0.3; 50]), Some(0.0));
        let hw = bernoulli_halfwidth(5_000, 10_000).unwrap();
        assert!((hw - 0.0098).abs() < 1e-5, "{hw}");
        let explicit: Vec<f64> = (0..10_000).map(|i| (i % 2) as f64).collect();
        assert!((confidence_halfwidth(&explicit).unwrap() - hw).abs() < 1e-12);
        assert_eq!(confidence_halfwidth(&[1.0]), None);
        let e = Estimate::from_samples(&[0.4]);
        assert!(e.degenerate && e.half_width.is_infinite() && e.mean == 0.4);
    }

    #[test]
    fn no_heads_means_all_cellular() {
        let p = NetworkParams { heads: 0, ..Default::default() };
        let c = ZipfCatalog::new(500, 1.0).unwrap();
        let r = simulate(&p, &c, &SimConfig::new(CacheStrategy::TopM(27), 20, 1)).unwrap();
        assert_eq!(r.hit_rate.mean, 0.0);
        assert_eq!(r.active_heads.mean, 0.0);
        assert_eq!(r.ec_ratio.mean, 1.0);
        assert_eq!(r.ec_ratio.half_width, 0.0);
        assert_eq!(r.samples, 20 * 250);
    }

    #[test]
    fn single_file_full_coverage_always_hits() {
        let p = NetworkParams {
            cluster_radius: 200.0,
            capacity: 1,
            ..Default::default()
        };
        let c = ZipfCatalog::new(1, 1.0).unwrap();
        let r = simulate(&p, &c, &SimConfig::new(CacheStrategy::Mpc, 10, 2)).unwrap();
        assert_eq!(r.hit_rate.mean, 1.0);
    }

    #[test]
    fn seed_determinism_across_pool_sizes() {
        let p = NetworkParams::default();
        let c = ZipfCatalog::new(500, 1.0).unwrap();
        let cfg = SimConfig { requests_per_trial: 2, ..SimConfig::new(CacheStrategy::TopM(40), 64, 7) };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&p, &c, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, simulate(&p, &c, &cfg).unwrap());
        let other = simulate(&p, &c, &SimConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(one, other);
    }

    #[test]
    fn hit_rate_matches_closed_form_at_lhp_optimum() {
        let p = NetworkParams::default();
        let c = ZipfCatalog::new(500, 1.0).unwrap();
        let r = simulate(&p, &c, &SimConfig::new(CacheStrategy::TopM(27), 400, 42)).unwrap();
        assert!(r.samples >= 100_000);
        let closed = analytic::hit_prob(&p, &c, 27, SumForm::Closed).unwrap();
        assert!(r.hit_rate.agrees_with(closed, 3.0), "{:?} vs {closed}", r.hit_rate);
    }

    #[test]
    fn more_heads_never_lower_hit_rate() {
        let c = ZipfCatalog::new(500, 1.0).unwrap();
        let mut prev: Option<Estimate> = None;
        for heads in [25, 50, 100, 150, 200] {
            let p = NetworkParams { heads, ..Default::default() };
            let r = simulate(&p, &c, &SimConfig::new(CacheStrategy::TopM(27), 200, 99)).unwrap();
            if let Some(q) = prev {
                assert!(r.hit_rate.mean >= q.mean - 3.0 * q.half_width.max(r.hit_rate.half_width));
            }
            prev = Some(r.hit_rate);
        }
    }

    #[test]
    fn disk_edge_effects_reduce_hits() {
        let p = NetworkParams::default();
        let c = ZipfCatalog::new(500, 1.0).unwrap();
        let torus = simulate(&p, &c, &SimConfig::new(CacheStrategy::TopM(27), 300, 5)).unwrap();
        let disk_cfg = SimConfig { region: RegionMode::Disk, ..SimConfig::new(CacheStrategy::TopM(27), 300, 5) };
        let disk = simulate(&p, &c, &disk_cfg).unwrap();
        assert!(disk.hit_rate.mean <= torus.hit_rate.mean, "{disk:?} vs {torus:?}");
    }

    #[test]
    fn deterministic_caches_match_active_head_closed_form() {
        // With MPC every head holds the same files, so activation of a head
        // depends only on its in-range requests.
        let p = NetworkParams::default();
        let c = ZipfCatalog::new(500, 1.0).unwrap();
        let r = simulate(&p, &c, &SimConfig::new(CacheStrategy::Mpc, 400, 3)).unwrap();
        let closed = analytic::expected_active_heads(&p, &c, 10, SumForm::Closed).unwrap();
        assert!(r.active_heads.agrees_with(closed, 3.0), "{:?} vs {closed}", r.active_heads);
    }

    #[test]
    fn rejects_bad_config() {
        let p = NetworkParams::default();
        let c = ZipfCatalog::new(500, 1.0).unwrap();
        assert!(simulate(&p, &c, &SimConfig::new(CacheStrategy::Mpc, 0, 1)).is_err());
        assert!(simulate(&p, &c, &SimConfig::new(CacheStrategy::TopM(5), 1, 1)).is_err());
        let none = NetworkParams { members: 0, ..p };
        assert!(simulate(&none, &c, &SimConfig::new(CacheStrategy::Mpc, 1, 1)).is_err());
    }
}
