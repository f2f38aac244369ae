//! Cache placement strategies and per-head cache contents.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{ModelError, Result};
use crate::popularity::ZipfCatalog;
use crate::spatial::NetworkParams;

/// How heads choose the `capacity` files they cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStrategy {
    /// Uniform random subset of the whole library.
    Eprc,
    /// Every head caches the `capacity` most popular files.
    Mpc,
    /// Uniform random subset of the `n` most popular files.
    TopM(u32),
}

impl CacheStrategy {
    /// Size of the candidate pool a head draws its cache from.
    pub fn pool(&self, capacity: u32, files: u32) -> u32 {
        match *self {
            CacheStrategy::Eprc => files,
            CacheStrategy::Mpc => capacity,
            CacheStrategy::TopM(n) => n,
        }
    }
}

impl fmt::Display for CacheStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CacheStrategy::Eprc => f.write_str("eprc"),
            CacheStrategy::Mpc => f.write_str("mpc"),
            CacheStrategy::TopM(n) => write!(f, "topm:{n}"),
        }
    }
}

impl FromStr for CacheStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "eprc" => Ok(CacheStrategy::Eprc),
            "mpc" => Ok(CacheStrategy::Mpc),
            _ => s
                .strip_prefix("topm:")
                .and_then(|n| n.parse().ok())
                .map(CacheStrategy::TopM)
                .ok_or_else(|| format!("unknown cache strategy '{s}' (expected eprc|mpc|topm:<n>)")),
        }
    }
}

/// The cached ranks of every head. Each entry is sorted ascending and holds
/// exactly `capacity` distinct ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheAssignment {
    per_head: Vec<Vec<u32>>,
}

impl CacheAssignment {
    pub fn per_head(&self) -> &[Vec<u32>] {
        &self.per_head
    }

    pub fn heads(&self) -> usize {
        self.per_head.len()
    }

    pub fn head_caches_file(&self, head: usize, rank: u32) -> bool {
        self.per_head[head].binary_search(&rank).is_ok()
    }
}

/// Fills every head's cache under `strategy`. Heads are sampled
/// independently, so popular files are repeated across heads.
///
/// When the pool equals the capacity no randomness is consumed: `Mpc` and
/// `TopM(capacity)` produce the same assignment and leave `rng` untouched.
pub fn assign_caches<R: Rng + ?Sized>(
    strategy: CacheStrategy,
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    rng: &mut R,
) -> Result<CacheAssignment> {
    let capacity = params.capacity;
    let files = catalog.files();
    if capacity > files {
        return Err(ModelError::out_of_range(
            "capacity",
            capacity,
            format!("Omega <= M = {files}"),
        ));
    }
    let pool = strategy.pool(capacity, files);
    if pool < capacity || pool > files {
        return Err(ModelError::out_of_range(
            "M_o",
            pool,
            format!("Omega = {capacity} <= M_o <= M = {files}"),
        ));
    }

    let per_head = (0..params.heads)
        .map(|_| {
            if pool == capacity {
                (1..=capacity).collect()
            } else {
                let mut set: Vec<u32> = index::sample(rng, pool as usize, capacity as usize)
                    .into_iter()
                    .map(|i| i as u32 + 1)
                    .collect();
                set.sort_unstable();
                set
            }
        })
        .collect();
    Ok(CacheAssignment { per_head })
}
