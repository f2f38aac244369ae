//! Zipf request model over a ranked file library.
//!
//! Rank 1 is the most popular file. The probability of a request for rank
//! `i` out of `M` files is `i^-gamma / sum_j j^-gamma`.

use rand::Rng;

use crate::error::{ModelError, Result};

/// A Zipf-distributed file library of `M` ranked files.
///
/// The normalization is accumulated once at construction in rank order
/// (1, 2, ..., M), i.e. largest term first. The same accumulation produces
/// the prefix table used by [`ZipfCatalog::top_mass`] and by sampling, so
/// `top_mass(M)` is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfCatalog {
    files: u32,
    gamma: f64,
    norm: f64,
    /// `prefix[m]` = sum of the first `m` unnormalized weights.
    prefix: Vec<f64>,
}

impl ZipfCatalog {
    pub fn new(files: u32, gamma: f64) -> Result<Self> {
        if files == 0 {
            return Err(ModelError::out_of_range("files", files, "M >= 1"));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(ModelError::out_of_range("gamma", gamma, "finite and >= 0"));
        }
        let mut prefix = Vec::with_capacity(files as usize + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for i in 1..=files {
            acc += weight(i, gamma);
            prefix.push(acc);
        }
        Ok(ZipfCatalog {
            files,
            gamma,
            norm: acc,
            prefix,
        })
    }

    pub fn files(&self) -> u32 {
        self.files
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Request probability of the file at `rank` (1-based).
    pub fn pmf(&self, rank: u32) -> Result<f64> {
        if rank == 0 || rank > self.files {
            return Err(ModelError::out_of_range(
                "rank",
                rank,
                format!("1 <= rank <= {}", self.files),
            ));
        }
        Ok(weight(rank, self.gamma) / self.norm)
    }

    /// Total request probability of the `m` most popular files.
    pub fn top_mass(&self, m: u32) -> Result<f64> {
        if m > self.files {
            return Err(ModelError::out_of_range(
                "m",
                m,
                format!("0 <= m <= {}", self.files),
            ));
        }
        Ok(self.prefix[m as usize] / self.norm)
    }

    /// Draws a rank by inverting the cumulative table with a binary search.
    pub fn sample_request<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let target = rng.random::<f64>() * self.norm;
        // first m with prefix[m] > target; prefix[0] = 0 <= target always
        let m = self.prefix.partition_point(|&c| c <= target);
        m.clamp(1, self.files as usize) as u32
    }
}

fn weight(rank: u32, gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        (rank as f64).powf(-gamma)
    }
}
