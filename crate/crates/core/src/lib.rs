//! Cache-enabled multicast D2D networks: Zipf popularity, Poisson coverage,
//! cache-hit probability and energy-consumption ratio in closed form, an
//! exhaustive optimizer for the number of cached files, and a spatial Monte
//! Carlo simulator that checks the closed forms independently.

pub mod analytic;
pub mod caching;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod optimize;
pub mod popularity;
pub mod spatial;

pub use analytic::{AnalyticReport, EcFormula, SumForm, Truncation};
pub use caching::{CacheAssignment, CacheStrategy};
pub use error::ModelError;
pub use optimize::{Direction, ObjectiveKind, OptimizationResult};
pub use popularity::ZipfCatalog;
pub use spatial::{Deployment, NetworkParams, Point, RegionMode};
