//! Cell geometry, point-process deployment of cluster heads and members,
//! and in-range neighbor queries.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{ModelError, Result};

/// Network geometry, population and cache parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Cell radius `R_C` in meters.
    pub cell_radius: f64,
    /// D2D cluster radius `R_D` in meters.
    pub cluster_radius: f64,
    /// Number of cluster heads.
    pub heads: u32,
    /// Number of cluster members.
    pub members: u32,
    /// Files each head can cache.
    pub capacity: u32,
    /// Per-bit energy of a D2D link relative to a cellular link.
    pub energy_ratio: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            cell_radius: 200.0,
            cluster_radius: 50.0,
            heads: 100,
            members: 250,
            capacity: 10,
            energy_ratio: 0.1,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_radius.is_finite() && self.cell_radius > 0.0) {
            return Err(ModelError::out_of_range(
                "cell_radius",
                self.cell_radius,
                "R_C > 0",
            ));
        }
        if !(self.cluster_radius > 0.0 && self.cluster_radius <= self.cell_radius) {
            return Err(ModelError::out_of_range(
                "cluster_radius",
                self.cluster_radius,
                format!("0 < R_D <= R_C = {}", self.cell_radius),
            ));
        }
        if self.capacity == 0 {
            return Err(ModelError::out_of_range("capacity", 0, "Omega >= 1"));
        }
        if !(self.energy_ratio.is_finite() && self.energy_ratio >= 0.0) {
            return Err(ModelError::out_of_range(
                "energy_ratio",
                self.energy_ratio,
                "omega >= 0",
            ));
        }
        Ok(())
    }

    /// Fraction of the cell covered by one D2D disk, `R_D^2 / R_C^2`.
    pub fn coverage_fraction(&self) -> f64 {
        let r = self.cluster_radius / self.cell_radius;
        r * r
    }

    /// Mean number of heads within `R_D` of a typical member.
    pub fn head_intensity(&self) -> f64 {
        self.heads as f64 * self.coverage_fraction()
    }

    /// Mean number of members within `R_D` of a typical head.
    pub fn member_intensity(&self) -> f64 {
        self.members as f64 * self.coverage_fraction()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// How the simulation region is shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionMode {
    /// Square torus with the cell's area; distances wrap around.
    #[default]
    Torus,
    /// The cell disk itself, Euclidean distance, no wraparound.
    Disk,
}

impl fmt::Display for RegionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionMode::Torus => "torus",
            RegionMode::Disk => "disk",
        })
    }
}

impl FromStr for RegionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "torus" => Ok(RegionMode::Torus),
            "disk" => Ok(RegionMode::Disk),
            other => Err(format!("unknown region '{other}' (expected torus|disk)")),
        }
    }
}

/// A concrete region with its metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `[0, side)^2` with periodic boundaries.
    Torus { side: f64 },
    /// Disk of the given radius centered at the origin.
    Disk { radius: f64 },
}

impl Region {
    /// The region of area `pi * R_C^2` for the given mode.
    pub fn for_cell(mode: RegionMode, cell_radius: f64) -> Self {
        match mode {
            RegionMode::Torus => Region::Torus {
                side: PI.sqrt() * cell_radius,
            },
            RegionMode::Disk => Region::Disk {
                radius: cell_radius,
            },
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Torus { side } => side * side,
            Region::Disk { radius } => PI * radius * radius,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Torus { side } => (0.0..side).contains(&p.x) && (0.0..side).contains(&p.y),
            Region::Disk { radius } => p.x * p.x + p.y * p.y <= radius * radius,
        }
    }

    /// Squared distance under the region's metric.
    pub fn distance_sq(&self, a: Point, b: Point) -> f64 {
        let (mut dx, mut dy) = ((a.x - b.x).abs(), (a.y - b.y).abs());
        if let Region::Torus { side } = *self {
            dx = dx.min(side - dx);
            dy = dy.min(side - dy);
        }
        dx * dx + dy * dy
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Region::Torus { side } => {
                Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side)
            }
            Region::Disk { radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                Point::new(r * theta.cos(), r * theta.sin())
            }
        }
    }
}

/// Which population a neighbor query targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Population {
    Heads,
    Members,
}

/// Positions of all heads and members in one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub region: Region,
    pub heads: Vec<Point>,
    pub members: Vec<Point>,
}

impl Deployment {
    pub fn points(&self, population: Population) -> &[Point] {
        match population {
            Population::Heads => &self.heads,
            Population::Members => &self.members,
        }
    }

    /// Indices of the `population` points within `radius` of `point`,
    /// in ascending order. Plain linear scan.
    pub fn neighbors_within(
        &self,
        point: Point,
        radius: f64,
        population: Population,
    ) -> Vec<usize> {
        let r2 = radius * radius;
        self.points(population)
            .iter()
            .enumerate()
            .filter(|(_, &q)| self.region.distance_sq(point, q) <= r2)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Places exactly `heads` and `members` points independently and uniformly
/// in the region: a Poisson point process conditioned on its counts.
/// Heads are drawn first, then members.
pub fn sample_deployment<R: Rng + ?Sized>(
    params: &NetworkParams,
    mode: RegionMode,
    rng: &mut R,
) -> Deployment {
    let region = Region::for_cell(mode, params.cell_radius);
    let heads = (0..params.heads).map(|_| region.sample_point(rng)).collect();
    let members = (0..params.members)
        .map(|_| region.sample_point(rng))
        .collect();
    Deployment {
        region,
        heads,
        members,
    }
}

/// Uniform bucket grid over a point set for fixed-radius queries.
#[derive(Debug, Clone)]
pub struct GridIndex {
    region: Region,
    origin: Point,
    cell: f64,
    dims: usize,
    /// `starts[c]..starts[c + 1]` indexes `order` for bucket `c`.
    starts: Vec<usize>,
    order: Vec<usize>,
    /// Points in bucket order, parallel to `order`.
    points: Vec<Point>,
}

impl GridIndex {
    /// Builds an index whose buckets are at least `cell_size` wide.
    pub fn new(region: Region, points: &[Point], cell_size: f64) -> Self {
        let (origin, extent) = match region {
            Region::Torus { side } => (Point::new(0.0, 0.0), side),
            Region::Disk { radius } => (Point::new(-radius, -radius), 2.0 * radius),
        };
        // torus buckets must tile the side exactly so wraparound lines up
        let dims = ((extent / cell_size).floor() as usize).clamp(1, 1024);
        let cell = extent / dims as f64;

        let mut index = GridIndex {
            region,
            origin,
            cell,
            dims,
            starts: vec![0; dims * dims + 1],
            order: vec![0; points.len()],
            points: Vec::new(),
        };
        let buckets: Vec<usize> = points.iter().map(|&p| index.bucket_of(p)).collect();
        for &b in &buckets {
            index.starts[b + 1] += 1;
        }
        for c in 0..dims * dims {
            index.starts[c + 1] += index.starts[c];
        }
        let mut fill = index.starts.clone();
        for (i, &b) in buckets.iter().enumerate() {
            index.order[fill[b]] = i;
            fill[b] += 1;
        }
        index.points = index.order.iter().map(|&i| points[i]).collect();
        index
    }

    fn axis_cell(&self, v: f64) -> usize {
        ((v / self.cell).floor().max(0.0) as usize).min(self.dims - 1)
    }

    fn bucket_of(&self, p: Point) -> usize {
        let cx = self.axis_cell(p.x - self.origin.x);
        let cy = self.axis_cell(p.y - self.origin.y);
        cy * self.dims + cx
    }

    /// Same contract as [`Deployment::neighbors_within`]: ascending indices.
    pub fn within(&self, point: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.within_into(point, radius, &mut out);
        out
    }

    pub fn within_into(&self, point: Point, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let r2 = radius * radius;
        let reach = (radius / self.cell).ceil() as i64;
        let n = self.dims as i64;
        let cx = self.axis_cell(point.x - self.origin.x) as i64;
        let cy = self.axis_cell(point.y - self.origin.y) as i64;

        let span = |c: i64| -> (i64, i64) {
            match self.region {
                Region::Torus { .. } if 2 * reach + 1 >= n => (0, n - 1),
                Region::Torus { .. } => (c - reach, c + reach),
                Region::Disk { .. } => ((c - reach).max(0), (c + reach).min(n - 1)),
            }
        };
        let wrap = |v: i64| -> usize {
            (if v < 0 {
                v + n
            } else if v >= n {
                v - n
            } else {
                v
            }) as usize
        };
        let torus_side = match self.region {
            Region::Torus { side } => Some(side),
            Region::Disk { .. } => None,
        };
        let (x_lo, x_hi) = span(cx);
        let (y_lo, y_hi) = span(cy);
        for vy in y_lo..=y_hi {
            let row = wrap(vy) * self.dims;
            for vx in x_lo..=x_hi {
                let b = row + wrap(vx);
                for k in self.starts[b]..self.starts[b + 1] {
                    let q = self.points[k];
                    let (mut dx, mut dy) = ((point.x - q.x).abs(), (point.y - q.y).abs());
                    if let Some(side) = torus_side {
                        dx = dx.min(side - dx);
                        dy = dy.min(side - dy);
                    }
                    if dx * dx + dy * dy <= r2 {
                        out.push(self.order[k]);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}
