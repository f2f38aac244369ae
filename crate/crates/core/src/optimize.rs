//! Exhaustive integer search for the number of cached files `M_o`.

use std::fmt;
use std::str::FromStr;

use crate::analytic::{self, EcFormula, SumForm};
use crate::error::{ModelError, Result};
use crate::popularity::ZipfCatalog;
use crate::spatial::NetworkParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    HitProb,
    EcRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "min" => Ok(Direction::Min),
            "max" => Ok(Direction::Max),
            other => Err(format!("unknown objective '{other}' (expected min|max)")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Min => "min",
            Direction::Max => "max",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub m_o_star: u32,
    pub objective_value: f64,
    pub objective_kind: ObjectiveKind,
    /// `(M_o, objective)` for every `M_o` in `capacity..=files`.
    pub scan_trace: Vec<(u32, f64)>,
}

/// Largest hit probability: argmax of `hit_prob` over `M_o`.
pub fn optimize_lhp(params: &NetworkParams, catalog: &ZipfCatalog) -> Result<OptimizationResult> {
    scan(params, catalog, ObjectiveKind::HitProb, Direction::Max, SumForm::Closed)
}

/// Lowest energy consumption: argmin of `ec_ratio` over `M_o`.
pub fn optimize_lec(params: &NetworkParams, catalog: &ZipfCatalog) -> Result<OptimizationResult> {
    scan(params, catalog, ObjectiveKind::EcRatio, Direction::Min, SumForm::Closed)
}

/// Evaluates `kind` at every `M_o` in `capacity..=files` and keeps the best
/// value in `direction`. Ties resolve to the smallest `M_o`.
pub fn scan(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    kind: ObjectiveKind,
    direction: Direction,
    form: SumForm,
) -> Result<OptimizationResult> {
    params.validate()?;
    if params.capacity > catalog.files() {
        return Err(ModelError::out_of_range(
            "capacity",
            params.capacity,
            format!("Omega <= M = {}", catalog.files()),
        ));
    }
    let scan_trace = (params.capacity..=catalog.files())
        .map(|m_o| {
            let value = match kind {
                ObjectiveKind::HitProb => analytic::hit_prob(params, catalog, m_o, form)?,
                ObjectiveKind::EcRatio => {
                    analytic::ec_ratio_with(params, catalog, m_o, form, EcFormula::Reconciled)?
                }
            };
            Ok((m_o, value))
        })
        .collect::<Result<Vec<_>>>()?;

    let better = |candidate: f64, best: f64| match direction {
        Direction::Max => candidate > best,
        Direction::Min => candidate < best,
    };
    let (m_o_star, objective_value) = scan_trace[1..]
        .iter()
        .fold(scan_trace[0], |best, &(m, v)| {
            if better(v, best.1) {
                (m, v)
            } else {
                best
            }
        });
    Ok(OptimizationResult {
        m_o_star,
        objective_value,
        objective_kind: kind,
        scan_trace,
    })
}
