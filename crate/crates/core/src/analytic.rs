//! Closed-form model: Poisson coverage, cache-hit probability, expected
//! active heads and the energy-consumption ratio.
//!
//! Every per-file cache probability is `capacity / M_o`: only the `M_o` most
//! popular files are eligible and each head holds `capacity` of them.
//! Sums over the in-range head (member) count can be evaluated literally,
//! truncated at the head (member) population, or in their closed
//! exponential form, which is the default.

use statrs::function::gamma::ln_gamma;

use crate::error::{ModelError, Result};
use crate::popularity::ZipfCatalog;
use crate::spatial::NetworkParams;

/// Upper limit of a Poisson-weighted coverage sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Infinite sum, `1 - exp(-p * lambda)`.
    Closed,
    /// Literal sum over `k = 0..=K`.
    AtCount(u64),
}

/// How model-level quantities evaluate their coverage sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumForm {
    #[default]
    Closed,
    /// Truncate head sums at the head count and member sums at the member
    /// count.
    Truncated,
}

impl SumForm {
    fn at(self, count: u32) -> Truncation {
        match self {
            SumForm::Closed => Truncation::Closed,
            SumForm::Truncated => Truncation::AtCount(count as u64),
        }
    }
}

/// Which exponent the active-head term of the energy ratio uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EcFormula {
    /// `lambda_phi * (capacity / M_o) * top_mass(M_o)`, consistent with the
    /// expected active-head count.
    #[default]
    Reconciled,
    /// `(omega / M_o) * top_mass(M_o)`, as typeset in the original closed form.
    AsPrinted,
}

/// Closed-form quantities at one value of `M_o`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticReport {
    pub m_o: u32,
    pub hit_prob: f64,
    pub d2d_service_prob: f64,
    pub active_heads: f64,
    pub ec_ratio: f64,
}

/// `lambda^k e^-lambda / k!`, evaluated in log space.
pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    (k * lambda.ln() - lambda - ln_gamma(k + 1.0)).exp()
}

/// Probability that at least one of a Poisson(`lambda`) number of nodes
/// holds a given file, when each holds it independently with probability `p`.
pub fn coverage_prob(p: f64, lambda: f64, truncation: Truncation) -> f64 {
    match truncation {
        Truncation::Closed => -(-p * lambda).exp_m1(),
        Truncation::AtCount(k_max) => {
            let miss = 1.0 - p;
            let mut miss_k = 1.0;
            let mut total = 0.0;
            for k in 0..=k_max {
                total += (1.0 - miss_k) * poisson_pmf(k, lambda);
                miss_k *= miss;
            }
            total
        }
    }
}

fn check_m_o(params: &NetworkParams, catalog: &ZipfCatalog, m_o: u32) -> Result<()> {
    let (capacity, files) = (params.capacity, catalog.files());
    if capacity > files || m_o < capacity || m_o > files {
        return Err(ModelError::out_of_range(
            "M_o",
            m_o,
            format!("Omega = {capacity} <= M_o <= M = {files}"),
        ));
    }
    Ok(())
}

/// Probability that a member's request is cached by some head within range.
pub fn hit_prob(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    m_o: u32,
    form: SumForm,
) -> Result<f64> {
    check_m_o(params, catalog, m_o)?;
    let per_head = params.capacity as f64 / m_o as f64;
    Ok(catalog.top_mass(m_o)?
        * coverage_prob(per_head, params.head_intensity(), form.at(params.heads)))
}

/// Probability that a single request can be served by a given head.
pub fn d2d_service_prob(catalog: &ZipfCatalog, capacity: u32, m_o: u32) -> Result<f64> {
    if capacity == 0 || m_o < capacity || m_o > catalog.files() {
        return Err(ModelError::out_of_range(
            "M_o",
            m_o,
            format!("Omega = {capacity} <= M_o <= M = {}", catalog.files()),
        ));
    }
    Ok(capacity as f64 / m_o as f64 * catalog.top_mass(m_o)?)
}

/// Expected number of heads with at least one in-range member requesting a
/// file they cache.
pub fn expected_active_heads(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    m_o: u32,
    form: SumForm,
) -> Result<f64> {
    check_m_o(params, catalog, m_o)?;
    let served = d2d_service_prob(catalog, params.capacity, m_o)?;
    Ok(params.heads as f64
        * coverage_prob(served, params.member_intensity(), form.at(params.members)))
}

/// Energy of the hybrid network relative to cellular-only delivery:
/// `(1 - hit_prob) + (omega / members) * active_heads`.
pub fn ec_ratio(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    m_o: u32,
    form: SumForm,
) -> Result<f64> {
    ec_ratio_with(params, catalog, m_o, form, EcFormula::Reconciled)
}

pub fn ec_ratio_with(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    m_o: u32,
    form: SumForm,
    formula: EcFormula,
) -> Result<f64> {
    if params.members == 0 {
        return Err(ModelError::Undefined(
            "energy ratio is undefined without cluster members",
        ));
    }
    let miss = 1.0 - hit_prob(params, catalog, m_o, form)?;
    let d2d = match formula {
        EcFormula::Reconciled => expected_active_heads(params, catalog, m_o, form)?,
        EcFormula::AsPrinted => {
            let exponent = params.energy_ratio / m_o as f64 * catalog.top_mass(m_o)?;
            params.heads as f64 * coverage_prob(1.0, exponent, form.at(params.members))
        }
    };
    Ok(miss + params.energy_ratio / params.members as f64 * d2d)
}

/// All closed-form quantities at `m_o`. The energy ratio is NaN when there
/// are no members.
pub fn evaluate(
    params: &NetworkParams,
    catalog: &ZipfCatalog,
    m_o: u32,
    form: SumForm,
) -> Result<AnalyticReport> {
    let hit_prob = hit_prob(params, catalog, m_o, form)?;
    let active_heads = expected_active_heads(params, catalog, m_o, form)?;
    let ec_ratio = if params.members == 0 {
        f64::NAN
    } else {
        1.0 - hit_prob + params.energy_ratio / params.members as f64 * active_heads
    };
    Ok(AnalyticReport {
        m_o,
        hit_prob,
        d2d_service_prob: d2d_service_prob(catalog, params.capacity, m_o)?,
        active_heads,
        ec_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> NetworkParams {
        NetworkParams::default()
    }

    fn zipf(gamma: f64) -> ZipfCatalog {
        ZipfCatalog::new(500, gamma).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn poisson_examples() {
        assert!(close(poisson_pmf(0, 6.25), 0.001_930_454_136_227_709, 1e-17));
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
        assert_eq!(poisson_pmf(3, 0.0), 0.0);
        let total: f64 = (0..=200).map(|k| poisson_pmf(k, 6.25)).sum();
        assert!(close(total, 1.0, 1e-12), "{total}");
        // far tail does not overflow
        assert!(poisson_pmf(5_000, 6.25) == 0.0);
        assert!(poisson_pmf(5_000, 5_000.0) > 0.0);
    }

    #[test]
    fn coverage_examples() {
        for t in [Truncation::Closed, Truncation::AtCount(100)] {
            assert_eq!(coverage_prob(0.0, 6.25, t), 0.0);
        }
        assert!(close(
            coverage_prob(1.0, 6.25, Truncation::Closed),
            0.998_069_545_863_772_3,
            1e-15
        ));
        let closed = coverage_prob(0.2, 6.25, Truncation::Closed);
        let truncated = coverage_prob(0.2, 6.25, Truncation::AtCount(100));
        let extended = coverage_prob(0.2, 6.25, Truncation::AtCount(400));
        assert!((truncated - closed).abs() < 1e-9);
        assert!((extended - truncated).abs() < 1e-14);
    }

    #[test]
    fn hit_prob_examples() {
        let p = table();
        let c = zipf(1.0);
        let eprc = hit_prob(&p, &c, 500, SumForm::Closed).unwrap();
        assert!(close(eprc, 0.117_503_097_415_404_6, 1e-13));
        assert!(close(eprc, -(-0.125f64).exp_m1(), 1e-15));
        let mpc = hit_prob(&p, &c, 10, SumForm::Closed).unwrap();
        assert!(close(mpc, 0.430_353_305_251_683_7, 1e-13));
        let mid = hit_prob(&p, &c, 50, SumForm::Closed).unwrap();
        assert!(close(mid, 0.472_581_314_666_020_7, 1e-13));
        assert!(mid > mpc && mid > eprc);
    }

    #[test]
    fn hit_prob_rejects_m_o_outside_range() {
        let p = table();
        let c = zipf(1.0);
        assert!(hit_prob(&p, &c, 9, SumForm::Closed).is_err());
        assert!(hit_prob(&p, &c, 501, SumForm::Closed).is_err());
        assert!(expected_active_heads(&p, &c, 9, SumForm::Closed).is_err());
        assert!(d2d_service_prob(&c, 10, 9).is_err());
    }

    #[test]
    fn d2d_service_examples() {
        let c = zipf(1.0);
        assert_eq!(d2d_service_prob(&c, 10, 10).unwrap(), c.top_mass(10).unwrap());
        let uniform = zipf(0.0);
        assert!(close(d2d_service_prob(&uniform, 10, 50).unwrap(), 0.02, 1e-15));
        assert!(close(
            d2d_service_prob(&c, 10, 50).unwrap(),
            0.132_469_374_029_811_96,
            1e-13
        ));
    }

    #[test]
    fn active_head_examples() {
        let p = table();
        let none = NetworkParams { members: 0, ..p };
        assert_eq!(expected_active_heads(&none, &zipf(1.0), 27, SumForm::Closed).unwrap(), 0.0);
        assert_eq!(
            expected_active_heads(&none, &zipf(1.0), 27, SumForm::Truncated).unwrap(),
            0.0
        );
        let mpc = expected_active_heads(&p, &zipf(1.0), 10, SumForm::Closed).unwrap();
        assert!(close(mpc, 99.881_412_739_237_6, 1e-10));
        let uniform = expected_active_heads(&p, &zipf(0.0), 500, SumForm::Closed).unwrap();
        assert!(close(uniform, 26.838_437_105_335_82, 1e-10));
    }

    #[test]
    fn ec_ratio_examples() {
        let p = table();
        let c = zipf(1.0);
        let at27 = ec_ratio(&p, &c, 27, SumForm::Closed).unwrap();
        assert!(close(at27, 0.522_260_786_346_793_3, 1e-12));
        let printed = ec_ratio_with(&p, &c, 27, SumForm::Closed, EcFormula::AsPrinted).unwrap();
        assert!(close(printed, 0.483_798_545_146_269_1, 1e-12));

        let silent = NetworkParams { energy_ratio: 0.0, ..p };
        for m_o in [10, 27, 123, 500] {
            let hit = hit_prob(&silent, &c, m_o, SumForm::Closed).unwrap();
            assert_eq!(ec_ratio(&silent, &c, m_o, SumForm::Closed).unwrap(), 1.0 - hit);
        }

        let none = NetworkParams { members: 0, ..p };
        assert!(ec_ratio(&none, &c, 27, SumForm::Closed).is_err());
    }

    #[test]
    fn evaluate_is_consistent_with_parts() {
        let p = table();
        let c = zipf(1.4);
        let r = evaluate(&p, &c, 19, SumForm::Closed).unwrap();
        assert_eq!(r.hit_prob, hit_prob(&p, &c, 19, SumForm::Closed).unwrap());
        assert_eq!(r.active_heads, expected_active_heads(&p, &c, 19, SumForm::Closed).unwrap());
        assert!(close(r.ec_ratio, ec_ratio(&p, &c, 19, SumForm::Closed).unwrap(), 1e-15));
        assert!(r.ec_ratio < 0.30);
    }

    #[test]
    fn boundary_equivalences() {
        let p = table();
        let c = zipf(0.9);
        // every head caching the top files: per-file probability 1
        let mpc = c.top_mass(10).unwrap() * -(-p.head_intensity()).exp_m1();
        assert!(close(hit_prob(&p, &c, 10, SumForm::Closed).unwrap(), mpc, 1e-15));
        // uniform random over the whole library
        let eprc = -(-p.head_intensity() * 10.0 / 500.0).exp_m1();
        assert!(close(hit_prob(&p, &c, 500, SumForm::Closed).unwrap(), eprc, 1e-15));
    }

    #[test]
    fn truncated_matches_closed_at_table_intensities() {
        let p = table();
        for gamma in [0.0, 0.5, 1.0, 1.4, 2.0] {
            let c = zipf(gamma);
            for m_o in [10, 27, 50, 200, 500] {
                let a = evaluate(&p, &c, m_o, SumForm::Closed).unwrap();
                let b = evaluate(&p, &c, m_o, SumForm::Truncated).unwrap();
                assert!((a.hit_prob - b.hit_prob).abs() < 1e-8);
                assert!((a.active_heads - b.active_heads).abs() / p.heads as f64 <= 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn truncation_agreement(p in 0.0f64..=1.0, lambda in 0.0f64..20.0) {
            // lambda + 10 sqrt(lambda) alone leaves a ~1e-7 tail for lambda < 1
            let k = (lambda + 10.0 * lambda.sqrt()).ceil().max(12.0) as u64;
            let a = coverage_prob(p, lambda, Truncation::AtCount(k));
            let b = coverage_prob(p, lambda, Truncation::Closed);
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }

        #[test]
        fn report_ranges(gamma in 0.0f64..3.0, m_o in 10u32..=500, heads in 0u32..300, members in 1u32..600) {
            let p = NetworkParams { heads, members, ..NetworkParams::default() };
            let r = evaluate(&p, &zipf(gamma), m_o, SumForm::Closed).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.hit_prob));
            prop_assert!((0.0..=1.0).contains(&r.d2d_service_prob));
            prop_assert!(r.active_heads >= 0.0 && r.active_heads <= heads as f64);
            prop_assert!(r.ec_ratio >= 0.0);
            prop_assert!(r.ec_ratio <= 1.0 + heads as f64 * p.energy_ratio / members as f64 + 1e-12);
        }

        #[test]
        fn hit_prob_monotone_in_heads_and_radius(gamma in 0.0f64..3.0, m_o in 10u32..=500, heads in 0u32..300, radius in 1.0f64..199.0) {
            let c = zipf(gamma);
            let base = NetworkParams { heads, cluster_radius: radius, ..NetworkParams::default() };
            let more_heads = NetworkParams { heads: heads + 1, ..base };
            let wider = NetworkParams { cluster_radius: radius + 1.0, ..base };
            let h = hit_prob(&base, &c, m_o, SumForm::Closed).unwrap();
            prop_assert!(hit_prob(&more_heads, &c, m_o, SumForm::Closed).unwrap() >= h);
            prop_assert!(hit_prob(&wider, &c, m_o, SumForm::Closed).unwrap() >= h);
        }
    }
}
