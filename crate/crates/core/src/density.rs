//! Density estimate `I_00 * lambda_0^2` against the expansion `m + rho/2`,
//! and the exact density of the round sphere model.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, PointDisk};
use crate::gram::{assemble_truncated_gram, schur_i00, ErrorBudget};
use crate::moments::{lambda0_closed_form, lambda0_tail, truncation_radius};
use crate::quadrature::QuadratureConfig;

/// Trailing section degrees used when none are given.
pub const DEFAULT_V_DEGREES: [u32; 3] = [2, 3, 4];

/// `m (1 + rho / 2m) = m + rho / 2`.
pub fn expansion_reference(m: u64, rho: f64) -> f64 {
    m as f64 + rho / 2.0
}

/// `exp(-(log m)^2 / 8)`, the size of the remainder envelope.
pub fn remainder_envelope(m: f64) -> f64 {
    let l = m.ln();
    (-l * l / 8.0).exp()
}

/// One density evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityReport {
    pub m: u64,
    pub rho: f64,
    pub density: f64,
    pub interval: (f64, f64),
    pub reference: f64,
    /// `density - reference`, assembled from its parts so it survives cancellation
    pub remainder: f64,
    pub budget_c: f64,
}

/// Density at the base point from the truncated peak-section basis.
///
/// `lambda_0^2` comes from the closed form on the truncation disk and `I_00`
/// from the bordered Gram matrix. The interval carries the Gram budgets and
/// a few ulps of rounding; the tail of `lambda_0` is part of the point value.
pub fn density_estimate(
    geom: &ModelGeometry,
    m: u64,
    budget: ErrorBudget,
    v_degrees: &[u32],
    cfg: &QuadratureConfig,
) -> Result<DensityReport> {
    if m < 10 {
        return Err(Error::InvalidInput(format!(
            "m must be at least 10, got {m}"
        )));
    }
    let r = truncation_radius(m);
    if !geom.contains_radius(r) {
        return Err(Error::Domain(format!(
            "truncation radius {r} for m = {m} is outside the model disk of radius {}",
            geom.max_radius()
        )));
    }
    let gram = assemble_truncated_gram(geom, m, v_degrees, budget, cfg)?;
    let i00 = schur_i00(&gram)?;
    let inv_lambda_sq = lambda0_closed_form(geom, m)?;
    let tail = lambda0_tail(geom, m)?;
    let lambda_sq = 1.0 / inv_lambda_sq;

    let reference = expansion_reference(m, geom.rho());
    let density = i00.value * lambda_sq;
    // lambda_0^2 - reference = reference * tail / (1 - tail)
    let lambda_excess = reference * tail / (1.0 - tail);
    let remainder = i00.excess * lambda_sq + lambda_excess;

    let pad = 4.0 * f64::EPSILON * density.abs();
    let interval = (
        i00.interval.0 * lambda_sq - pad,
        i00.interval.1 * lambda_sq + pad,
    );
    Ok(DensityReport {
        m,
        rho: geom.rho(),
        density,
        interval,
        reference,
        remainder,
        budget_c: budget.constant,
    })
}

/// Reports for a list of powers plus the fitted remainder constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub reports: Vec<DensityReport>,
    /// `max |remainder| * exp((log m)^2 / 8)`
    pub fitted_c: f64,
    /// every `|remainder| <= exp(-(log m)^2 / 8)`
    pub within_envelope: bool,
    /// powers where `|remainder| / envelope` grew relative to the previous power
    pub decay_violations: Vec<u64>,
}

impl SweepResult {
    pub fn from_reports(reports: Vec<DensityReport>) -> Self {
        let normalized: Vec<f64> = reports
            .iter()
            .map(|r| r.remainder.abs() / remainder_envelope(r.m as f64))
            .collect();
        let fitted_c = normalized.iter().copied().fold(0.0, f64::max);
        let within_envelope = reports
            .iter()
            .all(|r| r.remainder.abs() <= remainder_envelope(r.m as f64));
        let decay_violations = normalized
            .windows(2)
            .zip(reports.iter().skip(1))
            .filter(|(w, _)| w[1] > w[0])
            .map(|(_, r)| r.m)
            .collect();
        Self {
            reports,
            fitted_c,
            within_envelope,
            decay_violations,
        }
    }
}

/// Per-power results, in the order of `m_list`. Work is spread over a thread pool.
pub fn sweep_reports(
    geom: &ModelGeometry,
    m_list: &[u64],
    budget: ErrorBudget,
    v_degrees: &[u32],
    cfg: &QuadratureConfig,
) -> Vec<Result<DensityReport>> {
    m_list
        .par_iter()
        .map(|&m| density_estimate(geom, m, budget, v_degrees, cfg))
        .collect()
}

pub fn remainder_sweep(
    geom: &ModelGeometry,
    m_list: &[u64],
    budget: ErrorBudget,
    v_degrees: &[u32],
    cfg: &QuadratureConfig,
) -> Result<SweepResult> {
    let reports = sweep_reports(geom, m_list, budget, v_degrees, cfg)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_reports(reports))
}

/// Sphere-model density evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cp1Density {
    /// binomial theorem: `sum_k C(m,k) s^k = (1+s)^m`, leaving `m + 1`
    pub analytic: f64,
    /// term-by-term `sum_k lambda_k^2 |z|^2k (1+|z|^2)^-m`
    pub summed: f64,
}

/// Exact density of `z^0, ..., z^m` with weight `(1+|z|^2)^-m` and metric
/// `(1+|z|^2)^-2` on the whole plane, where
/// `lambda_k^-2 = k! (m-k)! / (m+1)!`.
pub fn cp1_density(m: u64, z: PointDisk) -> Result<Cp1Density> {
    if m < 1 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let s = z.norm_sqr();
    if !s.is_finite() {
        return Err(Error::InvalidInput("sample point must be finite".into()));
    }
    let log_fact = log_factorials(m + 1);
    let log_weight = -(m as f64) * s.ln_1p();
    let log_s = s.ln();
    let mut summed = 0.0;
    for k in 0..=m {
        let log_lambda_sq =
            log_fact[(m + 1) as usize] - log_fact[k as usize] - log_fact[(m - k) as usize];
        let power = if k == 0 { 0.0 } else { k as f64 * log_s };
        let term = (log_lambda_sq + power + log_weight).exp();
        if !term.is_finite() {
            return Err(Error::Overflow(format!(
                "term {k} of the sphere density for m = {m}"
            )));
        }
        summed += term;
    }
    Ok(Cp1Density {
        analytic: (m + 1) as f64,
        summed,
    })
}

/// `log k!` for `k = 0..=n`.
fn log_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(rho: f64) -> ModelGeometry {
        ModelGeometry::new(rho).unwrap()
    }

    #[test]
    fn reference_values() {
        assert_eq!(expansion_reference(100, -2.0), 99.0);
        assert_eq!(expansion_reference(10, 2.0), 11.0);
        assert_eq!(expansion_reference(12345, 0.0), 12345.0);
    }

    #[test]
    fn flat_density_is_closed_form() {
        let cfg = QuadratureConfig::default();
        let m = 10_000u64;
        let r =
            density_estimate(&geom(0.0), m, ErrorBudget::zero(), &DEFAULT_V_DEGREES, &cfg).unwrap();
        let l = (m as f64).ln();
        let tail = (-l * l).exp();
        assert!((r.density - m as f64 / (1.0 - tail)).abs() < 1e-9);
        let expected = m as f64 * tail / (1.0 - tail);
        assert!(
            ((r.remainder - expected) / expected).abs() < 1e-12,
            "{}",
            r.remainder
        );
        assert!(r.interval.0 <= r.density && r.density <= r.interval.1);
    }

    #[test]
    fn references_for_curved_models() {
        let cfg = QuadratureConfig::default();
        let r = density_estimate(
            &geom(2.0),
            1000,
            ErrorBudget::new(1.0).unwrap(),
            &DEFAULT_V_DEGREES,
            &cfg,
        )
        .unwrap();
        assert_eq!(r.reference, 1001.0);
        assert!(r.remainder.abs() <= remainder_envelope(1000.0));
        let r = density_estimate(
            &geom(-2.0),
            100,
            ErrorBudget::zero(),
            &DEFAULT_V_DEGREES,
            &cfg,
        )
        .unwrap();
        assert_eq!(r.reference, 99.0);
    }

    #[test]
    fn remainder_matches_direct_difference() {
        let cfg = QuadratureConfig::default();
        for rho in [-2.0, 0.0, 2.0] {
            for m in [10u64, 20, 40] {
                let r = density_estimate(&geom(rho), m, ErrorBudget::zero(), &[2], &cfg).unwrap();
                let direct = r.density - r.reference;
                assert!(
                    (r.remainder - direct).abs() <= 1e-12 * r.reference,
                    "rho={rho} m={m}"
                );
            }
        }
    }

    #[test]
    fn interval_contains_density_and_grows_with_budget() {
        let cfg = QuadratureConfig::default();
        let mut last = 0.0;
        for c in [0.0, 0.5, 1.0, 4.0] {
            let r = density_estimate(
                &geom(-1.0),
                500,
                ErrorBudget::new(c).unwrap(),
                &DEFAULT_V_DEGREES,
                &cfg,
            )
            .unwrap();
            assert!(r.interval.0 <= r.density && r.density <= r.interval.1);
            let width = r.interval.1 - r.interval.0;
            assert!(width >= last);
            last = width;
            assert_eq!(r.budget_c, c);
        }
    }

    #[test]
    fn lambda_tail_envelope() {
        // |remainder| <= 2 m exp(-(log m)^2) for rho <= 0 with zero budget
        let cfg = QuadratureConfig::default();
        for rho in [-2.0, -1.0, 0.0] {
            for m in [10u64, 30, 100, 1000, 10_000, 1_000_000] {
                let r =
                    density_estimate(&geom(rho), m, ErrorBudget::zero(), &DEFAULT_V_DEGREES, &cfg)
                        .unwrap();
                let l = (m as f64).ln();
                let bound = 2.0 * m as f64 * (-l * l).exp();
                assert!(r.remainder.abs() <= bound, "rho={rho} m={m}");
            }
        }
        // the bound sits inside the envelope from m = 6 on
        for m in 6..=100_000u64 {
            let l = (m as f64).ln();
            assert!(
                2.0 * m as f64 * (-l * l).exp() <= remainder_envelope(m as f64),
                "m={m}"
            );
        }
        // for rho = 2 the remainder is exactly (m+1) tail / (1 - tail)
        for m in [10u64, 100, 1000] {
            let r = density_estimate(&geom(2.0), m, ErrorBudget::zero(), &DEFAULT_V_DEGREES, &cfg)
                .unwrap();
            let tail = lambda0_tail(&geom(2.0), m).unwrap();
            let expected = (m as f64 + 1.0) * tail / (1.0 - tail);
            assert!(((r.remainder - expected) / expected).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_fit() {
        let cfg = QuadratureConfig::default();
        let s = remainder_sweep(
            &geom(0.0),
            &[100, 1000, 10_000],
            ErrorBudget::zero(),
            &DEFAULT_V_DEGREES,
            &cfg,
        )
        .unwrap();
        assert_eq!(s.reports.len(), 3);
        assert!(s.fitted_c <= 1.0 && s.fitted_c > 0.0);
        assert!(s.within_envelope);
        assert!(s.decay_violations.is_empty());

        let s = remainder_sweep(
            &geom(-2.0),
            &[100, 1000, 10_000],
            ErrorBudget::zero(),
            &DEFAULT_V_DEGREES,
            &cfg,
        )
        .unwrap();
        assert!(s.fitted_c.is_finite());

        let e = remainder_sweep(
            &geom(0.0),
            &[],
            ErrorBudget::zero(),
            &DEFAULT_V_DEGREES,
            &cfg,
        )
        .unwrap();
        assert!(e.reports.is_empty());
        assert_eq!(e.fitted_c, 0.0);
    }

    #[test]
    fn density_preconditions() {
        let cfg = QuadratureConfig::default();
        assert!(density_estimate(&geom(0.0), 9, ErrorBudget::zero(), &[], &cfg).is_err());
        assert!(matches!(
            density_estimate(&geom(-20.0), 10, ErrorBudget::zero(), &[], &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sphere_small_cases() {
        let d = cp1_density(1, PointDisk::new(0.0, 0.0)).unwrap();
        assert_eq!(d.summed, 2.0);
        assert_eq!(d.analytic, 2.0);
        let d = cp1_density(3, PointDisk::new(0.7, 0.2)).unwrap();
        assert!((d.summed - 4.0).abs() < 1e-12);
        for m in [1u64, 5, 64, 300] {
            let d = cp1_density(m, PointDisk::new(-1.3, 2.1)).unwrap();
            assert!(((d.summed - d.analytic) / d.analytic).abs() < 1e-9, "m={m}");
            assert_eq!(d.analytic, expansion_reference(m, 2.0));
        }
        assert!(cp1_density(0, PointDisk::new(0.0, 0.0)).is_err());
    }
}
