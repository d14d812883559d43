//! Property suites behind `verify`: model residuals, cut-off bounds, the
//! `Psi` Hessian sweep, quadrature against closed forms, moment symmetry,
//! the three `I_00` routes, sphere constancy and peak-norm stability.
//!
//! Each suite returns a [`SuiteOutcome`]; a suite can pass while flagged,
//! which marks a documented deviation from a nominal bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cutoff::{psi_hessian_bound_check, AnnulusGrid, CutoffProfile, WeightParams};
use crate::density::cp1_density;
use crate::error::Result;
use crate::geometry::{ModelGeometry, PointDisk, DEFAULT_STEP};
use crate::gram::{inverse00_oracle, orthonormalize_i00, schur_i00, BorderedGram};
use crate::moments::{
    lambda0_closed_form, lambda_inv_sq, monomial_moment, peak_norm_bound_check, truncation_radius,
};
use crate::quadrature::QuadratureConfig;

/// Inputs shared by the suites.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub rho: f64,
    pub m_list: Vec<u64>,
    pub quadrature: QuadratureConfig,
    pub profile: CutoffProfile,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub flagged: bool,
    pub detail: String,
}

impl SuiteOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            flagged: false,
            detail,
        }
    }

    fn failed(name: &'static str, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn rms(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Pointwise residual tolerance at step `1e-3`.
pub const RESIDUAL_TOL: f64 = 1e-5;
/// Observed convergence order must land in this band under step halving.
pub const ORDER_BAND: (f64, f64) = (1.7, 2.3);
/// Relative agreement required between the three `I_00` routes.
pub const ROUTE_TOL: f64 = 1e-10;
/// Relative deviation allowed from `m + 1` on the sphere.
pub const CP1_TOL: f64 = 1e-9;

/// `n` seeded points with `|z| <= radius`, area-uniform.
pub fn sample_disk(rng: &mut impl Rng, n: usize, radius: f64) -> Vec<PointDisk> {
    (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            PointDisk::from_polar(r, theta)
        })
        .collect()
}

/// Interior radius used for residual sampling.
fn interior_radius(geom: &ModelGeometry) -> f64 {
    0.5 * geom.max_radius().min(1.0)
}

pub fn geometry_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "geometry-residuals";
    let run = || -> Result<SuiteOutcome> {
        let geom = ModelGeometry::new(vc.rho)?;
        let mut rng = ChaCha8Rng::seed_from_u64(vc.seed);
        let radius = interior_radius(&geom);
        let points = sample_disk(&mut rng, 100, radius);
        let h = DEFAULT_STEP;
        let (mut coarse, mut fine, mut weight) = (Vec::new(), Vec::new(), Vec::new());
        for &z in &points {
            coarse.push(geom.curvature_residual(z, h)?);
            fine.push(geom.curvature_residual(z, h / 2.0)?);
            weight.push(geom.weight_residual(z, h)?);
            // polar stencil needs r > h
            let r = z.norm().max(10.0 * h);
            coarse.push(geom.polar_curvature_residual(r, h)?);
            fine.push(geom.polar_curvature_residual(r, h / 2.0)?);
        }
        let worst = coarse
            .iter()
            .chain(&weight)
            .fold(0.0f64, |a, r| a.max(r.abs()));
        let (rc, rf) = (rms(&coarse), rms(&fine));
        let mut passed = worst <= RESIDUAL_TOL;
        let order = if rc == 0.0 {
            // flat model: the stencils are exact
            None
        } else {
            let p = (rc / rf).log2();
            passed &= p >= ORDER_BAND.0 && p <= ORDER_BAND.1;
            Some(p)
        };
        let order_text = order.map_or("exact".to_string(), |p| format!("{p:.3}"));
        Ok(SuiteOutcome::new(
            NAME,
            passed,
            format!("max residual {worst:.3e} (tol {RESIDUAL_TOL:e}), observed order {order_text}"),
        ))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

pub fn k_coordinate_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "k-coordinate";
    let run = || -> Result<SuiteOutcome> {
        let geom = ModelGeometry::new(vc.rho)?;
        let h = (1e-2f64).min(0.1 * geom.max_radius());
        let derivs = geom.k_coordinate_check(3, h)?;
        let worst = derivs
            .iter()
            .fold(0.0f64, |a, d| a.max(d.metric).max(d.weight));
        Ok(SuiteOutcome::new(
            NAME,
            worst <= 1e-6,
            format!("max |d^k g|, |d^k a| at 0 for k <= 3: {worst:.3e}"),
        ))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

/// Non-knot samples of `t` in `[0, 1.2]`.
pub fn cutoff_samples(profile: CutoffProfile, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 1.2 * (i as f64 + 0.5) / n as f64)
        .filter(|t| profile.knots().iter().all(|k| (t - k).abs() > 1e-12))
        .collect()
}

pub fn cutoff_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "cutoff-bounds";
    let profile = vc.profile;
    let samples = cutoff_samples(profile, 10_000);
    let min_slope = samples
        .iter()
        .map(|&t| -profile.eta_d1(t))
        .fold(f64::INFINITY, f64::min);
    let max_slope = samples
        .iter()
        .map(|&t| -profile.eta_d1(t))
        .fold(0.0, f64::max);
    let max_curv = samples
        .iter()
        .map(|&t| profile.eta_d2(t).abs())
        .fold(0.0, f64::max);
    let bounds = profile.documented_bounds();
    let passed =
        min_slope >= 0.0 && max_slope <= bounds.slope + 1e-9 && max_curv <= bounds.curvature + 1e-9;
    let mut out = SuiteOutcome::new(
        NAME,
        passed,
        format!(
            "{} profile: max -eta' {max_slope:.4} (bound {}), max |eta''| {max_curv:.4} (bound {:.4})",
            profile.name(),
            bounds.slope,
            bounds.curvature
        ),
    );
    if !profile.meets_nominal_bounds() {
        out.flagged = true;
        out.detail
            .push_str("; exceeds nominal |eta''| <= 8, documented variant");
    }
    out
}

/// `(m, p')` pairs for the Hessian sweep.
pub const HESSIAN_CASES: [(u64, u32); 3] = [(1_000, 2), (10_000, 2), (10_000, 3)];

pub fn hessian_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "psi-hessian";
    let run = || -> Result<SuiteOutcome> {
        let geom = ModelGeometry::new(vc.rho)?;
        let mut passed = true;
        let mut parts = Vec::new();
        for (m, p) in HESSIAN_CASES {
            let params = WeightParams::new(p, m)?;
            let check = psi_hessian_bound_check(
                &params,
                vc.profile,
                &geom,
                &AnnulusGrid::transition(&params),
            )?;
            passed &= check.pass;
            parts.push(format!("(m={m}, p'={p}) slack {:.3e}", check.min_slack));
        }
        Ok(SuiteOutcome::new(NAME, passed, parts.join(", ")))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

pub fn quadrature_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "quadrature-closed-form";
    let run = || -> Result<SuiteOutcome> {
        let geom = ModelGeometry::new(vc.rho)?;
        let tol = 10.0 * vc.quadrature.rel_tol;
        let mut worst = 0.0f64;
        for &m in &vc.m_list {
            let q = lambda_inv_sq(&geom, m, 0, truncation_radius(m), &vc.quadrature)?;
            worst = worst.max(rel(q.value, lambda0_closed_form(&geom, m)?));
        }
        Ok(SuiteOutcome::new(
            NAME,
            worst <= tol,
            format!("max relative error {worst:.3e} (tol {tol:.1e})"),
        ))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

pub fn moment_symmetry_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "moment-symmetry";
    let run = || -> Result<SuiteOutcome> {
        let geom = ModelGeometry::new(vc.rho)?;
        let m = vc.m_list[0];
        let r = truncation_radius(m);
        let mut nonzero = 0;
        for alpha in 0..=6 {
            for beta in 0..=6 {
                if alpha != beta
                    && monomial_moment(&geom, m, alpha, beta, r, &vc.quadrature)?
                        != Complex64::new(0.0, 0.0)
                {
                    nonzero += 1;
                }
            }
        }
        Ok(SuiteOutcome::new(
            NAME,
            nonzero == 0,
            format!("{nonzero} nonzero off-diagonal moments of 42 at m = {m}"),
        ))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

/// A random Hermitian positive definite matrix `B B* + I`, built with an exactly
/// Hermitian layout.
pub fn random_pd_gram(rng: &mut impl Rng, dim: usize) -> Result<BorderedGram> {
    let b: Vec<Complex64> = (0..dim * dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let mut s: Complex64 = (0..dim)
                .map(|k| b[i * dim + k] * b[j * dim + k].conj())
                .sum();
            if i == j {
                s = Complex64::new(s.re + 1.0, 0.0);
            }
            entries[i * dim + j] = s;
            entries[j * dim + i] = s.conj();
        }
    }
    BorderedGram::from_entries(dim, entries, vec![0.0; dim * dim])
}

/// Largest pairwise relative disagreement between the three `I_00` routes.
pub fn route_disagreement(g: &BorderedGram) -> Result<f64> {
    let s = schur_i00(g)?.value;
    let i = inverse00_oracle(g)?;
    let o = orthonormalize_i00(g)?;
    Ok(rel(s, i).max(rel(s, o)).max(rel(i, o)))
}

pub fn schur_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "schur-vs-inverse";
    let run = || -> Result<SuiteOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(vc.seed);
        let mut worst = 0.0f64;
        let count = 200;
        for _ in 0..count {
            let dim = rng.random_range(2..=12);
            worst = worst.max(route_disagreement(&random_pd_gram(&mut rng, dim)?)?);
        }
        Ok(SuiteOutcome::new(
            NAME,
            worst <= ROUTE_TOL,
            format!("{count} matrices, max pairwise relative gap {worst:.3e}"),
        ))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

pub fn cp1_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "cp1-constancy";
    let run = || -> Result<SuiteOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(vc.seed);
        let mut worst = 0.0f64;
        for m in 1..=64 {
            for z in sample_disk(&mut rng, 20, 3.0) {
                let d = cp1_density(m, z)?;
                worst = worst.max(rel(d.summed, d.analytic));
            }
        }
        Ok(SuiteOutcome::new(
            NAME,
            worst <= CP1_TOL,
            format!("m = 1..64, 20 points each, max relative deviation {worst:.3e}"),
        ))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

pub fn peak_norm_suite(vc: &VerifyConfig) -> SuiteOutcome {
    const NAME: &str = "peak-norm";
    let run = || -> Result<SuiteOutcome> {
        let geom = ModelGeometry::new(vc.rho)?;
        let mut passed = true;
        let mut parts = Vec::new();
        for p in 0..=2 {
            let check = peak_norm_bound_check(&geom, &vc.m_list, p, &vc.quadrature)?;
            passed &= check.pass;
            parts.push(format!(
                "p={p}: C {:.4}, spread {:.2e}",
                check.max_ratio, check.top_decade_spread
            ));
        }
        Ok(SuiteOutcome::new(NAME, passed, parts.join(", ")))
    };
    run().unwrap_or_else(|e| SuiteOutcome::failed(NAME, e))
}

pub fn run_all(vc: &VerifyConfig) -> Vec<SuiteOutcome> {
    vec![
        geometry_suite(vc),
        k_coordinate_suite(vc),
        cutoff_suite(vc),
        hessian_suite(vc),
        quadrature_suite(vc),
        moment_symmetry_suite(vc),
        schur_suite(vc),
        cp1_suite(vc),
        peak_norm_suite(vc),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(rho: f64) -> VerifyConfig {
        VerifyConfig {
            rho,
            m_list: vec![100, 316, 1000, 3162, 10000],
            quadrature: QuadratureConfig::default(),
            profile: CutoffProfile::C1,
            seed: 7,
        }
    }

    #[test]
    fn default_suites_pass() {
        for rho in [-2.0, 0.0, 2.0] {
            for s in run_all(&config(rho)) {
                assert!(s.passed, "rho={rho} {}: {}", s.name, s.detail);
            }
        }
    }

    #[test]
    fn loose_tolerance_still_passes_quadrature() {
        let mut vc = config(-2.0);
        vc.quadrature = QuadratureConfig::new(1e-4, 60).unwrap();
        let s = quadrature_suite(&vc);
        assert!(s.passed, "{}", s.detail);
    }

    #[test]
    fn smooth_profile_is_flagged_not_failed() {
        let mut vc = config(-2.0);
        vc.profile = CutoffProfile::Smooth;
        let s = cutoff_suite(&vc);
        assert!(s.passed && s.flagged, "{s:?}");
        let s = cutoff_suite(&config(-2.0));
        assert!(s.passed && s.flagged, "{s:?}");
    }

    #[test]
    fn random_grams_are_hermitian_pd() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_pd_gram(&mut rng, 6).unwrap();
        assert!(schur_i00(&g).unwrap().value > 0.0);
    }

    #[test]
    fn domain_errors_become_failures() {
        let mut vc = config(-200.0);
        vc.m_list = vec![10];
        let s = quadrature_suite(&vc);
        assert!(!s.passed);
        assert!(s.detail.starts_with("error"));
    }
}
