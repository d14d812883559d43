//! Rotationally symmetric moments of the peak-section weight.
//!
//! With the measure `(i / 2 pi) dz ^ dzbar = dx dy / pi`, the angular integral
//! of `z^alpha zbar^beta F(|z|^2)` is `delta_{alpha beta}` times the radial
//! integral, and
//!
//! ```text
//! lambda_p^-2 = int_{|z| <= R} |z|^{2p} a^m g dV = int_0^{R^2} s^p a(s)^m g(s) ds.
//! ```
//!
//! The radial integrand is evaluated as `exp(p log s + m log a + log g)` so
//! that `a^m` never underflows on its own.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ModelGeometry;
use crate::quadrature::{integrate, QuadratureConfig};

/// A radial moment with its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialMoment {
    pub m: u64,
    pub p: u32,
    pub radius: f64,
    pub value: f64,
    pub abs_err: f64,
}

/// Radius `log m / sqrt(m)` of the truncation disk.
pub fn truncation_radius(m: u64) -> f64 {
    let m = m as f64;
    m.ln() / m.sqrt()
}

fn check_power(m: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "m must be at least 2, got {m}"
        )));
    }
    Ok(())
}

/// `lambda_p^-2` over the disk `|z| <= radius`.
pub fn lambda_inv_sq(
    geom: &ModelGeometry,
    m: u64,
    p: u32,
    radius: f64,
    cfg: &QuadratureConfig,
) -> Result<RadialMoment> {
    check_power(m)?;
    if !(radius > 0.0) || !geom.contains_radius(radius) {
        return Err(Error::Domain(format!(
            "integration radius {radius} must lie in (0, {})",
            geom.max_radius()
        )));
    }
    let mf = m as f64;
    let pf = p as f64;
    let integrand = |s: f64| {
        let mut log_f = mf * geom.log_weight_sq(s) + geom.log_metric_sq(s);
        if p > 0 {
            log_f += pf * s.ln();
        }
        log_f.exp()
    };
    let est = integrate(integrand, 0.0, radius * radius, cfg)?;
    Ok(RadialMoment {
        m,
        p,
        radius,
        value: est.value,
        abs_err: est.abs_err,
    })
}

/// `x = rho (log m)^2 / (2m)` after the domain checks shared by the closed forms.
fn closed_form_argument(geom: &ModelGeometry, m: u64) -> Result<f64> {
    check_power(m)?;
    let r = truncation_radius(m);
    if !geom.contains_radius(r) {
        return Err(Error::Domain(format!(
            "truncation radius {r} for m = {m} is outside the model disk of radius {}",
            geom.max_radius()
        )));
    }
    let mf = m as f64;
    let x = geom.rho() * mf.ln() * mf.ln() / (2.0 * mf);
    if x.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "|rho (log m)^2 / 2m| = {} must be below 1",
            x.abs()
        )));
    }
    Ok(x)
}

/// The tail `(1 + rho (log m)^2 / 2m)^(-1 - 2m/rho)`, or `exp(-(log m)^2)` when `rho == 0`,
/// so that `lambda_0^-2 = (1 - tail) / (m + rho/2)`.
pub fn lambda0_tail(geom: &ModelGeometry, m: u64) -> Result<f64> {
    let x = closed_form_argument(geom, m)?;
    Ok(log_lambda0_tail(geom.rho(), m as f64, x).exp())
}

fn log_lambda0_tail(rho: f64, m: f64, x: f64) -> f64 {
    if rho == 0.0 {
        -m.ln() * m.ln()
    } else {
        (-1.0 - 2.0 * m / rho) * x.ln_1p()
    }
}

/// `lambda_0^-2` on the truncation disk in closed form.
pub fn lambda0_closed_form(geom: &ModelGeometry, m: u64) -> Result<f64> {
    let x = closed_form_argument(geom, m)?;
    let mf = m as f64;
    let rho = geom.rho();
    let one_minus_tail = -log_lambda0_tail(rho, mf, x).exp_m1();
    Ok(one_minus_tail / (mf + 0.5 * rho))
}

/// `int z^alpha zbar^beta a^m g dV` over the disk. Off-diagonal moments are
/// exactly zero by rotational symmetry and are returned without quadrature.
pub fn monomial_moment(
    geom: &ModelGeometry,
    m: u64,
    alpha: u32,
    beta: u32,
    radius: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    if alpha != beta {
        check_power(m)?;
        if !(radius > 0.0) || !geom.contains_radius(radius) {
            return Err(Error::Domain(format!(
                "integration radius {radius} must lie in (0, {})",
                geom.max_radius()
            )));
        }
        return Ok(Complex64::new(0.0, 0.0));
    }
    let moment = lambda_inv_sq(geom, m, alpha, radius, cfg)?;
    Ok(Complex64::new(moment.value, 0.0))
}

/// Ratios `lambda_p^2 / m^(1+p)` across a list of powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakNormCheck {
    pub p: u32,
    /// `(m, lambda_p^2 / m^(1+p))`
    pub ratios: Vec<(u64, f64)>,
    /// largest ratio, the empirical constant in `lambda_p^2 <= C m^(1+p)`
    pub max_ratio: f64,
    /// relative spread `(max - min) / max` over the largest decade of m
    pub top_decade_spread: f64,
    pub pass: bool,
}

/// Largest relative spread over the top decade tolerated by [`peak_norm_bound_check`].
pub const PEAK_NORM_STABILITY: f64 = 0.1;

/// Empirical check that `lambda_p^2 / m^(1+p)` stays bounded.
///
/// Passes when all ratios are finite and positive and they settle: the
/// spread over the top decade of `m` is at most [`PEAK_NORM_STABILITY`].
pub fn peak_norm_bound_check(
    geom: &ModelGeometry,
    m_list: &[u64],
    p: u32,
    cfg: &QuadratureConfig,
) -> Result<PeakNormCheck> {
    if p > 3 {
        return Err(Error::InvalidInput(format!("p must be at most 3, got {p}")));
    }
    if m_list.is_empty() {
        return Err(Error::InvalidInput("empty list of powers".into()));
    }
    let mut ratios = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let moment = lambda_inv_sq(geom, m, p, truncation_radius(m), cfg)?;
        // lambda^2 / m^(1+p) = 1 / (moment * m^(1+p)), kept in logs for large m
        let log_ratio = -(moment.value.ln() + (1.0 + p as f64) * (m as f64).ln());
        ratios.push((m, log_ratio.exp()));
    }
    let max_ratio = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let m_top = ratios.iter().map(|r| r.0).max().unwrap_or(0) as f64;
    let (lo, hi) = ratios
        .iter()
        .filter(|r| r.0 as f64 >= m_top / 10.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.1), hi.max(r.1))
        });
    let top_decade_spread = (hi - lo) / hi;
    let pass = ratios.iter().all(|r| r.1.is_finite() && r.1 > 0.0)
        && top_decade_spread <= PEAK_NORM_STABILITY;
    Ok(PeakNormCheck {
        p,
        ratios,
        max_ratio,
        top_decade_spread,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(rho: f64) -> ModelGeometry {
        ModelGeometry::new(rho).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// `gamma(p+1, x) / p! = 1 - exp(-x) sum_{k<=p} x^k / k!`
    fn regularized_lower_gamma(p: u32, x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=p {
            term *= x / k as f64;
            sum += term;
        }
        1.0 - (-x).exp() * sum
    }

    fn factorial(p: u32) -> f64 {
        (1..=p).map(|k| k as f64).product()
    }

    #[test]
    fn flat_moment_matches_antiderivative() {
        let cfg = QuadratureConfig::default();
        for m in [10u64, 100, 1000, 100_000] {
            let r = truncation_radius(m);
            let q = lambda_inv_sq(&geom(0.0), m, 0, r, &cfg).unwrap();
            let mf = m as f64;
            let exact = -(-(mf.ln() * mf.ln())).exp_m1() / mf;
            assert!(rel(q.value, exact) < 1e-12, "m={m}");
            assert!(q.abs_err <= 1e-12 * q.value);
        }
    }

    #[test]
    fn flat_moments_are_incomplete_gamma() {
        let cfg = QuadratureConfig::default();
        let m = 500u64;
        let mf = m as f64;
        for p in 0..=4 {
            let r = truncation_radius(m);
            let q = lambda_inv_sq(&geom(0.0), m, p, r, &cfg).unwrap();
            let exact =
                factorial(p) / mf.powi(p as i32 + 1) * regularized_lower_gamma(p, mf * r * r);
            assert!(rel(q.value, exact) < 1e-11, "p={p}");
            // whole-plane limit p! / m^(p+1)
            let big = lambda_inv_sq(&geom(0.0), m, p, 1.0, &cfg).unwrap();
            assert!(
                rel(big.value, factorial(p) / mf.powi(p as i32 + 1)) < 1e-12,
                "p={p}"
            );
        }
    }

    #[test]
    fn sphere_beta_integral() {
        // int_0^inf (1 + s)^(-m-2) ds = 1 / (m + 1)
        let q = lambda_inv_sq(&geom(2.0), 3, 0, 100.0, &QuadratureConfig::default()).unwrap();
        assert!(rel(q.value, 0.25) < 1e-12, "{}", q.value);
    }

    #[test]
    fn closed_form_values() {
        let v = lambda0_closed_form(&geom(0.0), 100).unwrap();
        let l = 100f64.ln();
        assert!(rel(v, (1.0 - (-l * l).exp()) / 100.0) < 1e-15);

        let v = lambda0_closed_form(&geom(2.0), 10).unwrap();
        let l = 10f64.ln();
        let expected = (1.0 - (1.0 + l * l / 10.0).powi(-11)) / 11.0;
        assert!(rel(v, expected) < 1e-14);
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        let cfg = QuadratureConfig::default();
        for rho in [-2.0, -1.0, -0.1, 0.5, 2.0] {
            for m in [10u64, 77, 1000, 54_321, 1_000_000] {
                let q = lambda_inv_sq(&geom(rho), m, 0, truncation_radius(m), &cfg).unwrap();
                let c = lambda0_closed_form(&geom(rho), m).unwrap();
                assert!(rel(q.value, c) <= 10.0 * cfg.rel_tol, "rho={rho} m={m}");
            }
        }
    }

    #[test]
    fn closed_form_normalization() {
        for rho in [-2.0, -1.0, 0.0, 2.0] {
            for m in [1_000u64, 10_000, 1_000_000] {
                let v = lambda0_closed_form(&geom(rho), m).unwrap();
                let dev = (v * (m as f64 + rho / 2.0) - 1.0).abs();
                let tail = lambda0_tail(&geom(rho), m).unwrap();
                assert!(
                    (dev - tail).abs() <= 1e-15 + 1e-12 * tail,
                    "rho={rho} m={m}"
                );
            }
        }
    }

    #[test]
    fn closed_form_domain() {
        // rho = -2: disk of radius 1, truncation radius log 2 / sqrt 2 fits
        assert!(lambda0_closed_form(&geom(-2.0), 2).is_ok());
        // rho = -50: radius 0.2, truncation radius for m = 10 is 0.73
        assert!(matches!(
            lambda0_closed_form(&geom(-50.0), 10),
            Err(Error::Domain(_))
        ));
        // rho = 10 at m = 10 gives x = 2.65
        assert!(lambda0_closed_form(&geom(10.0), 10).is_err());
        assert!(lambda0_closed_form(&geom(0.0), 1).is_err());
    }

    #[test]
    fn flat_tail_beyond_truncation() {
        let cfg = QuadratureConfig::default();
        let m = 50u64;
        let mf = m as f64;
        let inner = lambda_inv_sq(&geom(0.0), m, 0, truncation_radius(m), &cfg).unwrap();
        let whole = lambda_inv_sq(&geom(0.0), m, 0, 2.0, &cfg).unwrap();
        let tail = whole.value - inner.value;
        let exact = (-(mf.ln() * mf.ln())).exp() / mf;
        assert!(rel(tail, exact) < 1e-6);
    }

    #[test]
    fn moments_increase_with_radius_and_decrease_with_degree() {
        let cfg = QuadratureConfig::default();
        let g = geom(-2.0);
        let mut last = 0.0;
        for r in [0.1, 0.2, 0.4, 0.8] {
            let v = lambda_inv_sq(&g, 20, 1, r, &cfg).unwrap().value;
            assert!(v > last);
            last = v;
        }
        let mut last = f64::INFINITY;
        for p in 0..6 {
            let v = lambda_inv_sq(&g, 20, p, 0.9, &cfg).unwrap().value;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn off_diagonal_moments_are_exact_zeros() {
        let cfg = QuadratureConfig::default();
        let g = geom(-2.0);
        let r = truncation_radius(50);
        assert_eq!(
            monomial_moment(&g, 50, 1, 0, r, &cfg).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let d = monomial_moment(&geom(0.0), 50, 3, 3, r, &cfg).unwrap();
        let l = lambda_inv_sq(&geom(0.0), 50, 3, r, &cfg).unwrap();
        assert_eq!(d, Complex64::new(l.value, 0.0));
        assert!(monomial_moment(&g, 50, 2, 1, 1.5, &cfg).is_err());
    }

    #[test]
    fn radius_checks() {
        let cfg = QuadratureConfig::default();
        assert!(lambda_inv_sq(&geom(-2.0), 10, 0, 1.0, &cfg).is_err());
        assert!(lambda_inv_sq(&geom(-2.0), 10, 0, 0.0, &cfg).is_err());
        assert!(lambda_inv_sq(&geom(-2.0), 1, 0, 0.5, &cfg).is_err());
    }

    #[test]
    fn peak_norm_flat_limits() {
        let cfg = QuadratureConfig::default();
        let ms = [100u64, 1000, 10_000, 100_000];
        let c0 = peak_norm_bound_check(&geom(0.0), &ms, 0, &cfg).unwrap();
        let c1 = peak_norm_bound_check(&geom(0.0), &ms, 1, &cfg).unwrap();
        let c2 = peak_norm_bound_check(&geom(0.0), &ms, 2, &cfg).unwrap();
        for (c, limit) in [(c0, 1.0), (c1, 1.0), (c2, 0.5)] {
            assert!(c.pass);
            for &(_, r) in &c.ratios {
                assert!(rel(r, limit) < 1e-6, "{c:?}");
            }
        }
        let neg = peak_norm_bound_check(&geom(-2.0), &ms, 2, &cfg).unwrap();
        assert!(neg.pass && neg.max_ratio <= 3.0, "{neg:?}");
        assert!(peak_norm_bound_check(&geom(0.0), &ms, 4, &cfg).is_err());
        assert!(peak_norm_bound_check(&geom(0.0), &[], 0, &cfg).is_err());
    }
}
