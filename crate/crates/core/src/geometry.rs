//! Constant scalar curvature local model on a disk around the base point.
//!
//! In an isothermal coordinate `z` centred at the base point, a metric of
//! constant scalar curvature `rho` with `g(0) = 1` and `dg/dz(0) = 0` is
//!
//! ```text
//! g(z) = (1 + rho |z|^2 / 2)^-2
//! ```
//!
//! and the Hermitian weight of the polarizing bundle, normalized by
//! `-d dbar log a = g`, `a(0) = 1`, is
//!
//! ```text
//! a(z) = (1 + rho |z|^2 / 2)^(-2 / rho)     (rho != 0)
//! a(z) = exp(-|z|^2)                        (rho == 0)
//! ```
//!
//! For `rho < 0` both blow up on the circle `|z| = sqrt(2 / |rho|)`, which is
//! the edge of the model disk. Everything here is a function of `s = |z|^2`,
//! so the model is rotationally symmetric by construction.
//!
//! Mixed Wirtinger derivatives are computed as `(f_xx + f_yy) / 4` with
//! central differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default step for the finite-difference checks.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Constant scalar curvature of the model metric.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarCurvature(f64);

impl ScalarCurvature {
    pub fn new(rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scalar curvature must be finite, got {rho}"
            )));
        }
        Ok(Self(rho))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point of the coordinate disk, stored as a complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointDisk(pub Complex64);

impl PointDisk {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self(Complex64::from_polar(r, theta))
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }
}

impl From<Complex64> for PointDisk {
    fn from(z: Complex64) -> Self {
        Self(z)
    }
}

/// Estimated pure holomorphic derivatives `d^k/dz^k` at the base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KCoordinateDerivative {
    pub order: u32,
    /// `|d^k g / dz^k (0)|`
    pub metric: f64,
    /// `|d^k a / dz^k (0)|`
    pub weight: f64,
}

/// The local metric/weight pair of constant scalar curvature `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelGeometry {
    rho: ScalarCurvature,
    max_radius: f64,
}

impl ModelGeometry {
    pub fn new(rho: f64) -> Result<Self> {
        let rho = ScalarCurvature::new(rho)?;
        let max_radius = if rho.value() < 0.0 {
            (2.0 / rho.value().abs()).sqrt()
        } else {
            f64::INFINITY
        };
        Ok(Self { rho, max_radius })
    }

    /// Restrict the chart to `|z| < cap`, e.g. the injectivity radius at the base point.
    pub fn with_radius_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::InvalidInput(format!(
                "radius cap must be positive, got {cap}"
            )));
        }
        self.max_radius = self.max_radius.min(cap);
        Ok(self)
    }

    pub fn rho(&self) -> f64 {
        self.rho.value()
    }

    pub fn curvature(&self) -> ScalarCurvature {
        self.rho
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    /// Whether the open disk of radius `r` lies in the chart.
    pub fn contains_radius(&self, r: f64) -> bool {
        r.is_finite() && r >= 0.0 && r < self.max_radius
    }

    fn check_point(&self, z: PointDisk) -> Result<()> {
        let r = z.norm();
        if self.contains_radius(r) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "|z| = {r} is outside the model disk of radius {}",
                self.max_radius
            )))
        }
    }

    /// `log g` as a function of `s = |z|^2`. No domain check.
    pub fn log_metric_sq(&self, s: f64) -> f64 {
        let rho = self.rho();
        if rho == 0.0 {
            0.0
        } else {
            -2.0 * (0.5 * rho * s).ln_1p()
        }
    }

    /// `log a` as a function of `s = |z|^2`. No domain check.
    pub fn log_weight_sq(&self, s: f64) -> f64 {
        let rho = self.rho();
        if rho == 0.0 {
            -s
        } else {
            -(2.0 / rho) * (0.5 * rho * s).ln_1p()
        }
    }

    /// Metric density `g(z) = (1 + rho |z|^2 / 2)^-2`, identically 1 when `rho == 0`.
    pub fn metric_density(&self, z: PointDisk) -> Result<f64> {
        self.check_point(z)?;
        Ok(self.log_metric_sq(z.norm_sqr()).exp())
    }

    /// Bundle weight `a(z)`.
    pub fn bundle_weight(&self, z: PointDisk) -> Result<f64> {
        self.check_point(z)?;
        Ok(self.log_weight_sq(z.norm_sqr()).exp())
    }

    fn check_stencil(&self, z: PointDisk, reach: f64) -> Result<()> {
        let outer = z.norm() + reach;
        if self.contains_radius(outer) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "finite-difference stencil reaches |z| = {outer}, outside radius {}",
                self.max_radius
            )))
        }
    }

    /// `(f_xx + f_yy) / 4` of a function of `|z|^2` by the five-point stencil.
    fn wirtinger_laplacian(f: impl Fn(f64) -> f64, z: PointDisk, h: f64) -> f64 {
        let (x, y) = (z.re(), z.im());
        let at = |dx: f64, dy: f64| {
            let (u, v) = (x + dx, y + dy);
            f(u * u + v * v)
        };
        let sum = at(h, 0.0) + at(-h, 0.0) + at(0.0, h) + at(0.0, -h) - 4.0 * at(0.0, 0.0);
        0.25 * sum / (h * h)
    }

    /// Residual of `g^-1 d dbar log g + rho = 0` by central differences.
    pub fn curvature_residual(&self, z: PointDisk, h: f64) -> Result<f64> {
        check_step(h)?;
        self.check_stencil(z, h)?;
        let ddbar = Self::wirtinger_laplacian(|s| self.log_metric_sq(s), z, h);
        let g = self.log_metric_sq(z.norm_sqr()).exp();
        Ok(ddbar / g + self.rho())
    }

    /// Residual of the radial ODE `g'' + g'/r - g'^2/g + 4 rho g^2 = 0` at radius `r`.
    pub fn polar_residual(&self, r: f64, h: f64) -> Result<f64> {
        check_step(h)?;
        if !(r > h) {
            return Err(Error::Domain(format!(
                "polar stencil needs r > h, got r = {r}, h = {h}"
            )));
        }
        if !self.contains_radius(r + h) {
            return Err(Error::Domain(format!(
                "polar stencil reaches r = {}, outside radius {}",
                r + h,
                self.max_radius
            )));
        }
        let g = |r: f64| self.log_metric_sq(r * r).exp();
        let (gm, g0, gp) = (g(r - h), g(r), g(r + h));
        let d1 = (gp - gm) / (2.0 * h);
        let d2 = (gp - 2.0 * g0 + gm) / (h * h);
        Ok(d2 + d1 / r - d1 * d1 / g0 + 4.0 * self.rho() * g0 * g0)
    }

    /// [`Self::polar_residual`] divided by `4 g^2`, which puts it on the scale of
    /// [`Self::curvature_residual`]: `(g'' + g'/r - g'^2/g) / (4 g^2) + rho`.
    pub fn polar_curvature_residual(&self, r: f64, h: f64) -> Result<f64> {
        let raw = self.polar_residual(r, h)?;
        let g = self.log_metric_sq(r * r).exp();
        Ok(raw / (4.0 * g * g))
    }

    /// Residual of `-d dbar log a = g` by central differences.
    pub fn weight_residual(&self, z: PointDisk, h: f64) -> Result<f64> {
        check_step(h)?;
        self.check_stencil(z, h)?;
        let ddbar = Self::wirtinger_laplacian(|s| self.log_weight_sq(s), z, h);
        let g = self.log_metric_sq(z.norm_sqr()).exp();
        Ok(-ddbar - g)
    }

    /// Finite-difference magnitudes of `d^k g/dz^k (0)` and `d^k a/dz^k (0)`
    /// for `k = 1..=order`. In a K-coordinate all of them vanish.
    pub fn k_coordinate_check(&self, order: u32, h: f64) -> Result<Vec<KCoordinateDerivative>> {
        if order > 4 {
            return Err(Error::InvalidInput(format!(
                "holomorphic derivative order must be at most 4, got {order}"
            )));
        }
        check_step(h)?;
        // widest stencil is two steps in each direction
        self.check_stencil(PointDisk::new(0.0, 0.0), 2.0 * std::f64::consts::SQRT_2 * h)?;
        let g = |x: f64, y: f64| self.log_metric_sq(x * x + y * y).exp();
        let a = |x: f64, y: f64| self.log_weight_sq(x * x + y * y).exp();
        Ok((1..=order)
            .map(|k| KCoordinateDerivative {
                order: k,
                metric: holomorphic_derivative_at_origin(&g, k, h).norm(),
                weight: holomorphic_derivative_at_origin(&a, k, h).norm(),
            })
            .collect())
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "step must be positive, got {h}"
        )))
    }
}

/// Second-order central difference stencils for the `n`-th derivative, as
/// (offset, weight) pairs before division by `h^n`.
fn central_stencil(n: u32) -> &'static [(i32, f64)] {
    match n {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("stencils are tabulated up to order 4"),
    }
}

/// `d^k/dz^k = 2^-k (d/dx - i d/dy)^k`, expanded binomially into tensor-product stencils.
fn holomorphic_derivative_at_origin(f: &impl Fn(f64, f64) -> f64, k: u32, h: f64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for j in 0..=k {
        let (nx, ny) = (k - j, j);
        let mut mixed = 0.0;
        for &(i, wi) in central_stencil(nx) {
            for &(l, wl) in central_stencil(ny) {
                mixed += wi * wl * f(i as f64 * h, l as f64 * h);
            }
        }
        mixed /= h.powi(k as i32);
        // (-i)^j
        let phase = match j % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        total += phase * (binom * mixed);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    total / 2f64.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(rho: f64) -> ModelGeometry {
        ModelGeometry::new(rho).unwrap()
    }

    #[test]
    fn values_at_the_base_point() {
        for rho in [-2.0, -0.5, 0.0, 1.0, 2.0] {
            let o = PointDisk::new(0.0, 0.0);
            assert_eq!(geom(rho).metric_density(o).unwrap(), 1.0);
            assert_eq!(geom(rho).bundle_weight(o).unwrap(), 1.0);
        }
    }

    #[test]
    fn closed_form_samples() {
        assert_eq!(
            geom(0.0).metric_density(PointDisk::new(0.5, 0.0)).unwrap(),
            1.0
        );
        let g = geom(2.0).metric_density(PointDisk::new(0.0, 1.0)).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
        let a = geom(2.0).bundle_weight(PointDisk::new(1.0, 0.0)).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        let a = geom(0.0).bundle_weight(PointDisk::new(0.6, 0.8)).unwrap();
        assert!((a - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn weight_is_continuous_in_rho() {
        let z = PointDisk::new(0.3, -0.4);
        let flat = geom(0.0).bundle_weight(z).unwrap();
        for rho in [1e-9, -1e-9, 1e-12] {
            let a = geom(rho).bundle_weight(z).unwrap();
            assert!((a - flat).abs() < 1e-9, "rho = {rho}: {a} vs {flat}");
        }
    }

    #[test]
    fn domain_for_negative_curvature() {
        let g = geom(-2.0);
        assert_eq!(g.max_radius(), 1.0);
        assert!(matches!(
            g.metric_density(PointDisk::new(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(g.bundle_weight(PointDisk::new(0.0, 1.5)).is_err());
        assert!(geom(2.0).max_radius().is_infinite());
        assert!(geom(0.0).metric_density(PointDisk::new(1e6, 0.0)).is_ok());
    }

    #[test]
    fn metric_diverges_at_the_boundary() {
        for rho in [-2.0, -1.0, -0.25] {
            let g = geom(rho);
            let r = g.max_radius() * (1.0 - 1e-4);
            assert!(g.metric_density(PointDisk::from_polar(r, 0.3)).unwrap() > 1e6);
        }
    }

    #[test]
    fn radius_cap() {
        let g = geom(-2.0).with_radius_cap(0.5).unwrap();
        assert_eq!(g.max_radius(), 0.5);
        assert!(g.metric_density(PointDisk::new(0.6, 0.0)).is_err());
        assert!(geom(1.0).with_radius_cap(0.0).is_err());
        assert!(ModelGeometry::new(f64::NAN).is_err());
    }

    #[test]
    fn flat_curvature_residual_is_exact() {
        let r = geom(0.0)
            .curvature_residual(PointDisk::new(0.3, 0.0), 1e-3)
            .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn curvature_residuals_are_small() {
        let r = geom(-2.0)
            .curvature_residual(PointDisk::new(0.2, 0.0), 1e-3)
            .unwrap();
        assert!(r.abs() <= 1e-5, "{r}");
        let r = geom(2.0).polar_residual(0.5, 1e-3).unwrap();
        assert!(r.abs() <= 1e-5, "{r}");
        let r = geom(-2.0)
            .weight_residual(PointDisk::new(0.1, 0.3), 1e-3)
            .unwrap();
        assert!(r.abs() <= 1e-5, "{r}");
    }

    #[test]
    fn polar_residual_scales() {
        // the raw ODE carries 4 g^2 times the curvature-scale truncation error
        let g = geom(-2.0);
        let raw = g.polar_residual(0.1, 1e-3).unwrap();
        let scaled = g.polar_curvature_residual(0.1, 1e-3).unwrap();
        assert!(raw.abs() > 1e-5 && scaled.abs() < 1e-5, "{raw} {scaled}");
        let density = g.metric_density(PointDisk::new(0.1, 0.0)).unwrap();
        assert!((raw / (4.0 * density * density) - scaled).abs() < 1e-18);
    }

    #[test]
    fn stencil_outside_domain() {
        let g = geom(-2.0);
        assert!(g
            .curvature_residual(PointDisk::new(0.9995, 0.0), 1e-3)
            .is_err());
        assert!(g.polar_residual(0.9995, 1e-3).is_err());
        assert!(g.polar_residual(1e-4, 1e-3).is_err());
        assert!(g.curvature_residual(PointDisk::new(0.1, 0.0), 0.0).is_err());
    }

    #[test]
    fn k_coordinate_derivatives_vanish() {
        let d = geom(-2.0).k_coordinate_check(1, DEFAULT_STEP).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d[0].metric < 1e-9 && d[0].weight < 1e-9);

        for d in geom(0.0).k_coordinate_check(2, DEFAULT_STEP).unwrap() {
            assert!(d.metric < 1e-9 && d.weight < 1e-9, "{d:?}");
        }
        for d in geom(2.0).k_coordinate_check(3, 1e-2).unwrap() {
            assert!(d.metric <= 1e-6 && d.weight <= 1e-6, "{d:?}");
        }
        // fourth order carries an O(h^2) truncation term
        let d4 = geom(2.0).k_coordinate_check(4, 1e-2).unwrap()[3];
        assert!(d4.metric < 1e-1 && d4.weight < 1e-1, "{d4:?}");
        assert!(geom(2.0).k_coordinate_check(5, 1e-2).is_err());
    }

    #[test]
    fn holomorphic_derivative_of_a_polynomial() {
        // z^2 = x^2 - y^2 + 2ixy has d^2/dz^2 = 2, but we only take real f;
        // Re(z^2) = (z^2 + zbar^2)/2 has d^2/dz^2 = 1.
        let f = |x: f64, y: f64| x * x - y * y;
        let d = holomorphic_derivative_at_origin(&f, 2, 1e-2);
        assert!((d - Complex64::new(1.0, 0.0)).norm() < 1e-10, "{d}");
        // Re(z^3) / 1 has d^3/dz^3 = 3
        let f = |x: f64, y: f64| x * x * x - 3.0 * x * y * y;
        let d = holomorphic_derivative_at_origin(&f, 3, 1e-2);
        assert!((d - Complex64::new(3.0, 0.0)).norm() < 1e-8, "{d}");
    }
}
