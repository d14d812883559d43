//! Cut-off profiles `eta` and the peak-section weight `Psi`.
//!
//! `eta` is 1 on `[0, 1/2]`, 0 on `[1, inf)` and non-increasing in between.
//! The nominal constraints are `0 <= -eta' <= 4` and `|eta''| <= 8`. A C^1
//! transition that drops by 1 over a width of 1/2 with flat ends needs
//! `max |eta''| >= 16`, so the nominal second-derivative bound cannot hold for
//! any C^1 profile. Each profile therefore carries its own documented bounds
//! alongside the nominal ones.
//!
//! The weight is
//!
//! ```text
//! Psi(z) = (n + 2p') eta(t) log t,    t = m |z|^2 / (log m)^2
//! ```
//!
//! with a logarithmic pole at `z = 0`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, PointDisk};

/// Nominal bound on `-eta'`.
pub const NOMINAL_SLOPE_BOUND: f64 = 4.0;
/// Nominal bound on `|eta''|`.
pub const NOMINAL_CURVATURE_BOUND: f64 = 8.0;
/// Constant in the lower bound `i d dbar Psi >= -C m (n + 2p') / (log m)^2 omega_g`.
pub const HESSIAN_BOUND_CONSTANT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffProfile {
    /// Piecewise quadratic, `eta'' = -16` on `[1/2, 3/4]` and `+16` on `[3/4, 1]`.
    #[default]
    C1,
    /// Quintic smoothstep on `[1/2, 1]` (C^2).
    Smooth,
}

/// Upper bounds on `-eta'` and `|eta''|` that a profile actually satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBounds {
    pub slope: f64,
    pub curvature: f64,
}

impl CutoffProfile {
    pub fn name(self) -> &'static str {
        match self {
            CutoffProfile::C1 => "c1",
            CutoffProfile::Smooth => "smooth",
        }
    }

    /// Points where `eta''` jumps.
    pub fn knots(self) -> &'static [f64] {
        match self {
            CutoffProfile::C1 => &[0.5, 0.75, 1.0],
            CutoffProfile::Smooth => &[0.5, 1.0],
        }
    }

    pub fn documented_bounds(self) -> DerivativeBounds {
        match self {
            CutoffProfile::C1 => DerivativeBounds {
                slope: 4.0,
                curvature: 16.0,
            },
            CutoffProfile::Smooth => DerivativeBounds {
                slope: 3.75,
                curvature: 40.0 / 3f64.sqrt(),
            },
        }
    }

    /// Whether the documented bounds meet the nominal 4 / 8 constraints.
    pub fn meets_nominal_bounds(self) -> bool {
        let b = self.documented_bounds();
        b.slope <= NOMINAL_SLOPE_BOUND && b.curvature <= NOMINAL_CURVATURE_BOUND
    }

    /// `eta(t)`; negative `t` is treated as lying on the plateau.
    pub fn eta(self, t: f64) -> f64 {
        if t <= 0.5 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        match self {
            CutoffProfile::C1 => {
                if t <= 0.75 {
                    let u = t - 0.5;
                    1.0 - 8.0 * u * u
                } else {
                    let u = 1.0 - t;
                    8.0 * u * u
                }
            }
            CutoffProfile::Smooth => {
                let u = 2.0 * t - 1.0;
                1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
            }
        }
    }

    pub fn eta_d1(self, t: f64) -> f64 {
        if t <= 0.5 || t >= 1.0 {
            return 0.0;
        }
        match self {
            CutoffProfile::C1 => {
                if t <= 0.75 {
                    -16.0 * (t - 0.5)
                } else {
                    -16.0 * (1.0 - t)
                }
            }
            CutoffProfile::Smooth => {
                let u = 2.0 * t - 1.0;
                -60.0 * u * u * (1.0 - u) * (1.0 - u)
            }
        }
    }

    /// `eta''`; at a knot the left-hand value is returned.
    pub fn eta_d2(self, t: f64) -> f64 {
        if t <= 0.5 || t > 1.0 {
            return 0.0;
        }
        match self {
            CutoffProfile::C1 => {
                if t <= 0.75 {
                    -16.0
                } else {
                    16.0
                }
            }
            CutoffProfile::Smooth => {
                let u = 2.0 * t - 1.0;
                -240.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
            }
        }
    }
}

/// Parameters of the weight `Psi` for a monomial of order below `p'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightParams {
    /// complex dimension, 1 for surfaces
    pub n: u32,
    pub p_prime: u32,
    pub m: u64,
}

impl WeightParams {
    pub fn new(p_prime: u32, m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "m must be at least 2, got {m}"
            )));
        }
        Ok(Self { n: 1, p_prime, m })
    }

    /// `n + 2p'`
    pub fn coefficient(&self) -> f64 {
        (self.n + 2 * self.p_prime) as f64
    }

    /// `m / (log m)^2`, so that `t = scale * |z|^2`.
    pub fn scale(&self) -> f64 {
        let m = self.m as f64;
        m / (m.ln() * m.ln())
    }

    /// The peak-section construction asks for `m > exp(8 (p' - 1 + n))`.
    /// Reported, not enforced.
    pub fn above_section_threshold(&self) -> bool {
        let exponent = 8.0 * (self.p_prime as f64 - 1.0 + self.n as f64);
        (self.m as f64).ln() > exponent
    }

    /// Lower bound for `d dbar Psi` at a point with metric density `g`, in the
    /// convention `omega_g = (i / 2 pi) g dz ^ dzbar`.
    pub fn hessian_lower_bound(&self, g: f64) -> f64 {
        let m = self.m as f64;
        -HESSIAN_BOUND_CONSTANT * m * self.coefficient() / (m.ln() * m.ln()) * g / (2.0 * PI)
    }
}

/// `Psi` as a function of `s = |z|^2 > 0`.
fn psi_sq(params: &WeightParams, profile: CutoffProfile, s: f64) -> f64 {
    let t = params.scale() * s;
    if t >= 1.0 {
        0.0
    } else {
        params.coefficient() * profile.eta(t) * t.ln()
    }
}

/// The weight `Psi(z)`; `z = 0` is a logarithmic pole.
pub fn psi(params: &WeightParams, profile: CutoffProfile, z: PointDisk) -> Result<f64> {
    let s = z.norm_sqr();
    if s == 0.0 {
        return Err(Error::Pole);
    }
    Ok(psi_sq(params, profile, s))
}

/// Polar sampling grid on an annulus `r_min <= |z| <= r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub radial: usize,
    pub angular: usize,
}

impl AnnulusGrid {
    /// Grid covering `t` in `[t_min, t_max]` for the given weight parameters.
    pub fn for_t_range(
        params: &WeightParams,
        t_min: f64,
        t_max: f64,
        radial: usize,
        angular: usize,
    ) -> Self {
        let k = params.scale();
        Self {
            r_min: (t_min / k).sqrt(),
            r_max: (t_max / k).sqrt(),
            radial,
            angular,
        }
    }

    /// The transition annulus `1/2 <= t <= 1`, slightly widened on both sides.
    pub fn transition(params: &WeightParams) -> Self {
        Self::for_t_range(params, 0.45, 1.05, 241, 8)
    }

    pub fn points(&self) -> impl Iterator<Item = PointDisk> + '_ {
        let nr = self.radial.max(1);
        let na = self.angular.max(1);
        (0..nr).flat_map(move |i| {
            let r = if nr == 1 {
                self.r_min
            } else {
                self.r_min + (self.r_max - self.r_min) * i as f64 / (nr - 1) as f64
            };
            (0..na).map(move |j| {
                // offset angles so no sample sits on an axis
                let theta = 2.0 * PI * (j as f64 + 0.37) / na as f64;
                PointDisk::from_polar(r, theta)
            })
        })
    }
}

/// Outcome of the Hessian lower-bound sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianCheck {
    /// smallest `d dbar Psi` seen on the grid
    pub min_observed: f64,
    /// the bound at the point of least slack
    pub bound: f64,
    /// `min over points of (d dbar Psi - bound)`
    pub min_slack: f64,
    pub points: usize,
    pub pass: bool,
}

/// Finite-difference check of `d dbar Psi >= -100 m (n + 2p') / (log m)^2 * g / (2 pi)`.
pub fn psi_hessian_bound_check(
    params: &WeightParams,
    profile: CutoffProfile,
    geom: &ModelGeometry,
    grid: &AnnulusGrid,
) -> Result<HessianCheck> {
    let m = params.m as f64;
    let pole_clearance = m.ln() / (10.0 * m.sqrt());
    if !(grid.r_min >= pole_clearance) {
        return Err(Error::Domain(format!(
            "grid radius {} is within {pole_clearance} of the pole",
            grid.r_min
        )));
    }
    if !(grid.r_max >= grid.r_min) {
        return Err(Error::InvalidInput("annulus has r_max < r_min".into()));
    }
    let h = 1e-3 * grid.r_min;
    if !geom.contains_radius(grid.r_max + h) {
        return Err(Error::Domain(format!(
            "grid radius {} leaves the model disk",
            grid.r_max
        )));
    }

    let mut check = HessianCheck {
        min_observed: f64::INFINITY,
        bound: 0.0,
        min_slack: f64::INFINITY,
        points: 0,
        pass: true,
    };
    for z in grid.points() {
        let (x, y) = (z.re(), z.im());
        let f = |dx: f64, dy: f64| {
            let (u, v) = (x + dx, y + dy);
            psi_sq(params, profile, u * u + v * v)
        };
        let ddbar =
            0.25 * (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
        let bound = params.hessian_lower_bound(geom.metric_density(z)?);
        let slack = ddbar - bound;
        check.points += 1;
        check.min_observed = check.min_observed.min(ddbar);
        if slack < check.min_slack {
            check.min_slack = slack;
            check.bound = bound;
        }
    }
    check.pass = check.min_slack >= 0.0;
    Ok(check)
}
