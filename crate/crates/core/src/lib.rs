//! Numerical laboratory for the Bergman density of constant scalar curvature
//! Riemann surfaces.
//!
//! The pieces, bottom-up:
//!
//! * [`geometry`]: the local metric `g` and bundle weight `a` of curvature `rho`,
//!   with finite-difference residuals of their defining equations;
//! * [`cutoff`]: cut-off profiles `eta` and the peak-section weight `Psi`;
//! * [`moments`]: radial moments `lambda_p^-2` by certified quadrature and in
//!   closed form;
//! * [`gram`]: the bordered Gram matrix and three routes to `(F^-1)_00`;
//! * [`density`]: the density `I_00 lambda_0^2` against `m + rho/2`, and the
//!   exact sphere model;
//! * [`harness`] and [`verify`]: the command-line front end and its check suites.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoff;
pub mod density;
pub mod error;
pub mod geometry;
pub mod gram;
pub mod harness;
mod linalg;
pub mod moments;
pub mod quadrature;
pub mod report;
pub mod verify;

pub use cutoff::{CutoffProfile, WeightParams};
pub use density::{
    cp1_density, density_estimate, expansion_reference, remainder_sweep, DensityReport, SweepResult,
};
pub use error::{Error, Result};
pub use geometry::{ModelGeometry, PointDisk, ScalarCurvature};
pub use gram::{
    assemble_truncated_gram, inverse00_oracle, orthonormalize_i00, schur_i00, BorderedGram,
    ErrorBudget,
};
pub use moments::{lambda0_closed_form, lambda_inv_sq, monomial_moment, RadialMoment};
pub use quadrature::QuadratureConfig;

pub use num_complex;
