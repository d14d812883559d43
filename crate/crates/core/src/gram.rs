//! Bordered Gram matrices and the corner entry of their inverse.
//!
//! For a basis `S_0, S_1, T_1, ..., T_k` with `S_0(x0) != 0` and every other
//! section vanishing at `x0`, the density at `x0` is
//! `(F^-1)_00 * ||S_0(x0)||^2` where `F_ij = (S_i, S_j)`. Three routes to
//! `I_00 = (F^-1)_00` are provided:
//!
//! * [`schur_i00`]: bordering by the corner entry,
//!   `I_00 = 1/F_00 + (1/F_00)^2 b Mt^-1 b*` with `Mt = D - b* b / F_00`;
//! * [`orthonormalize_i00`]: `F = G G*`, `H = G^-1`, `I_00 = sum_i |H_i0|^2`;
//! * [`inverse00_oracle`]: a dense LU solve through `nalgebra`.
//!
//! The peak sections differ from their truncated model by a correction that
//! is not computed here. Its effect on each entry is carried as a budget, and
//! [`schur_i00`] propagates the budgets to first order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ModelGeometry;
use crate::linalg::{cholesky, cholesky_solve, lower_triangular_inverse, PivotFailure};
use crate::moments::{monomial_moment, truncation_radius};
use crate::quadrature::QuadratureConfig;

/// Entry budget `C * exp(-(log m)^2 / 8)` for the peak-section rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub constant: f64,
}

impl ErrorBudget {
    pub fn new(constant: f64) -> Result<Self> {
        if !(constant >= 0.0 && constant.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "budget constant must be finite and nonnegative, got {constant}"
            )));
        }
        Ok(Self { constant })
    }

    pub fn zero() -> Self {
        Self { constant: 0.0 }
    }

    pub fn scale_at(&self, m: f64) -> f64 {
        if self.constant == 0.0 {
            return 0.0;
        }
        let l = m.ln();
        self.constant * (-l * l / 8.0).exp()
    }
}

/// Hermitian Gram matrix with per-entry budgets, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GramFile", into = "GramFile")]
pub struct BorderedGram {
    dim: usize,
    entries: Vec<Complex64>,
    budgets: Vec<f64>,
    degrees: Vec<u32>,
}

/// On-disk form: entries as `[re, im]` pairs, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GramFile {
    dim: usize,
    entries: Vec<[f64; 2]>,
    budgets: Vec<f64>,
    #[serde(default)]
    degrees: Vec<u32>,
}

impl TryFrom<GramFile> for BorderedGram {
    type Error = Error;

    fn try_from(f: GramFile) -> Result<Self> {
        let entries = f
            .entries
            .iter()
            .map(|e| Complex64::new(e[0], e[1]))
            .collect();
        let mut g = BorderedGram::from_entries(f.dim, entries, f.budgets)?;
        g.degrees = f.degrees;
        Ok(g)
    }
}

impl From<BorderedGram> for GramFile {
    fn from(g: BorderedGram) -> Self {
        GramFile {
            dim: g.dim,
            entries: g.entries.iter().map(|e| [e.re, e.im]).collect(),
            budgets: g.budgets,
            degrees: g.degrees,
        }
    }
}

impl BorderedGram {
    /// Validates shape, exact Hermitian symmetry and budgets.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>, budgets: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!(
                "Gram dimension must be at least 2, got {dim}"
            )));
        }
        if entries.len() != dim * dim || budgets.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries and budgets, got {} and {}",
                dim * dim,
                entries.len(),
                budgets.len()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let (e, t) = (entries[i * dim + j], entries[j * dim + i]);
                if !(e.re.is_finite() && e.im.is_finite()) || e != t.conj() {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i}, {j}) breaks Hermitian symmetry"
                    )));
                }
                let (b, bt) = (budgets[i * dim + j], budgets[j * dim + i]);
                if !(b >= 0.0 && b.is_finite()) || b != bt {
                    return Err(Error::InvalidInput(format!(
                        "budget ({i}, {j}) must be finite, nonnegative and symmetric"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            entries,
            budgets,
            degrees: Vec::new(),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self::from_entries(dim, entries, vec![0.0; dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn budget(&self, i: usize, j: usize) -> f64 {
        self.budgets[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    /// Monomial degree of each basis section, when assembled from the model.
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Set the budget of entries `(i, j)` and `(j, i)`.
    pub fn set_budget(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "budget must be finite and nonnegative, got {value}"
            )));
        }
        let n = self.dim;
        self.budgets[i * n + j] = value;
        self.budgets[j * n + i] = value;
        Ok(())
    }

    /// Whether the trailing `(dim - 2)` block is exactly the identity.
    pub fn has_identity_tail(&self) -> bool {
        (2..self.dim).all(|i| {
            (2..self.dim).all(|j| {
                let e = if i == j { 1.0 } else { 0.0 };
                self.entry(i, j) == Complex64::new(e, 0.0)
            })
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Gram matrix of the normalized truncated sections `lambda_d z^d` on the
/// disk `|z| <= log m / sqrt(m)`, for degrees `0, 1` followed by `extra_degrees`.
///
/// The trailing sections play the role of an orthonormal basis of sections
/// vanishing to second order at the base point, so every extra degree must
/// be at least 2. Budgets of size `budget.scale_at(m)` sit on rows and
/// columns 0 and 1; the trailing block has none.
pub fn assemble_truncated_gram(
    geom: &ModelGeometry,
    m: u64,
    extra_degrees: &[u32],
    budget: ErrorBudget,
    cfg: &QuadratureConfig,
) -> Result<BorderedGram> {
    let mut degrees = vec![0u32, 1];
    for &d in extra_degrees {
        if d < 2 {
            return Err(Error::InvalidInput(format!(
                "extra degree {d} must be at least 2"
            )));
        }
        if degrees.contains(&d) {
            return Err(Error::InvalidInput(format!("degree {d} appears twice")));
        }
        degrees.push(d);
    }
    let radius = truncation_radius(m);
    let norms = degrees
        .iter()
        .map(|&d| monomial_moment(geom, m, d, d, radius, cfg).map(|c| c.re))
        .collect::<Result<Vec<_>>>()?;

    let n = degrees.len();
    let scale = budget.scale_at(m as f64);
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    let mut budgets = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                let raw = monomial_moment(geom, m, degrees[i], degrees[j], radius, cfg)?;
                raw / (norms[i].sqrt() * norms[j].sqrt())
            };
            if i < 2 || j < 2 {
                budgets[i * n + j] = scale;
            }
        }
    }
    let mut g = BorderedGram::from_entries(n, entries, budgets)?;
    g.degrees = degrees;
    Ok(g)
}

/// `I_00` from the bordering formula, with a first-order budget interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchurExtraction {
    pub value: f64,
    /// `value - 1`, evaluated without cancellation
    pub excess: f64,
    pub spread: f64,
    pub interval: (f64, f64),
}

fn classify(f: PivotFailure, scale: f64) -> Error {
    if f.value.abs() <= 1e-13 * scale {
        Error::Singular {
            pivot: f.pivot + 1,
            value: f.value,
        }
    } else {
        Error::NotPositiveDefinite {
            pivot: f.pivot + 1,
            value: f.value,
        }
    }
}

pub fn schur_i00(g: &BorderedGram) -> Result<SchurExtraction> {
    let n = g.dim();
    let a = g.entry(0, 0).re;
    if !(a > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: 0, value: a });
    }
    let k = n - 1;
    let b: Vec<Complex64> = (1..n).map(|j| g.entry(0, j)).collect();
    let mut reduced = vec![Complex64::new(0.0, 0.0); k * k];
    let mut diag_scale = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            reduced[i * k + j] = g.entry(i + 1, j + 1) - b[i].conj() * b[j] / a;
        }
        diag_scale = diag_scale.max(g.entry(i + 1, i + 1).re.abs());
    }
    let l = cholesky(&reduced, k).map_err(|f| classify(f, diag_scale))?;
    let b_adj: Vec<Complex64> = b.iter().map(|x| x.conj()).collect();
    let w = cholesky_solve(&l, k, &b_adj);
    let quad: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum::<Complex64>().re;

    let inv_a = 1.0 / a;
    let value = inv_a + inv_a * inv_a * quad;
    let excess = (1.0 - a) * inv_a + inv_a * inv_a * quad;

    // row 0 of F^-1 is [I_00, -w* / a]; dI_00 / dF_jk = -(F^-1)_0j (F^-1)_k0
    let row: Vec<f64> = std::iter::once(value.abs())
        .chain(w.iter().map(|x| x.norm() * inv_a))
        .collect();
    let mut spread = 0.0;
    for i in 0..n {
        for j in 0..n {
            spread += g.budget(i, j) * row[i] * row[j];
        }
    }
    Ok(SchurExtraction {
        value,
        excess,
        spread,
        interval: (value - spread, value + spread),
    })
}

/// `(F^-1)_00` by a dense LU solve in `nalgebra`, after a Hermitian
/// eigenvalue check for positive definiteness.
pub fn inverse00_oracle(g: &BorderedGram) -> Result<f64> {
    let n = g.dim();
    let f = DMatrix::from_row_slice(n, n, g.entries());
    let eigen = f.clone().symmetric_eigen();
    let (pivot, lowest) = eigen
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("dimension is at least 2");
    if !(lowest > 0.0) {
        return Err(Error::NotPositiveDefinite {
            pivot,
            value: lowest,
        });
    }
    let mut e0 = DMatrix::zeros(n, 1);
    e0[(0, 0)] = Complex64::new(1.0, 0.0);
    let x = f.lu().solve(&e0).ok_or(Error::Singular {
        pivot: 0,
        value: 0.0,
    })?;
    Ok(x[(0, 0)].re)
}

/// `sum_i |H_i0|^2` with `H = G^-1` and `F = G G*` the Cholesky factorization.
pub fn orthonormalize_i00(g: &BorderedGram) -> Result<f64> {
    let n = g.dim();
    let factor = cholesky(g.entries(), n).map_err(|f| Error::NotPositiveDefinite {
        pivot: f.pivot,
        value: f.value,
    })?;
    let h = lower_triangular_inverse(&factor, n);
    Ok((0..n).map(|i| h[i * n].norm_sqr()).sum())
}
