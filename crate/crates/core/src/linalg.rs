//! Dense complex Cholesky and triangular helpers on row-major storage.

use num_complex::Complex64;

/// Leading pivot that failed to be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotFailure {
    pub pivot: usize,
    pub value: f64,
}

/// Lower-triangular `L` with `A = L L*`. Only the lower triangle of `a` is read.
pub fn cholesky(a: &[Complex64], n: usize) -> Result<Vec<Complex64>, PivotFailure> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(PivotFailure { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}

/// Solve `L L* x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &[Complex64], n: usize, b: &[Complex64]) -> Vec<Complex64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i].conj() * y[k];
        }
        y[i] = s / l[i * n + i].conj();
    }
    y
}

/// Inverse of a nonsingular lower-triangular matrix.
pub fn lower_triangular_inverse(l: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for c in 0..n {
        // forward substitution for column c of the inverse
        for i in c..n {
            let mut s = if i == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for k in c..i {
                s -= l[i * n + k] * h[k * n + c];
            }
            h[i * n + c] = s / l[i * n + i];
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn factor_and_solve() {
        // A = L0 L0* for a chosen L0
        let l0 = [c(2.0, 0.0), c(0.0, 0.0), c(1.0, -1.0), c(3.0, 0.0)];
        let n = 2;
        let mut a = vec![c(0.0, 0.0); 4];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    a[i * n + j] += l0[i * n + k] * l0[j * n + k].conj();
                }
            }
        }
        let l = cholesky(&a, n).unwrap();
        for (x, y) in l.iter().zip(&l0) {
            assert!((x - y).norm() < 1e-14);
        }
        let b = [c(1.0, 2.0), c(-1.0, 0.5)];
        let x = cholesky_solve(&l, n, &b);
        for i in 0..n {
            let ax: Complex64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            assert!((ax - b[i]).norm() < 1e-13);
        }
        let h = lower_triangular_inverse(&l, n);
        for i in 0..n {
            for j in 0..n {
                let p: Complex64 = (0..n).map(|k| h[i * n + k] * l[k * n + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p - c(e, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn indefinite_pivot() {
        let a = [c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        let f = cholesky(&a, 2).unwrap_err();
        assert_eq!(f.pivot, 1);
        assert!(f.value < 0.0);
    }
}
