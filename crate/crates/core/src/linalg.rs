//! Small linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signature `(p, q)` of the indefinite form `I_{p,q} = diag(1,…,1,-1,…,-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Self {
        Signature { p, q }
    }

    pub fn positive(d: usize) -> Self {
        Signature { p: d, q: 0 }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal of `I_{p,q}`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut v = vec![1.0; self.p];
        v.extend(std::iter::repeat(-1.0).take(self.q));
        v
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(self.diagonal()))
    }

    /// `x^T I_{p,q} y` for row slices.
    #[inline]
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.p {
            s += x[k] * y[k];
        }
        for k in self.p..self.p + self.q {
            s -= x[k] * y[k];
        }
        s
    }

    /// `X I_{p,q} Y^T`.
    pub fn gram(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
        let diag = DVector::from_vec(self.diagonal());
        let mut xs = x.clone();
        for (mut col, s) in xs.column_iter_mut().zip(diag.iter()) {
            col *= *s;
        }
        xs * y.transpose()
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| a[(i, j)]);
    let eig = m.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let values = (0..n).map(|i| s.read(i)).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u.read(i, j));
    (values, vectors)
}

/// Moore–Penrose pseudoinverse; singular values at or below
/// `rel_tol * max_singular_value` are treated as zero.
pub fn pinv(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = rel_tol * smax;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (vt.row(k).transpose() / s) * u.column(k).transpose();
        }
    }
    out
}

pub fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Row `i` of a column-major matrix as an owned vector.
pub fn row_vec(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    (0..m.ncols()).map(|c| m[(i, c)]).collect()
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| row_vec(m, i)).collect()
}

pub fn from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Rows of `m` selected by `idx`, in order.
pub fn select_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
}

/// `[a; b]`.
pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::Dimension(format!(
            "cannot stack {} and {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    let n = a.nrows() + b.nrows();
    Ok(DMatrix::from_fn(n, a.ncols(), |i, j| {
        if i < a.nrows() {
            a[(i, j)]
        } else {
            b[(i - a.nrows(), j)]
        }
    }))
}

pub fn is_symmetric(a: &DMatrix<f64>, tol: f64) -> bool {
    a.is_square()
        && (0..a.nrows()).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::assert_close;

    mod approx_eq {
        macro_rules! assert_close {
            ($a:expr, $b:expr, $tol:expr) => {
                assert!(($a - $b).abs() <= $tol, "{} vs {}", $a, $b)
            };
        }
        pub(crate) use assert_close;
    }

    #[test]
    fn signature_form_matches_gram() {
        let s = Signature::new(1, 1);
        let x = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.1, 0.3]);
        let g = s.gram(&x, &x);
        assert_close!(g[(0, 0)], 0.25 - 0.04, 1e-15);
        assert_close!(g[(0, 1)], s.form(&[0.5, 0.2], &[0.1, 0.3]), 1e-15);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 3.0]);
        let (vals, vecs) = symmetric_eigen(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let recon = &vecs * DMatrix::from_diagonal(&DVector::from_vec(vals)) * vecs.transpose();
        assert!((recon - a).abs().max() < 1e-12);
    }

    #[test]
    fn pinv_of_singular_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pinv(&a, 1e-10);
        assert!((&a * &p * &a - &a).abs().max() < 1e-12);
        assert_close!(p[(0, 0)], 0.25, 1e-12);
    }
}
