// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Thin dense helpers over `faer` shared by the solvers.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn eigen(a: MatRef<'_, Complex64>) -> Result<(Vec<Complex64>, CMat)> {
    let evd = a
        .eigen()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<Complex64> = (0..a.nrows()).map(|i| s[i]).collect();
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Decomposition("non-finite eigenvalue".into()));
    }
    Ok((values, evd.U().to_owned()))
}

pub fn eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<Complex64>> {
    a.eigenvalues()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))
}

pub fn inverse(a: MatRef<'_, Complex64>) -> CMat {
    a.partial_piv_lu().inverse()
}

/// Maximum absolute column sum.
pub fn norm_one(a: MatRef<'_, Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: MatRef<'_, Complex64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn adjoint(a: MatRef<'_, Complex64>) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn matvec(a: MatRef<'_, Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.ncols(), x.len());
    let mut y = vec![ZERO; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

pub fn outer(a: &[Complex64], b: &[Complex64]) -> CMat {
    Mat::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

/// `dst += alpha * (a ⊗ b)`, skipping structural zeros of `a`.
pub fn add_kron(dst: &mut CMat, alpha: Complex64, a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) {
    let (rb, cb) = (b.nrows(), b.ncols());
    for ja in 0..a.ncols() {
        for ia in 0..a.nrows() {
            let aij = a[(ia, ja)];
            if aij == ZERO {
                continue;
            }
            let s = alpha * aij;
            for jb in 0..cb {
                for ib in 0..rb {
                    let bij = b[(ib, jb)];
                    if bij != ZERO {
                        dst[(ia * rb + ib, ja * cb + jb)] += s * bij;
                    }
                }
            }
        }
    }
}

/// Column-stacking vectorization: `vec(A)[i + j*n] = A[i, j]`.
pub fn vectorize(a: MatRef<'_, Complex64>) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(a.nrows() * a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            v.push(a[(i, j)]);
        }
    }
    v
}

pub fn unvectorize(v: &[Complex64], n: usize) -> CMat {
    assert_eq!(v.len(), n * n);
    Mat::from_fn(n, n, |i, j| v[i + j * n])
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_matches_definition() {
        let a = Mat::from_fn(2, 2, |i, j| Complex64::new((i + 2 * j) as f64, 1.0));
        let b = Mat::from_fn(3, 3, |i, j| Complex64::new(1.0, (i * j) as f64));
        let mut k = Mat::zeros(6, 6);
        add_kron(&mut k, ONE, a.as_ref(), b.as_ref());
        for ia in 0..2 {
            for ja in 0..2 {
                for ib in 0..3 {
                    for jb in 0..3 {
                        assert_eq!(k[(ia * 3 + ib, ja * 3 + jb)], a[(ia, ja)] * b[(ib, jb)]);
                    }
                }
            }
        }
    }

    #[test]
    fn vectorization_is_column_major() {
        let a = Mat::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64));
        let v = vectorize(a.as_ref());
        assert_eq!(v[1 + 2 * 3], Complex64::new(1.0, 2.0));
        assert_eq!(unvectorize(&v, 3), a);
    }

    #[test]
    fn inverse_of_diagonal() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { Complex64::new(2.0, 0.0) } else { ZERO });
        let inv = inverse(a.as_ref());
        assert!((inv[(1, 1)] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }
}
