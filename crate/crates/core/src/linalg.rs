//! Dense helpers for the handful of small symmetric matrices estimation
//! needs (at most 5×5). Row-major `Vec<Vec<f64>>`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

pub type Matrix = Vec<Vec<f64>>;

pub fn zeros(n: usize) -> Matrix {
    vec![vec![0.0; n]; n]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// Lower Cholesky factor of a symmetric positive definite matrix; `None`
/// when a pivot is not strictly positive.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut l = zeros(n);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        l[j][j] = sqrt(d);
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Some(l)
}

/// Cholesky-style factor of a positive semidefinite matrix: pivots at or
/// below `tol · max diagonal` yield zero columns. `None` if a pivot is
/// clearly negative.
pub fn psd_factor(a: &Matrix, tol: f64) -> Option<Matrix> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i]).fold(0.0f64, f64::max);
    let mut l = zeros(n);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d < -tol * scale.max(1.0) || !d.is_finite() {
            return None;
        }
        if d <= tol * scale {
            continue;
        }
        l[j][j] = sqrt(d);
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &Matrix) -> Option<Matrix> {
    let l = cholesky(a)?;
    let n = a.len();
    // Invert L (lower triangular), then A^{-1} = L^{-T} L^{-1}.
    let mut linv = zeros(n);
    for i in 0..n {
        linv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i][k] * linv[k][j];
            }
            linv[i][j] = s / l[i][i];
        }
    }
    let mut inv = zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i..n).map(|k| linv[k][i] * linv[k][j]).sum();
            inv[i][j] = s;
            inv[j][i] = s;
        }
    }
    Some(inv)
}

pub fn mat_vec(a: &Matrix, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// `J A Jᵀ`.
pub fn sandwich(j: &Matrix, a: &Matrix) -> Matrix {
    let n = j.len();
    let m = a.len();
    let mut ja = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..m {
            ja[i][k] = (0..m).map(|l| j[i][l] * a[l][k]).sum();
        }
    }
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            out[i][k] = (0..m).map(|l| ja[i][l] * j[k][l]).sum();
        }
    }
    out
}
