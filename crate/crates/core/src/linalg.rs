//! Dense complex linear algebra helpers: symplectic unit, eigenvectors from
//! the Schur form, and matrix trigonometric functions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Result, StargenError};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// `J = [[0, -I], [I, 0]]` of size `2N × 2N`.
pub fn symplectic_j(n: usize) -> CMat {
    let mut j = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = C64::new(-1.0, 0.0);
        j[(n + i, i)] = C64::new(1.0, 0.0);
    }
    j
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

pub fn from_real(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn is_real(m: &CMat, tol: f64) -> bool {
    m.iter().all(|x| x.im.abs() <= tol)
}

pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.transpose()).scale(0.5)
}

/// Largest entry of `m - mᵀ` relative to the largest entry of `m`.
pub fn asymmetry(m: &CMat) -> f64 {
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    max_abs(&(m - m.transpose())) / scale
}

/// Inverse with a relative conditioning guard.
pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    let inv = m.clone().try_inverse().ok_or_else(|| StargenError::Singular(what.to_string()))?;
    let cond = one_norm(m) * one_norm(&inv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(StargenError::Singular(format!("{what} (condition number {cond:e})")));
    }
    Ok(inv)
}

pub fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Bilinear (not sesquilinear) dot product `xᵀy`.
pub fn bilinear(x: &CVec, y: &CVec) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigenvalues and unit-norm eigenvectors (as columns).
///
/// Eigenvectors are obtained by back-substitution on the triangular Schur
/// factor. A defective eigenvalue cluster is reported as an error.
pub fn eigen_decompose(m: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = m.nrows();
    let (q, t) = m.clone().schur().unpack();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let vals: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut x = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = vals[k];
        x[(k, k)] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut num = C64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                num += t[(j, l)] * x[(l, k)];
            }
            let den = t[(j, j)] - lambda;
            if den.norm() <= tol {
                if num.norm() <= 1e-8 * scale {
                    x[(j, k)] = C64::new(0.0, 0.0);
                } else {
                    return Err(StargenError::NotDiagonalizable(format!("defective eigenvalue {lambda}")));
                }
            } else {
                x[(j, k)] = -num / den;
            }
        }
    }
    let mut v = q * x;
    for k in 0..n {
        let nrm = v.column(k).norm();
        v.column_mut(k).unscale_mut(nrm);
    }
    Ok((vals, v))
}

/// `cos(B)` and `sin(B)` for a general complex square matrix.
///
/// Uses the eigendecomposition when the eigenvector matrix has condition
/// number below `1e8`, otherwise a scaled 40-term Taylor series followed by
/// double-angle recovery.
pub fn cos_sin(b: &CMat) -> (CMat, CMat) {
    if let Ok((vals, v)) = eigen_decompose(b) {
        if let Some(vinv) = v.clone().try_inverse() {
            let cond = one_norm(&v) * one_norm(&vinv);
            if cond.is_finite() && cond < 1e8 {
                let dc = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|l| l.cos())));
                let ds = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|l| l.sin())));
                return (&v * dc * &vinv, &v * ds * &vinv);
            }
        }
    }
    cos_sin_taylor(b)
}

pub fn cos_sin_taylor(b: &CMat) -> (CMat, CMat) {
    let n = b.nrows();
    let norm = one_norm(b);
    let mut s = 0i32;
    if norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as i32;
    }
    let x = b.unscale(2f64.powi(s));
    let id = CMat::identity(n, n);
    let mut cos = id.clone();
    let mut sin = CMat::zeros(n, n);
    let mut term = id;
    for k in 1..=40usize {
        term = &term * &x / C64::new(k as f64, 0.0);
        match k % 4 {
            1 => sin += &term,
            2 => cos -= &term,
            3 => sin -= &term,
            _ => cos += &term,
        }
    }
    for _ in 0..s {
        let c2 = &cos * &cos - &sin * &sin;
        let s2 = (&sin * &cos).scale(2.0);
        cos = c2;
        sin = s2;
    }
    (cos, sin)
}
