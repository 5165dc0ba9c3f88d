//! Dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    DMatrix::zeros(rows, cols)
}

pub fn from_real(rows: &[Vec<f64>]) -> CMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    DMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Ascending eigenpairs; column `i` of the matrix belongs to eigenvalue `i`.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    if h.nrows() == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.nrows(), h.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    max_abs(&(h - h.adjoint()))
}

/// Lower Cholesky factor L with G = L·L†.
pub fn cholesky(g: &CMatrix, degree: i32) -> Result<CMatrix> {
    if g.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    // nalgebra's complex Cholesky can return NaN pivots instead of failing.
    let factor = g.clone().cholesky().map(|c| c.l()).filter(|l| {
        l.diagonal().iter().all(|d| d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-12 * d.re)
    });
    match factor {
        Some(l) => Ok(l),
        None => Err(Error::GramNotPositive {
            degree,
            min_eigenvalue: hermitian_eigenvalues(g).first().copied().unwrap_or(f64::NAN),
        }),
    }
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &CMatrix) -> CMatrix {
    let n = l.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let mut inv = CMatrix::identity(n, n);
    // Triangular solve cannot fail for a nonsingular Cholesky factor.
    l.solve_lower_triangular_mut(&mut inv);
    inv
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Copy `src` into `dst` at (row, col).
pub fn place(dst: &mut CMatrix, row: usize, col: usize, src: &CMatrix) {
    if src.nrows() == 0 || src.ncols() == 0 {
        return;
    }
    dst.view_mut((row, col), (src.nrows(), src.ncols())).copy_from(src);
}

/// 2-norm condition number estimate of a Hermitian positive matrix.
pub fn condition_number(g: &CMatrix) -> f64 {
    let ev = hermitian_eigenvalues(g);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}
