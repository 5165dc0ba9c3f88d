//! Exact rational helpers: Beta-type moments and LDLᵀ factorization.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::rat_to_f64;

pub type RatMatrix = Vec<Vec<BigRational>>;

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// ∫₀^∞ x^α (1+x)^(−e) dx = α!(e−α−2)!/(e−1)! for e ≥ α + 2.
pub fn moment(alpha: usize, e: usize) -> Option<BigRational> {
    if e < alpha + 2 {
        return None;
    }
    Some(BigRational::new(
        factorial(alpha) * factorial(e - alpha - 2),
        factorial(e - 1),
    ))
}

pub fn zeros(rows: usize, cols: usize) -> RatMatrix {
    vec![vec![BigRational::zero(); cols]; rows]
}

/// Symmetric G = L·diag(d)·Lᵀ with L unit lower triangular.
/// Returns `None` if a pivot is not strictly positive.
pub fn ldl(g: &RatMatrix) -> Option<(RatMatrix, Vec<BigRational>)> {
    let n = g.len();
    let mut l = zeros(n, n);
    let mut d = vec![BigRational::zero(); n];
    for j in 0..n {
        let mut dj = g[j][j].clone();
        for k in 0..j {
            dj -= &l[j][k] * &l[j][k] * &d[k];
        }
        if dj <= BigRational::zero() {
            return None;
        }
        l[j][j] = BigRational::one();
        for i in (j + 1)..n {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s -= &l[i][k] * &l[j][k] * &d[k];
            }
            l[i][j] = s / &dj;
        }
        d[j] = dj;
    }
    Some((l, d))
}

/// Inverse of a unit lower triangular matrix.
pub fn unit_lower_inverse(l: &RatMatrix) -> RatMatrix {
    let n = l.len();
    let mut inv = zeros(n, n);
    for j in 0..n {
        inv[j][j] = BigRational::one();
        for i in (j + 1)..n {
            let mut s = BigRational::zero();
            for k in j..i {
                s -= &l[i][k] * &inv[k][j];
            }
            inv[i][j] = s;
        }
    }
    inv
}

pub fn matmul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

pub fn transpose(a: &RatMatrix) -> RatMatrix {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn to_f64(a: &RatMatrix) -> Vec<Vec<f64>> {
    a.iter().map(|row| row.iter().map(rat_to_f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn moment_matches_beta_values() {
        // ∫ (1+x)^-2 = 1, ∫ x (1+x)^-4 = 1/6
        assert_eq!(moment(0, 2).unwrap(), rat(1));
        assert_eq!(moment(1, 4).unwrap(), BigRational::new(1.into(), 6.into()));
        assert!(moment(3, 4).is_none());
    }

    #[test]
    fn ldl_reconstructs_hilbert_matrix() {
        let n = 5;
        let g: RatMatrix = (0..n)
            .map(|i| (0..n).map(|j| BigRational::new(1.into(), ((i + j + 1) as i64).into())).collect())
            .collect();
        let (l, d) = ldl(&g).unwrap();
        let dl: RatMatrix = (0..n)
            .map(|i| (0..n).map(|j| &l[i][j] * &d[j]).collect())
            .collect();
        assert_eq!(matmul(&dl, &transpose(&l)), g);
        let inv = unit_lower_inverse(&l);
        let id = matmul(&inv, &l);
        for (i, row) in id.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { rat(1) } else { rat(0) });
            }
        }
    }

    #[test]
    fn ldl_rejects_indefinite() {
        let g = vec![vec![rat(1), rat(2)], vec![rat(2), rat(1)]];
        assert!(ldl(&g).is_none());
    }
}
