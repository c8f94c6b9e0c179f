//! Small dense linear algebra in `f64`.
//!
//! Boundary systems here are at most a couple of dozen unknowns, so plain
//! row-major `Vec<Vec<f64>>` with partial-pivot LU is all that is needed.
//! Singular-value queries go through nalgebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<f64>>;

/// LU factorization with partial pivoting: `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

impl Lu {
    pub fn new(m: &[Vec<f64>]) -> Result<Self> {
        let n = m.len();
        if m.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("LU of a non-square matrix".into()));
        }
        let scale = max_abs(m);
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::SingularSystem);
        }
        let cutoff = scale * f64::EPSILON * n as f64;
        let mut lu = m.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| lu[i][col].abs().total_cmp(&lu[j][col].abs()))
                .unwrap();
            if lu[piv][col].abs() <= cutoff {
                return Err(Error::SingularSystem);
            }
            if piv != col {
                lu.swap(piv, col);
                perm.swap(piv, col);
                sign = -sign;
            }
            for r in col + 1..n {
                let f = lu[r][col] / lu[col][col];
                lu[r][col] = f;
                for c in col + 1..n {
                    lu[r][c] -= f * lu[col][c];
                }
            }
        }
        Ok(Lu { n, lu, perm, sign })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] -= self.lu[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r][c] * x[c];
            }
            x[r] /= self.lu[r][r];
        }
        x
    }

    pub fn det(&self) -> f64 {
        (0..self.n).fold(self.sign, |acc, i| acc * self.lu[i][i])
    }
}

pub fn solve(m: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    Ok(Lu::new(m)?.solve(b))
}

/// Determinant via partial-pivot elimination; exactly zero when a pivot
/// column vanishes.
pub fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

pub fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols, |i, j| m[i][j])
}

/// Singular values in decreasing order.
pub fn singular_values(m: &[Vec<f64>]) -> Vec<f64> {
    let mut sv: Vec<f64> = to_dmatrix(m).singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `sigma_min / sigma_max` of a square matrix (0 for the zero matrix).
pub fn singular_value_ratio(m: &[Vec<f64>]) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

/// Orthogonal projector onto the null space of `c` (an `m x n` matrix with
/// `m < n` in our uses). Singular values below `rel_tol * sigma_max` count
/// as zero.
pub fn null_space_projector(c: &[Vec<f64>], n: usize, rel_tol: f64) -> Matrix {
    let mut p: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if c.is_empty() {
        return p;
    }
    let svd = to_dmatrix(c).svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= rel_tol * sigma_max || sigma == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                p[i][j] -= v_t[(k, i)] * v_t[(k, j)];
            }
        }
    }
    p
}

/// Least-squares residual norm `min_x |A x - b|` (A is tall).
pub fn least_squares_residual(a: &[Vec<f64>], b: &[f64]) -> f64 {
    let am = to_dmatrix(a);
    let bm = nalgebra::DVector::from_column_slice(b);
    let svd = am.clone().svd(true, true);
    let x = svd
        .solve(&bm, 1e-13)
        .expect("SVD with U and V^T always solves");
    (am * x - bm).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_with_pivoting() {
        let m = vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ];
        let b = vec![5.0, 3.0, 6.0];
        let x = solve(&m, &b).unwrap();
        let back = mat_vec(&m, &x);
        for (u, v) in back.iter().zip(&b) {
            assert_relative_eq!(u, v, epsilon = 1e-14);
        }
        assert_relative_eq!(Lu::new(&m).unwrap().det(), det(&m), epsilon = 1e-14);
        assert_relative_eq!(det(&m), -5.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(Lu::new(&m), Err(Error::SingularSystem)));
        assert_eq!(det(&m), 0.0);
        assert!(singular_value_ratio(&m) < 1e-15);
    }

    #[test]
    fn projector_annihilates_constraints() {
        let c = vec![vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]];
        let p = null_space_projector(&c, 4, 1e-12);
        let z = vec![0.3, -0.7, 0.2, 0.9];
        let x = mat_vec(&p, &z);
        for r in mat_vec(&c, &x) {
            assert!(r.abs() < 1e-14);
        }
        // idempotent
        let xx = mat_vec(&p, &x);
        for (u, v) in x.iter().zip(&xx) {
            assert_relative_eq!(u, v, epsilon = 1e-14);
        }
    }

    #[test]
    fn least_squares_of_consistent_system_is_zero() {
        let a = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        assert!(least_squares_residual(&a, &[1.0, 3.0, 5.0]) < 1e-12);
        assert!(least_squares_residual(&a, &[1.0, 3.0, 6.0]) > 0.1);
    }
}
