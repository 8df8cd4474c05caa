//! Dense complex linear-algebra helpers shared by the frame modules.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Inner products are
//! conjugate-linear in the first argument throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative cutoff below which eigenvalues count as zero.
pub const RANK_REL_TOL: f64 = 1e-12;
/// Cutoff used when the whole spectrum vanishes.
pub const RANK_ABS_FLOOR: f64 = 1e-300;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `<a, b> = sum conj(a_i) b_i`.
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &CVec) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rank threshold for a spectrum whose largest eigenvalue is `lambda_max`.
pub fn rank_threshold(lambda_max: f64) -> f64 {
    if lambda_max > 0.0 {
        RANK_REL_TOL * lambda_max
    } else {
        RANK_ABS_FLOOR
    }
}

pub fn basis_vector(d: usize, k: usize) -> CVec {
    let mut e = CVec::zeros(d);
    e[k] = ONE;
    e
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// nonincreasing order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(matrix: &CMat) -> Self {
        let n = matrix.nrows();
        assert_eq!(n, matrix.ncols(), "Hermitian eigendecomposition needs a square matrix");
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: CMat::zeros(0, 0),
            };
        }
        if is_diagonal(matrix) {
            let diag: Vec<f64> = (0..n).map(|i| matrix[(i, i)].re).collect();
            return Self::from_diagonal(&diag);
        }
        let sym = hermitian_part(matrix);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
        Self { values, vectors }
    }

    /// Exact decomposition of a real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, col| if r == order[col] { ONE } else { ZERO });
        Self { values, vectors }
    }
}

fn is_diagonal(m: &CMat) -> bool {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                return false;
            }
        }
        if m[(j, j)].im != 0.0 {
            return false;
        }
    }
    true
}

/// `(A + A*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * real(0.5)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Orthonormal basis (as columns) of the column span of `m`, cutting singular
/// values below `rel_tol` times the largest one.
pub fn orthonormal_range(m: &CMat, rel_tol: f64) -> CMat {
    let d = m.nrows();
    if m.ncols() == 0 {
        return CMat::zeros(d, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return CMat::zeros(d, 0);
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax)
        .collect();
    CMat::from_fn(d, keep.len(), |r, col| u[(r, keep[col])])
}

/// `‖A* A − I‖_F`.
pub fn orthonormality_defect(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    (g - CMat::identity(m.ncols(), m.ncols())).norm()
}

/// Solve `A x = b` for square invertible `A`.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    a.clone().lu().solve(b)
}

/// Inverse of a square matrix, `None` when numerically singular.
pub fn inverse(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return None;
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin <= 1e-13 * smax {
        return None;
    }
    a.clone().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = CMat::from_row_slice(
            3,
            3,
            &[
                real(2.0),
                c(0.5, 0.5),
                ZERO,
                c(0.5, -0.5),
                real(1.0),
                c(0.0, 0.2),
                ZERO,
                c(0.0, -0.2),
                real(3.0),
            ],
        );
        let eig = HermitianEigen::new(&m);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let lam = CMat::from_diagonal(&CVec::from_iterator(3, eig.values.iter().map(|&v| real(v))));
        let back = &eig.vectors * lam * eig.vectors.adjoint();
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn diagonal_fast_path_is_exact() {
        let eig = HermitianEigen::from_diagonal(&[0.25, 1.0, 0.5]);
        assert_eq!(eig.values, vec![1.0, 0.5, 0.25]);
        assert_eq!(eig.vectors[(1, 0)], ONE);
        assert_eq!(eig.vectors[(0, 2)], ONE);
    }

    #[test]
    fn range_of_rank_deficient_matrix() {
        let m = CMat::from_fn(4, 3, |r, col| if col == 2 { real((r + 1) as f64 * 2.0) } else if r == col { ONE } else { ZERO });
        // third column is not in the span of the first two
        assert_eq!(orthonormal_range(&m, 1e-12).ncols(), 3);
        let dup = CMat::from_fn(4, 2, |r, _| real(r as f64 + 1.0));
        let q = orthonormal_range(&dup, 1e-12);
        assert_eq!(q.ncols(), 1);
        assert!(orthonormality_defect(&q) < 1e-12);
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = CMat::from_fn(2, 2, |_, _| ONE);
        assert!(inverse(&m).is_none());
        assert!(inverse(&CMat::identity(3, 3)).is_some());
    }
}
