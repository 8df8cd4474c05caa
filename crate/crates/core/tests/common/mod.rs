//! Deliberately naive reference implementations: nested loops over plain
//! `Vec`s and a cyclic Jacobi eigensolver on the real 2n x 2n embedding of a
//! Hermitian matrix. Nothing here calls into nalgebra's decompositions.

#![allow(dead_code)]

use num_complex::Complex64;
use semiframe::linalg::CMat;
use semiframe::VectorSystem;

pub type Dense = Vec<Vec<Complex64>>;

/// Weighted atoms `v_k ψ_k` as plain columns.
pub fn columns(sys: &VectorSystem) -> Vec<Vec<Complex64>> {
    (0..sys.len())
        .map(|k| {
            let v = sys.weight(k);
            (0..sys.dim()).map(|i| sys.atoms()[(i, k)] * v).collect()
        })
        .collect()
}

/// `S_ij = Σ_k ψ_k[i] conj(ψ_k[j])`.
pub fn frame_operator(cols: &[Vec<Complex64>]) -> Dense {
    let d = cols[0].len();
    let mut s = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for col in cols {
        for i in 0..d {
            for j in 0..d {
                s[i][j] += col[i] * col[j].conj();
            }
        }
    }
    s
}

/// `G_kl = ⟨ψ_k, ψ_l⟩ = Σ_i conj(ψ_k[i]) ψ_l[i]`.
pub fn gram(cols: &[Vec<Complex64>]) -> Dense {
    let n = cols.len();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for k in 0..n {
        for l in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, y) in cols[k].iter().zip(&cols[l]) {
                acc += x.conj() * y;
            }
            g[k][l] = acc;
        }
    }
    g
}

/// Eigenvalues (descending) and the real embedding's eigenvectors, via
/// cyclic Jacobi on `[[A, -B], [B, A]]` for `H = A + iB`. Every eigenvalue
/// of `H` appears twice.
pub struct Jacobi {
    pub n: usize,
    pub values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

pub fn jacobi(h: &Dense) -> Jacobi {
    let n = h.len();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = h[i][j].re;
            a[i + n][j + n] = h[i][j].re;
            a[i][j + n] = -h[i][j].im;
            a[i + n][j] = h[i][j].im;
        }
    }
    let mut v = vec![vec![0.0; m]; m];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (row_p, row_q) = (a[p].clone(), a[q].clone());
                for k in 0..m {
                    a[p][k] = c * row_p[k] - s * row_q[k];
                    a[q][k] = s * row_p[k] + c * row_q[k];
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..m).map(|r| v[r][i]).collect()).collect();
    Jacobi { n, values, vectors }
}

impl Jacobi {
    /// Distinct eigenvalues of `H`, descending (one of each embedded pair).
    pub fn hermitian_values(&self) -> Vec<f64> {
        self.values.iter().step_by(2).copied().collect()
    }

    pub fn threshold(&self) -> f64 {
        (1e-12 * self.values[0].max(0.0)).max(1e-300)
    }

    pub fn rank(&self) -> usize {
        let t = self.threshold();
        self.hermitian_values().iter().filter(|&&x| x > t).count()
    }

    /// Projection onto the span of eigenvectors above the rank threshold,
    /// read back from the real embedding `[[Re P, -Im P], [Im P, Re P]]`.
    pub fn range_projector(&self) -> Dense {
        let n = self.n;
        let t = self.threshold();
        let mut p = vec![vec![0.0; 2 * n]; 2 * n];
        for (k, &lam) in self.values.iter().enumerate() {
            if lam <= t {
                continue;
            }
            let w = &self.vectors[k];
            for i in 0..2 * n {
                for j in 0..2 * n {
                    p[i][j] += w[i] * w[j];
                }
            }
        }
        (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(p[i][j], p[i + n][j])).collect())
            .collect()
    }
}

/// Numerical rank by Gram-Schmidt with column pivoting.
pub fn pivoted_rank(cols: &[Vec<Complex64>], rel_tol: f64) -> usize {
    let mut work: Vec<Vec<Complex64>> = cols.to_vec();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let largest = work.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut rank = 0;
    while !work.is_empty() {
        let (idx, best) = work
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm(c)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if best <= rel_tol * largest {
            break;
        }
        let q: Vec<Complex64> = work.swap_remove(idx).iter().map(|z| z / best).collect();
        for c in work.iter_mut() {
            let mut proj = Complex64::new(0.0, 0.0);
            for i in 0..q.len() {
                proj += q[i].conj() * c[i];
            }
            for i in 0..q.len() {
                c[i] -= proj * q[i];
            }
        }
        rank += 1;
    }
    rank
}

/// `max_ij |a_ij − b_ij|`.
pub fn max_diff(a: &CMat, b: &Dense) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in b.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            worst = worst.max((a[(i, j)] - z).norm());
        }
    }
    worst
}

pub fn max_abs(b: &Dense) -> f64 {
    b.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

