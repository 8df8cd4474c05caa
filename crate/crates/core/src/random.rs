//! Seeded random test objects: probe vectors, systems, unitaries.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::atoms::VectorSystem;
use crate::linalg::{real, CMat, CVec};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVec {
    CVec::from_fn(d, |_, _| gaussian(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVec {
    loop {
        let v = gaussian_vector(rng, d);
        let n = v.norm();
        if n > 1e-8 {
            return v / real(n);
        }
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary via QR with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let qr = gaussian_matrix(rng, d, d).qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U diag(s) V*` with singular values drawn uniformly from `[lo, hi]`.
pub fn conditioned_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize, lo: f64, hi: f64) -> CMat {
    let u = unitary(rng, d);
    let v = unitary(rng, d);
    let s = CMat::from_diagonal(&CVec::from_fn(d, |_, _| real(rng.random_range(lo..=hi))));
    u * s * v.adjoint()
}

/// `n` complex Gaussian atoms in `C^d`, scaled by `1/√d`.
pub fn gaussian_system<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> VectorSystem {
    let atoms = gaussian_matrix(rng, d, n) * real(1.0 / (d as f64).sqrt());
    VectorSystem::new(atoms, None, format!("gaussian(d={}, N={})", d, n)).expect("nonempty system")
}
