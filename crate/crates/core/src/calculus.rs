//! Analysis, synthesis, frame and Gram operators, optimal bounds, canonical
//! duals and the reproducing kernel of a finite vector system.
//!
//! With `A` the synthesis matrix (column `k` equal to `v_k ψ_k`):
//!
//! * analysis `C = A*`, so `(Cf)_k = v_k ⟨ψ_k, f⟩`;
//! * synthesis `D = A`;
//! * frame operator `S = DC = A A*`;
//! * Gram operator `G = CD = A* A`.
//!
//! Inverses act on the range only: eigenvalues below
//! [`rank_threshold`](crate::linalg::rank_threshold) are treated as exact
//! zeros.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atoms::VectorSystem;
use crate::error::{FrameError, Result};
use crate::linalg::{rank_threshold, real, CMat, CVec, HermitianEigen};

/// Fractional powers whose scalar factor exceeds this value are refused.
pub const OVERFLOW_GUARD: f64 = 1e150;

/// Eigendecomposition-backed record of a positive semidefinite operator.
#[derive(Debug, Clone)]
pub struct SpectralFrameData {
    operator: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
    rank: usize,
    rank_threshold: f64,
}

impl SpectralFrameData {
    pub fn from_operator(operator: CMat) -> Self {
        let eig = HermitianEigen::new(&operator);
        Self::from_eigen(operator, eig)
    }

    /// Diagonal operator `diag(values)`, decomposed exactly.
    pub fn from_diagonal(values: &[f64]) -> Self {
        let operator = CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|&v| real(v))));
        Self::from_eigen(operator, HermitianEigen::from_diagonal(values))
    }

    fn from_eigen(operator: CMat, eig: HermitianEigen) -> Self {
        let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        let threshold = rank_threshold(lambda_max);
        let eigenvalues: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
        let rank = eigenvalues.iter().filter(|&&v| v > threshold).count();
        Self {
            operator,
            eigenvalues,
            eigenvectors: eig.vectors,
            rank,
            rank_threshold: threshold,
        }
    }

    pub fn operator(&self) -> &CMat {
        &self.operator
    }

    /// Nonincreasing, clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_threshold(&self) -> f64 {
        self.rank_threshold
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_total(&self) -> bool {
        self.rank == self.dim()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Smallest eigenvalue above the rank threshold (0 when the operator vanishes).
    pub fn lambda_min_nonzero(&self) -> f64 {
        if self.rank == 0 {
            0.0
        } else {
            self.eigenvalues[self.rank - 1]
        }
    }

    /// Coordinates of `f` in the eigenbasis.
    pub fn coordinates(&self, f: &CVec) -> CVec {
        self.eigenvectors.adjoint() * f
    }

    /// Norm of the component of `f` on the (numerical) kernel.
    pub fn kernel_component(&self, f: &CVec) -> f64 {
        let coords = self.coordinates(f);
        coords.iter().skip(self.rank).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn scalar_power(&self, i: usize, p: f64) -> f64 {
        if p == 0.0 {
            1.0
        } else if i < self.rank {
            self.eigenvalues[i].powf(p)
        } else {
            0.0
        }
    }

    /// `S^p f` with kernel directions sent to zero for `p ≠ 0`.
    pub fn apply_power(&self, f: &CVec, p: f64) -> Result<CVec> {
        let mut coords = self.coordinates(f);
        for i in 0..coords.len() {
            if coords[i].norm() == 0.0 {
                continue;
            }
            let s = self.scalar_power(i, p);
            if s.is_nan() || s > OVERFLOW_GUARD {
                return Err(FrameError::DomainViolation(format!(
                    "λ^{} = {:.3e} exceeds the overflow guard",
                    p, s
                )));
            }
            coords[i] *= s;
        }
        Ok(&self.eigenvectors * coords)
    }

    /// `⟨f, S^p f⟩`.
    pub fn quadratic_power(&self, f: &CVec, p: f64) -> Result<f64> {
        let coords = self.coordinates(f);
        let mut acc = 0.0;
        for (i, z) in coords.iter().enumerate() {
            if z.norm() == 0.0 {
                continue;
            }
            let s = self.scalar_power(i, p);
            if s.is_nan() || s > OVERFLOW_GUARD {
                return Err(FrameError::DomainViolation(format!(
                    "λ^{} = {:.3e} exceeds the overflow guard",
                    p, s
                )));
            }
            acc += s * z.norm_sqr();
        }
        Ok(acc)
    }

    /// Matrix of `S^p` (pseudo-inverse convention for `p < 0`).
    pub fn power_matrix(&self, p: f64) -> Result<CMat> {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for i in 0..n {
            let s = self.scalar_power(i, p);
            if s.is_nan() || s > OVERFLOW_GUARD {
                return Err(FrameError::DomainViolation(format!(
                    "λ^{} = {:.3e} exceeds the overflow guard",
                    p, s
                )));
            }
            for r in 0..n {
                scaled[(r, i)] *= s;
            }
        }
        Ok(scaled * self.eigenvectors.adjoint())
    }

    /// Moore–Penrose pseudo-inverse.
    pub fn pinv(&self) -> CMat {
        self.power_matrix(-1.0).expect("reciprocals of eigenvalues above threshold are finite")
    }

    /// Orthogonal projection onto the range.
    pub fn range_projector(&self) -> CMat {
        let u = self.eigenvectors.columns(0, self.rank);
        u * u.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SnapshotClass {
    RieszBasis,
    Frame,
    BesselNotTotal,
}

/// Optimal frame bounds of a finite system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Smallest nonzero eigenvalue of `S` (bound on the range).
    pub lower: f64,
    /// Largest eigenvalue of `S`.
    pub upper: f64,
    pub total: bool,
    pub rank: usize,
    #[serde(rename = "class")]
    pub snapshot_class: SnapshotClass,
}

impl BoundsReport {
    pub fn from_spectrum(spec: &SpectralFrameData, n_atoms: usize) -> Self {
        let total = spec.is_total();
        let snapshot_class = if total && n_atoms == spec.dim() {
            SnapshotClass::RieszBasis
        } else if total {
            SnapshotClass::Frame
        } else {
            SnapshotClass::BesselNotTotal
        };
        Self {
            lower: spec.lambda_min_nonzero(),
            upper: spec.lambda_max(),
            total,
            rank: spec.rank(),
            snapshot_class,
        }
    }
}

/// A system together with its frame-operator spectrum, computed once.
#[derive(Debug, Clone)]
pub struct FrameCalculus<'a> {
    sys: &'a VectorSystem,
    synthesis: CMat,
    spectral: SpectralFrameData,
}

impl<'a> FrameCalculus<'a> {
    pub fn new(sys: &'a VectorSystem) -> Self {
        let synthesis = sys.synthesis_matrix();
        let spectral = SpectralFrameData::from_operator(&synthesis * synthesis.adjoint());
        Self { sys, synthesis, spectral }
    }

    pub fn system(&self) -> &VectorSystem {
        self.sys
    }

    pub fn spectral(&self) -> &SpectralFrameData {
        &self.spectral
    }

    pub fn synthesis_matrix(&self) -> &CMat {
        &self.synthesis
    }

    pub fn require_total(&self) -> Result<()> {
        if self.spectral.is_total() {
            Ok(())
        } else {
            Err(FrameError::NotTotal {
                rank: self.spectral.rank(),
                dim: self.spectral.dim(),
            })
        }
    }

    pub fn analysis(&self, f: &CVec) -> Result<CVec> {
        if f.len() != self.sys.dim() {
            return Err(FrameError::DimensionMismatch(format!(
                "vector of length {} for dim {}",
                f.len(),
                self.sys.dim()
            )));
        }
        Ok(self.synthesis.adjoint() * f)
    }

    pub fn synthesis(&self, c: &CVec) -> Result<CVec> {
        if c.len() != self.sys.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} coefficients for {} atoms",
                c.len(),
                self.sys.len()
            )));
        }
        Ok(&self.synthesis * c)
    }

    pub fn gram(&self) -> CMat {
        self.synthesis.adjoint() * &self.synthesis
    }

    pub fn bounds(&self) -> BoundsReport {
        BoundsReport::from_spectrum(&self.spectral, self.sys.len())
    }

    /// `S⁻¹ψ_k` for every raw atom, weights carried over.
    pub fn canonical_dual(&self) -> Result<VectorSystem> {
        self.require_total()?;
        let atoms = self.spectral.pinv() * self.sys.atoms();
        VectorSystem::new(
            atoms,
            self.sys.weights().map(|w| w.to_vec()),
            format!("canonical_dual({})", self.sys.label()),
        )
    }

    /// `𝒢_{k,l} = v_k v_l ⟨ψ_k, S⁻¹ψ_l⟩`, assembled from dual atoms.
    pub fn reproducing_kernel(&self) -> Result<CMat> {
        let dual = self.canonical_dual()?;
        let n = self.sys.len();
        let mut k = CMat::zeros(n, n);
        for l in 0..n {
            let dl = dual.atoms().column(l) * real(self.sys.weight(l));
            for r in 0..n {
                let pr = self.sys.atoms().column(r) * real(self.sys.weight(r));
                k[(r, l)] = pr.dotc(&dl);
            }
        }
        Ok(k)
    }

    /// `P_Ψ = C S⁻¹ D`.
    pub fn range_projection(&self) -> Result<CMat> {
        self.require_total()?;
        Ok(self.synthesis.adjoint() * self.spectral.pinv() * &self.synthesis)
    }

    /// Relative distance of `c` from the range of `C`.
    pub fn range_residual(&self, c: &CVec) -> Result<f64> {
        if c.len() != self.sys.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} coefficients for {} atoms",
                c.len(),
                self.sys.len()
            )));
        }
        let norm = c.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        // Range of C = range of A*, spanned by A* u_i for the nonzero eigenpairs.
        let p = self.coefficient_range_projector();
        Ok((c - p * c).norm() / norm)
    }

    fn coefficient_range_projector(&self) -> CMat {
        let r = self.spectral.rank();
        let mut w = self.synthesis.adjoint() * self.spectral.eigenvectors().columns(0, r);
        for i in 0..r {
            let s = 1.0 / self.spectral.eigenvalues()[i].sqrt();
            for row in 0..w.nrows() {
                w[(row, i)] *= s;
            }
        }
        &w * w.adjoint()
    }

    /// `⟨c, e⟩_Ψ = ⟨c, G⁺ e⟩` on the range of `C`.
    pub fn psi_inner(&self, c: &CVec, e: &CVec) -> Result<Complex64> {
        self.require_total()?;
        for v in [c, e] {
            let res = self.range_residual(v)?;
            if res > 1e-8 {
                return Err(FrameError::OffRange { residual: res });
            }
        }
        let g = SpectralFrameData::from_operator(self.gram());
        Ok(c.dotc(&(g.pinv() * e)))
    }
}

pub fn analysis(sys: &VectorSystem, f: &CVec) -> Result<CVec> {
    FrameCalculus::new(sys).analysis(f)
}

pub fn synthesis(sys: &VectorSystem, c: &CVec) -> Result<CVec> {
    FrameCalculus::new(sys).synthesis(c)
}

pub fn frame_operator(sys: &VectorSystem) -> SpectralFrameData {
    FrameCalculus::new(sys).spectral
}

pub fn gram_operator(sys: &VectorSystem) -> CMat {
    let a = sys.synthesis_matrix();
    a.adjoint() * a
}

pub fn optimal_bounds(sys: &VectorSystem) -> BoundsReport {
    FrameCalculus::new(sys).bounds()
}

pub fn canonical_dual(sys: &VectorSystem) -> Result<VectorSystem> {
    FrameCalculus::new(sys).canonical_dual()
}

pub fn reproducing_kernel(sys: &VectorSystem) -> Result<CMat> {
    FrameCalculus::new(sys).reproducing_kernel()
}

pub fn range_projection(sys: &VectorSystem) -> Result<CMat> {
    FrameCalculus::new(sys).range_projection()
}

pub fn psi_inner(sys: &VectorSystem, c: &CVec, e: &CVec) -> Result<Complex64> {
    FrameCalculus::new(sys).psi_inner(c, e)
}
