//! Quadrature models of continuous frames on `L²(ℝ⁺, r^{n−1} dr)`.
//!
//! Functions live on a radial grid `r_j` with weights `u_j ≈ r_j^{n−1} Δr_j`,
//! the parameter space is sampled at nodes `x_i` with weights `w_i`. The
//! unitary map `f ↦ (√u_j f(r_j))_j` turns the weighted grid into `C^P`, and
//! in those coordinates the frame operator is the Hermitian matrix of the
//! system with atoms `√u_j ψ_{x_i}(r_j)` and weights `√w_i`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atoms::VectorSystem;
use crate::calculus::{FrameCalculus, SpectralFrameData, OVERFLOW_GUARD};
use crate::error::{FrameError, Result};
use crate::linalg::{c, real, spectral_norm, CMat, CVec};

/// Profiles may exceed 1 by this much.
pub const PROFILE_SLACK: f64 = 1e-12;
/// Growth factor per cutoff step that marks a divergent norm.
pub const DIVERGENCE_GROWTH: f64 = 2.0;
/// Ratio between successive cutoffs of the regularity scan.
pub const CUTOFF_RATIO: f64 = 3.0;
/// A last growth factor within this of 1 marks a convergent norm.
pub const CONVERGENCE_GAP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub n: usize,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: usize, r: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(FrameError::InvalidInput("n ≥ 1 required".into()));
        }
        if r.is_empty() {
            return Err(FrameError::InvalidInput("empty radial grid".into()));
        }
        if r.len() != u.len() {
            return Err(FrameError::DimensionMismatch(format!("{} nodes with {} weights", r.len(), u.len())));
        }
        if r.iter().any(|&x| !(x > 0.0 && x.is_finite())) || r.windows(2).any(|p| p[1] <= p[0]) {
            return Err(FrameError::InvalidInput("radial nodes must be positive and increasing".into()));
        }
        if let Some(j) = u.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(FrameError::InvalidWeight(format!("grid weight u_{} = {}", j + 1, u[j])));
        }
        Ok(Self { n, r, u })
    }

    /// Midpoints `r_j = (j + ½)h`, `h = R/P`, with `u_j = r_j^{n−1} h`.
    pub fn uniform(n: usize, p: usize, r_max: f64) -> Result<Self> {
        if p == 0 || !(r_max > 0.0 && r_max.is_finite()) {
            return Err(FrameError::InvalidInput("uniform grid needs P ≥ 1 and R > 0".into()));
        }
        let h = r_max / p as f64;
        let r: Vec<f64> = (0..p).map(|j| (j as f64 + 0.5) * h).collect();
        let u = r.iter().map(|&x| x.powi(n as i32 - 1) * h).collect();
        Self::new(n, r, u)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Largest gap between neighbouring nodes (twice the first node for a
    /// single-node grid).
    pub fn max_step(&self) -> f64 {
        self.r.windows(2).map(|p| p[1] - p[0]).fold(2.0 * self.r[0], f64::max)
    }

    /// `h` when the nodes are equispaced midpoints, `None` otherwise.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let h = if self.r.len() > 1 { self.r[1] - self.r[0] } else { 2.0 * self.r[0] };
        let ok = (self.r[0] - h / 2.0).abs() <= 1e-9 * h
            && self.r.windows(2).all(|p| ((p[1] - p[0]) - h).abs() <= 1e-9 * h);
        ok.then_some(h)
    }

    /// Radial step `Δr_j = u_j / r_j^{n−1}`.
    fn step(&self, j: usize) -> f64 {
        self.u[j] / self.r[j].powi(self.n as i32 - 1)
    }
}

fn check_profile(profile: &[f64], grid: &RadialGrid) -> Result<()> {
    if profile.len() != grid.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "profile has {} samples on a grid of {}",
            profile.len(),
            grid.len()
        )));
    }
    if let Some(j) = profile.iter().position(|&s| !(0.0..=1.0 + PROFILE_SLACK).contains(&s)) {
        return Err(FrameError::InadmissibleProfile(format!("s(r_{}) = {} outside [0, 1]", j + 1, profile[j])));
    }
    let sup = profile.iter().copied().fold(0.0, f64::max);
    if 1.0 - sup > grid.max_step() {
        return Err(FrameError::InadmissibleProfile(format!("sup s = {} is not 1 on this grid", sup)));
    }
    if profile.windows(2).any(|p| p[0] == 0.0 && p[1] == 0.0) {
        return Err(FrameError::InadmissibleProfile("s vanishes on an interval".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledContinuousFrame {
    grid: RadialGrid,
    x: Vec<f64>,
    w: Vec<f64>,
    /// `atoms[(j, i)] = ψ_{x_i}(r_j)`.
    atoms: CMat,
    profile: Option<Vec<f64>>,
}

impl SampledContinuousFrame {
    pub fn new(grid: RadialGrid, x: Vec<f64>, w: Vec<f64>, atoms: CMat, profile: Option<Vec<f64>>) -> Result<Self> {
        if x.is_empty() || x.len() != w.len() {
            return Err(FrameError::DimensionMismatch(format!("{} nodes with {} weights", x.len(), w.len())));
        }
        if let Some(i) = w.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(FrameError::InvalidWeight(format!("node weight w_{} = {}", i + 1, w[i])));
        }
        if atoms.nrows() != grid.len() || atoms.ncols() != x.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "atoms sampled as {}x{}, expected {}x{}",
                atoms.nrows(),
                atoms.ncols(),
                grid.len(),
                x.len()
            )));
        }
        if let Some(p) = &profile {
            check_profile(p, &grid)?;
        }
        Ok(Self {
            grid,
            x,
            w,
            atoms,
            profile,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.w
    }

    pub fn atoms(&self) -> &CMat {
        &self.atoms
    }

    pub fn profile(&self) -> Option<&[f64]> {
        self.profile.as_deref()
    }

    fn sqrt_u(&self) -> CVec {
        CVec::from_iterator(self.grid.len(), self.grid.u.iter().map(|&u| real(u.sqrt())))
    }

    /// Atoms `√u_j ψ_{x_i}(r_j)` with weights `√w_i`.
    pub fn to_vector_system(&self) -> VectorSystem {
        let su = self.sqrt_u();
        let mut a = self.atoms.clone();
        for mut col in a.column_iter_mut() {
            col.component_mul_assign(&su);
        }
        VectorSystem::new(a, Some(self.w.iter().map(|w| w.sqrt()).collect()), "quadrature")
            .expect("validated grid and nodes")
    }

    /// `⟨f, g⟩ = Σ_j u_j f̄_j g_j`.
    pub fn grid_inner(&self, f: &CVec, g: &CVec) -> num_complex::Complex64 {
        f.iter()
            .zip(g.iter())
            .zip(&self.grid.u)
            .map(|((a, b), &u)| a.conj() * b * u)
            .sum()
    }

    pub fn grid_norm(&self, f: &CVec) -> f64 {
        self.grid_inner(f, f).re.max(0.0).sqrt()
    }

    /// `⟨F, G⟩ = Σ_i w_i F̄_i G_i`.
    pub fn node_inner(&self, f: &CVec, g: &CVec) -> num_complex::Complex64 {
        f.iter().zip(g.iter()).zip(&self.w).map(|((a, b), &w)| a.conj() * b * w).sum()
    }

    fn check_grid_fn(&self, f: &CVec) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "grid function of length {} on {} nodes",
                f.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// `(Cf)(x_i) = ⟨ψ_{x_i}, f⟩`.
    pub fn analysis(&self, f: &CVec) -> Result<CVec> {
        self.check_grid_fn(f)?;
        let uf = CVec::from_iterator(f.len(), f.iter().zip(&self.grid.u).map(|(z, &u)| z * u));
        Ok(self.atoms.adjoint() * uf)
    }

    /// `DF = Σ_i w_i F(x_i) ψ_{x_i}`.
    pub fn synthesis(&self, coeffs: &CVec) -> Result<CVec> {
        if coeffs.len() != self.x.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} coefficients for {} nodes",
                coeffs.len(),
                self.x.len()
            )));
        }
        let wc = CVec::from_iterator(coeffs.len(), coeffs.iter().zip(&self.w).map(|(z, &w)| z * w));
        Ok(&self.atoms * wc)
    }

    /// Frame operator acting on grid values, `S = D C`.
    pub fn frame_matrix(&self) -> CMat {
        let mut wa = self.atoms.clone();
        for (i, mut col) in wa.column_iter_mut().enumerate() {
            col *= real(self.w[i]);
        }
        let mut s = wa * self.atoms.adjoint();
        for (j, mut col) in s.column_iter_mut().enumerate() {
            col *= real(self.grid.u[j]);
        }
        s
    }
}

/// Spectrum of the quadrature frame operator, taken in the unitary
/// coordinates `√u_j f(r_j)` where it is a Hermitian matrix.
pub fn quadrature_frame_operator(scf: &SampledContinuousFrame) -> SpectralFrameData {
    let sys = scf.to_vector_system();
    FrameCalculus::new(&sys).spectral().clone()
}

/// Operator norm of `S − M_𝔰` on the weighted grid.
pub fn multiplication_defect(scf: &SampledContinuousFrame) -> Result<f64> {
    let profile = scf.profile().ok_or(FrameError::MissingProfile)?;
    let spec = quadrature_frame_operator(scf);
    let mut diff = spec.operator().clone();
    for (j, &s) in profile.iter().enumerate() {
        diff[(j, j)] -= real(s);
    }
    Ok(spectral_norm(&diff))
}

/// Affine coherent states `ψ_x(r) = e^{ixr} (𝔰(r)/π)^{1/2} r^{−(n−1)/2}` on
/// `Q` equispaced nodes covering one period `2π/h` of the uniform grid,
/// weighted `w_i = Δx / 2`, so that the quadrature frame operator is
/// multiplication by `𝔰` once `Q ≥ P`.
pub fn affine_system(grid: &RadialGrid, profile: &[f64], q: usize) -> Result<SampledContinuousFrame> {
    if q < 2 {
        return Err(FrameError::InvalidInput("Q ≥ 2 nodes required".into()));
    }
    let h = grid
        .uniform_spacing()
        .ok_or_else(|| FrameError::InvalidInput("the Fourier node rule needs a uniform midpoint grid".into()))?;
    let range = 2.0 * PI / h;
    let dx = range / q as f64;
    let x: Vec<f64> = (0..q).map(|i| (i as f64 - (q / 2) as f64) * dx).collect();
    affine_system_on_nodes(grid, profile, x, vec![dx / 2.0; q])
}

/// Affine coherent states at explicit nodes and weights.
pub fn affine_system_on_nodes(
    grid: &RadialGrid,
    profile: &[f64],
    x: Vec<f64>,
    w: Vec<f64>,
) -> Result<SampledContinuousFrame> {
    check_profile(profile, grid)?;
    let n = grid.n as i32;
    let atoms = CMat::from_fn(grid.len(), x.len(), |j, i| {
        let r = grid.r[j];
        let amp = (profile[j] / PI).sqrt() * r.powf(-(n - 1) as f64 / 2.0);
        c(0.0, x[i] * r).exp() * amp
    });
    SampledContinuousFrame::new(grid.clone(), x, w, atoms, Some(profile.to_vec()))
}

/// `f̂ = Σ_i w_i ⟨ψ_{x_i}, f⟩ S⁻¹ψ_{x_i}` and `‖f̂ − f‖ / ‖f‖`.
pub fn cont_reconstruct(scf: &SampledContinuousFrame, f: &CVec) -> Result<(CVec, f64)> {
    scf.check_grid_fn(f)?;
    let sys = scf.to_vector_system();
    let calc = FrameCalculus::new(&sys);
    let su = scf.sqrt_u();
    let fu = f.component_mul(&su);
    let norm = fu.norm();
    if norm == 0.0 {
        return Ok((f.clone(), 0.0));
    }
    let off = calc.spectral().kernel_component(&fu);
    if off > 1e-8 * norm {
        return Err(FrameError::DomainViolation(format!(
            "component {:.2e} of f lies outside the resolved range of S",
            off / norm
        )));
    }
    let dual = calc.spectral().pinv() * calc.synthesis_matrix();
    let coeffs = calc.analysis(&fu)?;
    let rebuilt_u = dual * coeffs;
    let rebuilt = rebuilt_u.component_div(&su);
    let residual = (&rebuilt_u - &fu).norm() / norm;
    Ok((rebuilt, residual))
}

/// The family `S⁻¹ψ_{x_i}` on the same nodes.
pub fn dual_frame(scf: &SampledContinuousFrame) -> Result<SampledContinuousFrame> {
    let spec = quadrature_frame_operator(scf);
    if !spec.is_total() {
        return Err(FrameError::NotTotal {
            rank: spec.rank(),
            dim: spec.dim(),
        });
    }
    let su = scf.sqrt_u();
    let scaled = CMat::from_fn(scf.atoms.nrows(), scf.atoms.ncols(), |j, i| scf.atoms[(j, i)] * su[j]);
    let mut dual = spec.pinv() * scaled;
    for mut col in dual.column_iter_mut() {
        col.component_div_assign(&su);
    }
    SampledContinuousFrame::new(scf.grid.clone(), scf.x.clone(), scf.w.clone(), dual, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanTag {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub m: usize,
    pub cutoffs: Vec<f64>,
    /// `Σ_{r_j ≤ R} u_j |ψ(r_j)|² 𝔰(r_j)^{−m}` at each cutoff.
    pub values: Vec<f64>,
    /// Ratios of successive values.
    pub growth: Vec<f64>,
    pub tag: ScanTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonregularityScan {
    pub rows: Vec<ScanRow>,
    /// Largest `m` with `ψ_x ∈ H_{m'}` for every `1 ≤ m' ≤ m` among the
    /// scanned indices; 0 when already the first index diverges.
    pub regularity_order: usize,
}

/// Track `‖ψ_x‖²_{H_m}` for the first node's atom as the radial cutoff grows
/// by factors of three up to the full grid.
pub fn nonregularity_scan(scf: &SampledContinuousFrame, m_list: &[usize], refinements: usize) -> Result<NonregularityScan> {
    let profile = scf.profile().ok_or(FrameError::MissingProfile)?;
    if refinements < 2 {
        return Err(FrameError::InvalidInput("at least 2 refinements required".into()));
    }
    let grid = scf.grid();
    let r_max = grid.r[grid.len() - 1] + grid.step(grid.len() - 1) / 2.0;
    let cutoffs: Vec<f64> = (0..refinements)
        .map(|t| r_max * CUTOFF_RATIO.powi(-((refinements - 1 - t) as i32)))
        .collect();
    let amp: Vec<f64> = (0..grid.len()).map(|j| scf.atoms[(j, 0)].norm_sqr()).collect();

    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let term = |j: usize| -> f64 {
            if amp[j] == 0.0 {
                return 0.0;
            }
            let inv = if m == 0 { 1.0 } else { profile[j].powi(-(m as i32)) };
            if inv > OVERFLOW_GUARD {
                f64::INFINITY
            } else {
                grid.u[j] * amp[j] * inv
            }
        };
        let values: Vec<f64> = cutoffs
            .iter()
            .map(|&cut| (0..grid.len()).filter(|&j| grid.r[j] <= cut).map(term).sum())
            .collect();
        if values[0] == 0.0 {
            return Err(FrameError::InsufficientData(format!(
                "no grid node below the smallest cutoff {:.3}",
                cutoffs[0]
            )));
        }
        let growth: Vec<f64> = values.windows(2).map(|v| v[1] / v[0]).collect();
        let tag = if growth.iter().all(|&g| g > DIVERGENCE_GROWTH) {
            ScanTag::Divergent
        } else if (growth[growth.len() - 1] - 1.0).abs() <= CONVERGENCE_GAP {
            ScanTag::Convergent
        } else {
            ScanTag::Inconclusive
        };
        rows.push(ScanRow {
            m,
            cutoffs: cutoffs.clone(),
            values,
            growth,
            tag,
        });
    }
    let mut regularity_order = 0;
    for m in 1.. {
        match rows.iter().find(|r| r.m == m) {
            Some(row) if row.tag != ScanTag::Divergent => regularity_order = m,
            _ => break,
        }
    }
    Ok(NonregularityScan { rows, regularity_order })
}

/// On-disk form: grid, profile, and either explicit nodes or a node count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuumFile {
    pub n: usize,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
}

impl ContinuumFile {
    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.n, self.r.clone(), self.u.clone())
    }

    /// Affine coherent states on the described grid.
    pub fn affine(&self) -> Result<SampledContinuousFrame> {
        let grid = self.grid()?;
        let s = self.s.as_ref().ok_or(FrameError::MissingProfile)?;
        match (&self.x, &self.w, self.q) {
            (Some(x), Some(w), _) => affine_system_on_nodes(&grid, s, x.clone(), w.clone()),
            (None, None, q) => affine_system(&grid, s, q.unwrap_or(grid.len())),
            _ => Err(FrameError::InvalidInput("give both x and w, or neither".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn exp_profile(grid: &RadialGrid, alpha: f64) -> Vec<f64> {
        grid.r.iter().map(|r| (-alpha * r).exp()).collect()
    }

    #[test]
    fn single_and_orthogonal_atoms() {
        let grid = RadialGrid::new(1, vec![1.0, 2.0], vec![0.5, 2.0]).unwrap();
        let atom = CMat::from_column_slice(2, 1, &[ONE, c(0.0, 1.0)]);
        let scf = SampledContinuousFrame::new(grid.clone(), vec![0.0], vec![1.0], atom, None).unwrap();
        let spec = quadrature_frame_operator(&scf);
        assert_eq!(spec.rank(), 1);
        assert!((spec.lambda_max() - 2.5).abs() < 1e-12);

        let atoms = CMat::from_row_slice(2, 2, &[ONE, real(0.0), real(0.0), ONE]);
        let scf = SampledContinuousFrame::new(grid, vec![0.0, 1.0], vec![3.0, 0.25], atoms, None).unwrap();
        let ev = quadrature_frame_operator(&scf).eigenvalues().to_vec();
        assert!((ev[0] - 1.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_profile_is_tight() {
        let grid = RadialGrid::uniform(1, 32, 8.0).unwrap();
        let scf = affine_system(&grid, &vec![1.0; 32], 32).unwrap();
        assert!(multiplication_defect(&scf).unwrap() < 1e-12);
        let f = CVec::from_fn(32, |j, _| real((j as f64 * 0.3).sin()));
        let (_, res) = cont_reconstruct(&scf, &f).unwrap();
        assert!(res < 1e-8);
    }

    #[test]
    fn exponential_profile_is_multiplication() {
        for n in [1, 2, 3] {
            let grid = RadialGrid::uniform(n, 64, 10.0).unwrap();
            let s = exp_profile(&grid, 1.0);
            let scf = affine_system(&grid, &s, 64).unwrap();
            let sm = scf.frame_matrix();
            for j in 0..64 {
                assert!((sm[(j, j)].re - s[j]).abs() < 1e-12);
            }
            assert!(multiplication_defect(&scf).unwrap() < 1e-12);
        }
    }

    #[test]
    fn refinement_reduces_defect() {
        let grid = RadialGrid::uniform(1, 64, 10.0).unwrap();
        let s = exp_profile(&grid, 1.0);
        let d: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&q| multiplication_defect(&affine_system(&grid, &s, q).unwrap()).unwrap())
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2] && d[2] < 1e-10, "{:?}", d);
    }

    #[test]
    fn adjointness_and_dual_bound() {
        let grid = RadialGrid::uniform(2, 24, 6.0).unwrap();
        let scf = affine_system(&grid, &exp_profile(&grid, 1.0), 24).unwrap();
        let f = CVec::from_fn(24, |j, _| c((j as f64).cos(), 0.1 * j as f64));
        let big_f = CVec::from_fn(24, |i, _| c(1.0 / (1.0 + i as f64), 0.5));
        let lhs = scf.grid_inner(&scf.synthesis(&big_f).unwrap(), &f);
        let rhs = scf.node_inner(&big_f, &scf.analysis(&f).unwrap());
        assert!((lhs - rhs).norm() < 1e-10);

        let m = quadrature_frame_operator(&scf).lambda_max();
        let dual = dual_frame(&scf).unwrap();
        let lower = quadrature_frame_operator(&dual).lambda_min_nonzero();
        assert!(lower >= 1.0 / m * (1.0 - 1e-9));
    }

    #[test]
    fn reconstruct_where_profile_is_large() {
        let grid = RadialGrid::uniform(1, 64, 10.0).unwrap();
        let scf = affine_system(&grid, &exp_profile(&grid, 1.0), 64).unwrap();
        let f = CVec::from_fn(64, |j, _| if grid.r[j] < 2.0 { real(1.0 + grid.r[j]) } else { real(0.0) });
        let (rebuilt, res) = cont_reconstruct(&scf, &f).unwrap();
        assert!(res < 1e-6);
        assert!((rebuilt - f).norm() < 1e-6 * 8.0);
    }

    #[test]
    fn profile_validation() {
        let grid = RadialGrid::uniform(1, 8, 4.0).unwrap();
        assert!(matches!(affine_system(&grid, &[0.2; 8], 8), Err(FrameError::InadmissibleProfile(_))));
        assert!(matches!(affine_system(&grid, &[1.5; 8], 8), Err(FrameError::InadmissibleProfile(_))));
        let mut gap = vec![1.0; 8];
        gap[3] = 0.0;
        gap[4] = 0.0;
        assert!(matches!(affine_system(&grid, &gap, 8), Err(FrameError::InadmissibleProfile(_))));
        gap[4] = 1.0;
        assert!(affine_system(&grid, &gap, 8).is_ok());
    }

    #[test]
    fn scan_tags() {
        let grid = RadialGrid::uniform(1, 270, 27.0).unwrap();
        let scf = affine_system(&grid, &exp_profile(&grid, 1.0), 8).unwrap();
        let scan = nonregularity_scan(&scf, &[0, 1, 2], 3).unwrap();
        assert_eq!(scan.rows[0].tag, ScanTag::Convergent);
        assert_eq!(scan.rows[1].tag, ScanTag::Divergent);
        assert_eq!(scan.rows[2].tag, ScanTag::Divergent);
        assert_eq!(scan.regularity_order, 0);
        for g in &scan.rows[1].growth {
            assert!((g - 3.0).abs() < 0.05);
        }
        let plain = SampledContinuousFrame::new(grid, vec![0.0], vec![1.0], CMat::from_element(270, 1, ONE), None).unwrap();
        assert!(matches!(nonregularity_scan(&plain, &[1], 3), Err(FrameError::MissingProfile)));
    }

    #[test]
    fn file_round_trip() {
        let grid = RadialGrid::uniform(1, 16, 4.0).unwrap();
        let file = ContinuumFile {
            n: 1,
            r: grid.r.clone(),
            u: grid.u.clone(),
            x: None,
            w: None,
            q: Some(16),
            s: Some(exp_profile(&grid, 1.0)),
        };
        let text = serde_json::to_string(&file).unwrap();
        let back: ContinuumFile = serde_json::from_str(&text).unwrap();
        assert!(multiplication_defect(&back.affine().unwrap()).unwrap() < 1e-12);
    }
}
