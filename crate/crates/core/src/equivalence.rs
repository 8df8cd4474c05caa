//! Rank-n systems `x ↦ Ψ(x)` (a `d × n` block of atoms per point with
//! measure `μ(x)`), their frame kernels, and the equivalence relations
//! between them: similarity, gauge, kernel and bundle equivalence.
//!
//! Gauge transformations act on the atom index: `ψ̃^i_x = Σ_j U_ij(x) ψ^j_x`,
//! i.e. `Ψ̃(x) = Ψ(x) U(x)ᵀ`, under which `K̃(x, y) = Ū(x) K(x, y) U(y)ᵀ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::VectorSystem;
use crate::calculus::SpectralFrameData;
use crate::error::{FrameError, Result};
use crate::fusion::{validate_partition, FusionSystem};
use crate::json::{columns_from_json, columns_to_json, rows_from_json, rows_to_json, JsonComplex};
use crate::linalg::{inverse, orthonormal_range, orthonormality_defect, real, spectral_norm, CMat, RANK_REL_TOL};
use crate::random;

pub const RELATION_TOL: f64 = 1e-8;
pub const PROJECTION_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-9;
/// Relative residual below which `T(x) = T Λ(x)` counts as constant.
pub const CONSTANCY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct RankNSystem {
    dim: usize,
    rank: usize,
    blocks: Vec<CMat>,
    mu: Vec<f64>,
}

impl RankNSystem {
    /// Blocks need not be orthonormal, so that images `T Ψ(x)` under
    /// arbitrary invertible `T` stay representable.
    pub fn new(blocks: Vec<CMat>, mu: Vec<f64>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| FrameError::InvalidInput("at least one point required".into()))?;
        let (dim, rank) = first.shape();
        if dim == 0 || rank == 0 || rank > dim {
            return Err(FrameError::DimensionMismatch(format!("blocks of shape {}x{}", dim, rank)));
        }
        if blocks.len() != mu.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} points with {} measure weights",
                blocks.len(),
                mu.len()
            )));
        }
        if let Some(x) = blocks.iter().position(|b| b.shape() != (dim, rank)) {
            return Err(FrameError::DimensionMismatch(format!(
                "block {} has shape {:?}, expected {}x{}",
                x + 1,
                blocks[x].shape(),
                dim,
                rank
            )));
        }
        if blocks.iter().any(|b| b.iter().any(|z| !z.is_finite())) {
            return Err(FrameError::InvalidInput("non-finite atom entry".into()));
        }
        if let Some(x) = mu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(FrameError::InvalidWeight(format!("μ({}) = {}", x + 1, mu[x])));
        }
        Ok(Self { dim, rank, blocks, mu })
    }

    /// Random system of `q` points carrying orthonormal `d × n` blocks and
    /// measures in `[0.5, 2]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize, q: usize) -> Result<Self> {
        let blocks = (0..q).map(|_| random::unitary(rng, d).columns(0, n).into_owned()).collect();
        let mu = (0..q).map(|_| rng.random_range(0.5..=2.0)).collect();
        Self::new(blocks, mu)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, x: usize) -> &CMat {
        &self.blocks[x]
    }

    pub fn measure(&self) -> &[f64] {
        &self.mu
    }

    /// Largest `‖Ψ(x)*Ψ(x) − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        self.blocks.iter().map(orthonormality_defect).fold(0.0, f64::max)
    }

    /// `Λ(x) = Ψ(x) Ψ(x)*`.
    pub fn lambda(&self, x: usize) -> CMat {
        &self.blocks[x] * self.blocks[x].adjoint()
    }

    /// `S = Σ_x μ(x) Λ(x)`.
    pub fn frame_operator(&self) -> CMat {
        let mut s = CMat::zeros(self.dim, self.dim);
        for (x, &m) in self.mu.iter().enumerate() {
            s += self.lambda(x) * real(m);
        }
        s
    }

    /// Flattened system with atoms `√μ(x) ψ^i_x`, point-major.
    pub fn to_vector_system(&self) -> VectorSystem {
        let mut cols = Vec::with_capacity(self.len() * self.rank);
        for (b, &m) in self.blocks.iter().zip(&self.mu) {
            for col in b.column_iter() {
                cols.push(col.into_owned() * real(m.sqrt()));
            }
        }
        VectorSystem::from_columns(&cols, "rank-n").expect("validated blocks")
    }

    /// Image `Ψ̃(x) = T Ψ(x) U(x)ᵀ`; either factor may be absent.
    pub fn transformed(&self, t: Option<&CMat>, u: Option<&[CMat]>) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(x, b)| {
                let tb = match t {
                    Some(t) => t * b,
                    None => b.clone(),
                };
                match u {
                    Some(u) => tb * u[x].transpose(),
                    None => tb,
                }
            })
            .collect();
        Self::new(blocks, self.mu.clone())
    }

    fn check_shape(&self, other: &RankNSystem) -> Result<()> {
        if self.dim != other.dim || self.rank != other.rank || self.len() != other.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "rank-{} systems of {} points in C^{} vs rank-{} of {} points in C^{}",
                self.rank,
                self.len(),
                self.dim,
                other.rank,
                other.len(),
                other.dim
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RankNFile {
    dim: usize,
    points: Vec<PointFile>,
}

#[derive(Serialize, Deserialize)]
struct PointFile {
    atoms: Vec<Vec<JsonComplex>>,
    mu: f64,
}

impl Serialize for RankNSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RankNFile {
            dim: self.dim,
            points: self
                .blocks
                .iter()
                .zip(&self.mu)
                .map(|(b, &mu)| PointFile {
                    atoms: columns_to_json(b),
                    mu,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RankNSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = RankNFile::deserialize(d)?;
        let mut blocks = Vec::with_capacity(file.points.len());
        let mut mu = Vec::with_capacity(file.points.len());
        for p in &file.points {
            blocks.push(columns_from_json(file.dim, &p.atoms).map_err(serde::de::Error::custom)?);
            mu.push(p.mu);
        }
        RankNSystem::new(blocks, mu).map_err(serde::de::Error::custom)
    }
}

/// Square matrix written as a list of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile(pub CMat);

impl Serialize for MatrixFile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rows_to_json(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixFile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<JsonComplex>>::deserialize(d)?;
        rows_from_json(&rows).map(MatrixFile).map_err(serde::de::Error::custom)
    }
}

/// The frame kernel `K(x, y)_{ij} = ⟨ψ^i_x, S⁻¹ψ^j_y⟩` as a `Qn × Qn`
/// matrix of `n × n` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameKernel {
    rank: usize,
    matrix: CMat,
    /// Dimension of the kernel of `S` (directions where `S⁻¹` is a pseudo-inverse).
    pub excluded_dim: usize,
}

impl FrameKernel {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn block(&self, x: usize, y: usize) -> CMat {
        let n = self.rank;
        self.matrix.view((x * n, y * n), (n, n)).into_owned()
    }

    pub fn points(&self) -> usize {
        self.matrix.nrows() / self.rank
    }
}

fn kernel_unchecked(rs: &RankNSystem) -> FrameKernel {
    let spec = SpectralFrameData::from_operator(rs.frame_operator());
    let pinv = spec.pinv();
    let q = rs.len();
    let n = rs.rank;
    let big = CMat::from_fn(rs.dim, q * n, |r, col| rs.blocks[col / n][(r, col % n)]);
    FrameKernel {
        rank: n,
        matrix: big.adjoint() * pinv * &big,
        excluded_dim: spec.dim() - spec.rank(),
    }
}

pub fn frame_kernel(rs: &RankNSystem) -> Result<FrameKernel> {
    let k = kernel_unchecked(rs);
    if k.excluded_dim > 0 {
        return Err(FrameError::NotTotal {
            rank: rs.dim - k.excluded_dim,
            dim: rs.dim,
        });
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Similar,
    Gauge,
    Kernel,
    Bundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub relation: Relation,
    pub pass: bool,
    pub max_defect: f64,
    /// `Some(Relation::Kernel)` when a bundle equivalence is found to be a
    /// kernel equivalence.
    pub downgrade: Option<Relation>,
    /// Individual defects by name.
    pub defects: Vec<(String, f64)>,
    /// Whether `T` is unitary (similarity only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary: Option<bool>,
    /// Relative residual of the constancy fit `T(x) ≈ T Λ(x)` (bundle only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    /// Kernel dimension of `S`, where kernel invariance is not asserted.
    pub excluded_dim: usize,
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise defect relative to the size of `reference` (floored at 1).
fn relative_defect(got: &CMat, reference: &CMat) -> f64 {
    max_abs(&(got - reference)) / max_abs(reference).max(1.0)
}

fn check_unitaries(u: &[CMat], n: usize, points: usize) -> Result<()> {
    if u.len() != points {
        return Err(FrameError::DimensionMismatch(format!("{} gauge matrices for {} points", u.len(), points)));
    }
    for m in u {
        if m.shape() != (n, n) {
            return Err(FrameError::DimensionMismatch(format!("gauge matrix of shape {:?} for rank {}", m.shape(), n)));
        }
        let defect = orthonormality_defect(m);
        if defect.is_nan() || defect > UNITARY_TOL {
            return Err(FrameError::NotUnitary { defect });
        }
    }
    Ok(())
}

fn check_invertible(t: &CMat, d: usize) -> Result<()> {
    if t.shape() != (d, d) {
        return Err(FrameError::DimensionMismatch(format!("T has shape {:?}, expected {}x{}", t.shape(), d, d)));
    }
    inverse(t).map(|_| ()).ok_or(FrameError::NotInvertible)
}

fn measure_defect(rs1: &RankNSystem, rs2: &RankNSystem) -> f64 {
    rs1.mu
        .iter()
        .zip(&rs2.mu)
        .map(|(a, b)| (a - b).abs() / a.max(1.0))
        .fold(0.0, f64::max)
}

/// `K̃(x, y)` expected from `K` under the gauge `U`.
fn gauged_kernel(k: &FrameKernel, u: Option<&[CMat]>) -> CMat {
    let Some(u) = u else { return k.matrix.clone() };
    let n = k.rank;
    let q = k.points();
    let mut out = k.matrix.clone();
    for x in 0..q {
        for y in 0..q {
            let b = u[x].conjugate() * k.block(x, y) * u[y].transpose();
            out.view_mut((x * n, y * n), (n, n)).copy_from(&b);
        }
    }
    out
}

fn report(relation: Relation, defects: Vec<(String, f64)>, excluded_dim: usize) -> EquivalenceReport {
    let max_defect = defects.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    EquivalenceReport {
        relation,
        pass: max_defect <= RELATION_TOL,
        max_defect,
        downgrade: None,
        defects,
        unitary: None,
        fit_residual: None,
        excluded_dim,
    }
}

/// Shared core of the similarity, gauge and kernel checks:
/// `Ψ̃(x) = T Ψ(x) U(x)ᵀ`, `S̃ = T S T*`, `K̃(x, y) = Ū(x) K(x, y) U(y)ᵀ`.
fn check_composite(
    rs1: &RankNSystem,
    rs2: &RankNSystem,
    t: Option<&CMat>,
    u: Option<&[CMat]>,
) -> Result<Vec<(String, f64)>> {
    let expected = rs1.transformed(t, u)?;
    let atoms = rs2
        .blocks
        .iter()
        .zip(&expected.blocks)
        .map(|(got, want)| relative_defect(got, want))
        .fold(0.0, f64::max);
    let s1 = rs1.frame_operator();
    let s_expected = match t {
        Some(t) => t * &s1 * t.adjoint(),
        None => s1,
    };
    let k1 = kernel_unchecked(rs1);
    let k2 = kernel_unchecked(rs2);
    Ok(vec![
        ("atoms".into(), atoms),
        ("measure".into(), measure_defect(rs1, rs2)),
        ("frame_operator".into(), relative_defect(&rs2.frame_operator(), &s_expected)),
        ("kernel".into(), relative_defect(k2.matrix(), &gauged_kernel(&k1, u))),
    ])
}

pub fn check_similar(rs1: &RankNSystem, rs2: &RankNSystem, t: &CMat) -> Result<EquivalenceReport> {
    rs1.check_shape(rs2)?;
    check_invertible(t, rs1.dim)?;
    let defects = check_composite(rs1, rs2, Some(t), None)?;
    let mut rep = report(Relation::Similar, defects, kernel_unchecked(rs1).excluded_dim);
    let d = rs1.dim;
    rep.unitary = Some(spectral_norm(&(t.adjoint() * t - CMat::identity(d, d))) <= UNITARY_TOL);
    Ok(rep)
}

pub fn check_gauge(rs1: &RankNSystem, rs2: &RankNSystem, u: &[CMat]) -> Result<EquivalenceReport> {
    rs1.check_shape(rs2)?;
    check_unitaries(u, rs1.rank, rs1.len())?;
    let mut defects = check_composite(rs1, rs2, None, Some(u))?;
    let proj = (0..rs1.len())
        .map(|x| relative_defect(&rs2.lambda(x), &rs1.lambda(x)))
        .fold(0.0, f64::max);
    defects.push(("projections".into(), proj));
    let mut rep = report(Relation::Gauge, defects, kernel_unchecked(rs1).excluded_dim);
    rep.pass &= proj <= PROJECTION_TOL;
    Ok(rep)
}

pub fn check_kernel_equivalent(rs1: &RankNSystem, rs2: &RankNSystem, t: &CMat, u: &[CMat]) -> Result<EquivalenceReport> {
    rs1.check_shape(rs2)?;
    check_invertible(t, rs1.dim)?;
    check_unitaries(u, rs1.rank, rs1.len())?;
    let defects = check_composite(rs1, rs2, Some(t), Some(u))?;
    Ok(report(Relation::Kernel, defects, kernel_unchecked(rs1).excluded_dim))
}

/// Verify `Λ̃(x) = T(x) Λ(x) T(x)*` and fit a single `T` with
/// `T(x) ≈ T Λ(x)` by least squares.
pub fn check_bundle(rs1: &RankNSystem, rs2: &RankNSystem, t_family: &[CMat]) -> Result<EquivalenceReport> {
    rs1.check_shape(rs2)?;
    let d = rs1.dim;
    if t_family.len() != rs1.len() || t_family.iter().any(|t| t.shape() != (d, d)) {
        return Err(FrameError::DimensionMismatch(format!(
            "bundle maps must be {} matrices of shape {}x{}",
            rs1.len(),
            d,
            d
        )));
    }
    let mut lambda_defect: f64 = 0.0;
    // normal equations T Σ ΛΛ* = Σ T(x) ΛΛ*
    let mut lhs = CMat::zeros(d, d);
    let mut rhs = CMat::zeros(d, d);
    for (x, tx) in t_family.iter().enumerate() {
        let l = rs1.lambda(x);
        let expected = tx * &l * tx.adjoint();
        lambda_defect = lambda_defect.max(relative_defect(&rs2.lambda(x), &expected));
        let llh = &l * l.adjoint();
        rhs += tx * &llh;
        lhs += llh;
    }
    let fitted = rhs * SpectralFrameData::from_operator(lhs).pinv();
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, tx) in t_family.iter().enumerate() {
        let l = rs1.lambda(x);
        let target = tx * &l;
        num += (&target - &fitted * &l).norm_squared();
        den += target.norm_squared();
    }
    let fit_residual = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    let mut rep = report(
        Relation::Bundle,
        vec![("projections".into(), lambda_defect)],
        kernel_unchecked(rs1).excluded_dim,
    );
    rep.fit_residual = Some(fit_residual);
    if rep.pass && fit_residual < CONSTANCY_TOL {
        rep.downgrade = Some(Relation::Kernel);
    }
    Ok(rep)
}

/// Fusion system of a rank-n system whose projections are constant on the
/// cells of `cells` (0-based point indices): one subspace per cell with
/// weight `(Σ_{x ∈ cell} μ(x))^{1/2}`.
pub fn fusion_from_rank_n(rs: &RankNSystem, cells: &[Vec<usize>]) -> Result<FusionSystem> {
    validate_partition(cells, rs.len())?;
    let mut blocks = Vec::with_capacity(cells.len());
    let mut weights = Vec::with_capacity(cells.len());
    for (j, cell) in cells.iter().enumerate() {
        let l0 = rs.lambda(cell[0]);
        for &x in &cell[1..] {
            let defect = relative_defect(&rs.lambda(x), &l0);
            if defect > PROJECTION_TOL {
                return Err(FrameError::InvalidPartition(format!(
                    "Λ varies by {:.2e} on cell {}",
                    defect,
                    j + 1
                )));
            }
        }
        let proj_defect = relative_defect(&(&l0 * &l0), &l0);
        if proj_defect > PROJECTION_TOL {
            return Err(FrameError::InvalidInput(format!(
                "Λ on cell {} is not an orthogonal projection (defect {:.2e})",
                j + 1,
                proj_defect
            )));
        }
        blocks.push(orthonormal_range(rs.block(cell[0]), RANK_REL_TOL));
        weights.push(cell.iter().map(|&x| rs.mu[x]).sum::<f64>().sqrt());
    }
    FusionSystem::new(rs.dim, blocks, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::optimal_bounds;
    use crate::fusion::fusion_operator_bounds;
    use crate::linalg::{basis_vector, c, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phases<R: Rng>(rng: &mut R, q: usize) -> Vec<CMat> {
        (0..q)
            .map(|_| CMat::from_element(1, 1, c(0.0, rng.random_range(0.0..std::f64::consts::TAU)).exp()))
            .collect()
    }

    #[test]
    fn kernel_examples() {
        let full = RankNSystem::new(vec![CMat::identity(3, 3)], vec![1.0]).unwrap();
        let k = frame_kernel(&full).unwrap();
        assert!((k.matrix() - CMat::identity(3, 3)).norm() < 1e-14);

        let two = RankNSystem::new(
            vec![CMat::from_column_slice(2, 1, &[ONE, real(0.0)]), CMat::from_column_slice(2, 1, &[real(0.0), ONE])],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!((frame_kernel(&two).unwrap().matrix() - CMat::identity(2, 2)).norm() < 1e-14);

        let partial = RankNSystem::new(vec![CMat::from_column_slice(2, 1, &[ONE, real(0.0)])], vec![1.0]).unwrap();
        assert!(matches!(frame_kernel(&partial), Err(FrameError::NotTotal { .. })));
    }

    #[test]
    fn random_kernel_is_weighted_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rs = RankNSystem::random(&mut rng, 4, 2, 5).unwrap();
        let k = frame_kernel(&rs).unwrap();
        let mu = CMat::from_diagonal(&crate::linalg::CVec::from_iterator(
            10,
            (0..10).map(|i| real(rs.measure()[i / 2])),
        ));
        let km = k.matrix() * &mu;
        assert!((&km * &km - &km).norm() < 1e-10);
        assert!(((k.matrix() - k.matrix().adjoint()).norm()) < 1e-12);
        let rank = SpectralFrameData::from_operator(crate::linalg::hermitian_part(&(k.matrix() * real(1.0)))).rank();
        assert_eq!(rank, 4);
        // reproduces analysis coefficients
        let f = random::gaussian_vector(&mut rng, 4);
        let coeffs = crate::linalg::CVec::from_iterator(10, (0..10).map(|i| rs.block(i / 2).column(i % 2).dotc(&f)));
        assert!((k.matrix() * (&mu * &coeffs) - &coeffs).norm() < 1e-10);
    }

    #[test]
    fn similarity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rs = RankNSystem::random(&mut rng, 4, 2, 5).unwrap();
        let id = CMat::identity(4, 4);
        let rep = check_similar(&rs, &rs, &id).unwrap();
        assert!(rep.pass && rep.unitary == Some(true) && rep.max_defect == 0.0);

        let two = &id * real(2.0);
        let rep = check_similar(&rs, &rs.transformed(Some(&two), None).unwrap(), &two).unwrap();
        assert!(rep.pass && rep.unitary == Some(false));

        let t = random::conditioned_matrix(&mut rng, 4, 0.5, 2.0);
        let rep = check_similar(&rs, &rs.transformed(Some(&t), None).unwrap(), &t).unwrap();
        assert!(rep.pass, "{:?}", rep);

        let rep = check_similar(&rs, &rs, &two).unwrap();
        assert!(!rep.pass);
        assert!(matches!(check_similar(&rs, &rs, &CMat::zeros(4, 4)), Err(FrameError::NotInvertible)));
    }

    #[test]
    fn gauge_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rs = RankNSystem::random(&mut rng, 3, 1, 6).unwrap();
        let u = phases(&mut rng, 6);
        let rep = check_gauge(&rs, &rs.transformed(None, Some(&u)).unwrap(), &u).unwrap();
        assert!(rep.pass, "{:?}", rep);

        let rs2 = RankNSystem::random(&mut rng, 5, 2, 7).unwrap();
        let u: Vec<CMat> = (0..7).map(|_| random::unitary(&mut rng, 2)).collect();
        let rep = check_gauge(&rs2, &rs2.transformed(None, Some(&u)).unwrap(), &u).unwrap();
        assert!(rep.pass, "{:?}", rep);

        let ids = vec![CMat::identity(2, 2); 7];
        assert!(check_gauge(&rs2, &rs2, &ids).unwrap().pass);
        let mut bad = ids.clone();
        bad[0] *= real(2.0);
        assert!(matches!(check_gauge(&rs2, &rs2, &bad), Err(FrameError::NotUnitary { .. })));
    }

    #[test]
    fn kernel_equivalence_and_failure() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let rs = RankNSystem::random(&mut rng, 4, 1, 6).unwrap();
        let t = random::unitary(&mut rng, 4);
        let u = phases(&mut rng, 6);
        let image = rs.transformed(Some(&t), Some(&u)).unwrap();
        assert!(check_kernel_equivalent(&rs, &image, &t, &u).unwrap().pass);

        let mut blocks = image.blocks().to_vec();
        blocks[2] += basis_vector(4, 0) * real(1e-3);
        let perturbed = RankNSystem::new(blocks, image.measure().to_vec()).unwrap();
        let rep = check_kernel_equivalent(&rs, &perturbed, &t, &u).unwrap();
        assert!(!rep.pass && rep.max_defect > 1e-4);
    }

    #[test]
    fn bundle_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let rs = RankNSystem::random(&mut rng, 4, 2, 6).unwrap();
        let t = random::conditioned_matrix(&mut rng, 4, 0.5, 2.0);
        let constant = vec![t.clone(); 6];
        let rep = check_bundle(&rs, &rs.transformed(Some(&t), None).unwrap(), &constant).unwrap();
        assert!(rep.pass && rep.downgrade == Some(Relation::Kernel));

        let varying: Vec<CMat> = (0..6).map(|_| random::conditioned_matrix(&mut rng, 4, 0.5, 2.0)).collect();
        let image = RankNSystem::new(rs.blocks().iter().zip(&varying).map(|(b, t)| t * b).collect(), rs.measure().to_vec()).unwrap();
        let rep = check_bundle(&rs, &image, &varying).unwrap();
        assert!(rep.pass && rep.downgrade.is_none() && rep.fit_residual.unwrap() > 1e-3);

        let ids = vec![CMat::identity(4, 4); 6];
        assert_eq!(check_bundle(&rs, &rs, &ids).unwrap().downgrade, Some(Relation::Kernel));
    }

    #[test]
    fn fusion_bridge_keeps_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let u = random::unitary(&mut rng, 4);
        let a = u.columns(0, 2).into_owned();
        let b = u.columns(1, 2).into_owned();
        let rs = RankNSystem::new(vec![a.clone(), a, b.clone(), b], vec![0.5, 1.0, 2.0, 0.25]).unwrap();
        let fs = fusion_from_rank_n(&rs, &[vec![0, 1], vec![2, 3]]).unwrap();
        let direct = optimal_bounds(&rs.to_vector_system());
        let fused = fusion_operator_bounds(&fs);
        assert!((direct.upper - fused.upper).abs() < 1e-9 && (direct.lower - fused.lower).abs() < 1e-9);
        assert!(matches!(fusion_from_rank_n(&rs, &[vec![1, 2], vec![0, 3]]), Err(FrameError::InvalidPartition(_))));
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rs = RankNSystem::random(&mut rng, 3, 2, 4).unwrap();
        let back: RankNSystem = serde_json::from_str(&serde_json::to_string(&rs).unwrap()).unwrap();
        assert!((back.frame_operator() - rs.frame_operator()).norm() < 1e-14);
        let m = MatrixFile(random::unitary(&mut rng, 3));
        let back: MatrixFile = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert!((back.0 - m.0).norm() < 1e-15);
    }
}
