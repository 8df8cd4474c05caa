//! Weighted subspace systems `{(W_j, v_j)}` with frame operator
//! `S_{W,v} = Σ_j v_j² π_j`, and the two constructions linking them to
//! ordinary frames.
//!
//! Analysis sends `f` to the block coefficients `(v_j B_j* f)_j`, synthesis
//! is its adjoint `(c_j) ↦ Σ_j v_j B_j c_j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::VectorSystem;
use crate::calculus::{optimal_bounds, BoundsReport, SpectralFrameData};
use crate::error::{FrameError, Result};
use crate::json::{columns_from_json, columns_to_json, JsonComplex};
use crate::linalg::{orthonormal_range, orthonormality_defect, CMat, CVec, RANK_REL_TOL};
use crate::random;

pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Relative slack allowed in certified inequalities.
pub const CERTIFICATE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FusionSystem {
    dim: usize,
    blocks: Vec<CMat>,
    weights: Vec<f64>,
}

impl FusionSystem {
    /// `blocks[j]` is a `d × r_j` matrix with orthonormal columns.
    pub fn new(dim: usize, blocks: Vec<CMat>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(FrameError::InvalidInput("d ≥ 1 required".into()));
        }
        if blocks.is_empty() {
            return Err(FrameError::InvalidInput("at least one block required".into()));
        }
        if blocks.len() != weights.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} blocks with {} weights",
                blocks.len(),
                weights.len()
            )));
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.nrows() != dim || b.ncols() == 0 || b.ncols() > dim {
                return Err(FrameError::DimensionMismatch(format!(
                    "block {} is {}x{} in dimension {}",
                    j + 1,
                    b.nrows(),
                    b.ncols(),
                    dim
                )));
            }
            let defect = orthonormality_defect(b);
            if defect.is_nan() || defect > ORTHONORMAL_TOL {
                return Err(FrameError::InvalidInput(format!(
                    "block {} has non-orthonormal columns (defect {:.2e})",
                    j + 1,
                    defect
                )));
            }
        }
        if let Some(j) = weights.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(FrameError::InvalidWeight(format!("fusion weight {} is {}", j + 1, weights[j])));
        }
        Ok(Self { dim, blocks, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.blocks.clone(), weights)
    }

    pub fn projector(&self, j: usize) -> CMat {
        &self.blocks[j] * self.blocks[j].adjoint()
    }

    /// `Σ_j v_j² B_j B_j*`.
    pub fn operator(&self) -> CMat {
        let mut s = CMat::zeros(self.dim, self.dim);
        for (b, &v) in self.blocks.iter().zip(&self.weights) {
            s += (b * b.adjoint()) * crate::linalg::real(v * v);
        }
        s
    }

    /// `Σ_j v_j² ‖π_j f‖²`.
    pub fn quadratic_form(&self, f: &CVec) -> f64 {
        self.blocks
            .iter()
            .zip(&self.weights)
            .map(|(b, &v)| v * v * (b.adjoint() * f).norm_squared())
            .sum()
    }

    pub fn analysis(&self, f: &CVec) -> Result<Vec<CVec>> {
        if f.len() != self.dim {
            return Err(FrameError::DimensionMismatch(format!(
                "vector of length {} for dim {}",
                f.len(),
                self.dim
            )));
        }
        Ok(self
            .blocks
            .iter()
            .zip(&self.weights)
            .map(|(b, &v)| (b.adjoint() * f) * crate::linalg::real(v))
            .collect())
    }

    pub fn synthesis(&self, coeffs: &[CVec]) -> Result<CVec> {
        if coeffs.len() != self.blocks.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} coefficient blocks for {} subspaces",
                coeffs.len(),
                self.blocks.len()
            )));
        }
        let mut out = CVec::zeros(self.dim);
        for ((b, &v), c) in self.blocks.iter().zip(&self.weights).zip(coeffs) {
            if c.len() != b.ncols() {
                return Err(FrameError::DimensionMismatch(format!(
                    "block coefficients of length {} for rank {}",
                    c.len(),
                    b.ncols()
                )));
            }
            out += (b * c) * crate::linalg::real(v);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct BlockFile {
    basis: Vec<Vec<JsonComplex>>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct FusionFile {
    dim: usize,
    blocks: Vec<BlockFile>,
}

impl Serialize for FusionSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FusionFile {
            dim: self.dim,
            blocks: self
                .blocks
                .iter()
                .zip(&self.weights)
                .map(|(b, &weight)| BlockFile {
                    basis: columns_to_json(b),
                    weight,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FusionSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = FusionFile::deserialize(d)?;
        let mut blocks = Vec::with_capacity(file.blocks.len());
        let mut weights = Vec::with_capacity(file.blocks.len());
        for b in &file.blocks {
            blocks.push(columns_from_json(file.dim, &b.basis).map_err(serde::de::Error::custom)?);
            weights.push(b.weight);
        }
        FusionSystem::new(file.dim, blocks, weights).map_err(serde::de::Error::custom)
    }
}

pub fn fusion_operator_bounds(fs: &FusionSystem) -> BoundsReport {
    let spec = SpectralFrameData::from_operator(fs.operator());
    let pieces = fs.blocks.iter().map(|b| b.ncols()).sum();
    BoundsReport::from_spectrum(&spec, pieces)
}

/// Check that `partition` splits `0..n` into nonempty disjoint blocks.
pub fn validate_partition(partition: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for (j, block) in partition.iter().enumerate() {
        if block.is_empty() {
            return Err(FrameError::InvalidPartition(format!("block {} is empty", j + 1)));
        }
        for &k in block {
            if k >= n {
                return Err(FrameError::InvalidPartition(format!("index {} outside 1..{}", k + 1, n)));
            }
            if seen[k] {
                return Err(FrameError::InvalidPartition(format!("index {} appears twice", k + 1)));
            }
            seen[k] = true;
        }
    }
    if let Some(k) = seen.iter().position(|&s| !s) {
        return Err(FrameError::InvalidPartition(format!("index {} is not covered", k + 1)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBounds {
    pub lower: f64,
    pub upper: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCertificate {
    /// Optimal bounds `(m, M)` of the original system.
    pub frame_lower: f64,
    pub frame_upper: f64,
    pub m_inf: f64,
    pub m_sup: f64,
    /// `m / M_sup`.
    pub sandwich_lower: f64,
    /// `M / m_inf`.
    pub sandwich_upper: f64,
    /// Extremes of `Σ_j ‖π_j f‖²` over the unit probes.
    pub observed_min: f64,
    pub observed_max: f64,
    /// Largest `Σ_j m_j ‖π_j f‖² / ‖f‖²` over the probes, bounded by `M`.
    pub weighted_max: f64,
    pub probes: usize,
    /// Largest relative violation of any certified inequality (0 if none).
    pub max_violation: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionFromFrame {
    /// Block spans with weights `√m_j`.
    pub fusion: FusionSystem,
    pub local: Vec<LocalBounds>,
    pub certificate: SandwichCertificate,
}

/// Group the atoms of `sys` by `partition` (0-based indices), take the span
/// of each group as a subspace, and certify the sandwich
/// `m/M_sup ≤ Σ_j ‖π_j f‖² ≤ M/m_inf` on random unit probes together with
/// `Σ_j m_j ‖π_j f‖² ≤ M ‖f‖²`.
pub fn fusion_from_frame<R: Rng + ?Sized>(
    sys: &VectorSystem,
    partition: &[Vec<usize>],
    probes: usize,
    rng: &mut R,
) -> Result<FusionFromFrame> {
    validate_partition(partition, sys.len())?;
    let a = sys.synthesis_matrix();
    let mut blocks = Vec::with_capacity(partition.len());
    let mut local = Vec::with_capacity(partition.len());
    for (j, block) in partition.iter().enumerate() {
        let cols = CMat::from_fn(sys.dim(), block.len(), |r, c| a[(r, block[c])]);
        let basis = orthonormal_range(&cols, RANK_REL_TOL);
        if basis.ncols() == 0 {
            return Err(FrameError::InvalidPartition(format!("block {} spans the zero subspace", j + 1)));
        }
        let in_block = VectorSystem::new(basis.adjoint() * &cols, None, format!("block {}", j + 1))?;
        let b = optimal_bounds(&in_block);
        local.push(LocalBounds {
            lower: b.lower,
            upper: b.upper,
            rank: basis.ncols(),
        });
        blocks.push(basis);
    }
    let weights = local.iter().map(|l| l.lower.sqrt()).collect();
    let fusion = FusionSystem::new(sys.dim(), blocks, weights)?;
    let global = optimal_bounds(sys);
    let unit = fusion.with_weights(vec![1.0; fusion.len()])?;

    let m_inf = local.iter().map(|l| l.lower).fold(f64::INFINITY, f64::min);
    let m_sup = local.iter().map(|l| l.upper).fold(0.0, f64::max);
    let sandwich_lower = global.lower / m_sup;
    let sandwich_upper = global.upper / m_inf;
    let mut observed_min = f64::INFINITY;
    let mut observed_max: f64 = 0.0;
    let mut weighted_max: f64 = 0.0;
    let mut max_violation: f64 = 0.0;
    for _ in 0..probes {
        let f = random::unit_vector(rng, sys.dim());
        let q = unit.quadratic_form(&f);
        let w = fusion.quadratic_form(&f);
        observed_min = observed_min.min(q);
        observed_max = observed_max.max(q);
        weighted_max = weighted_max.max(w);
        max_violation = max_violation
            .max((sandwich_lower - q) / sandwich_lower)
            .max((q - sandwich_upper) / sandwich_upper)
            .max((w - global.upper) / global.upper);
    }
    let certificate = SandwichCertificate {
        frame_lower: global.lower,
        frame_upper: global.upper,
        m_inf,
        m_sup,
        sandwich_lower,
        sandwich_upper,
        observed_min,
        observed_max,
        weighted_max,
        probes,
        holds: global.total && max_violation <= CERTIFICATE_SLACK,
        max_violation: max_violation.max(0.0),
    };
    Ok(FusionFromFrame {
        fusion,
        local,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFromFusion {
    /// The union `{v_j B_j ψ_{ij}}`.
    pub system: VectorSystem,
    /// `M = max_j` of the local upper bounds.
    pub local_upper: f64,
    /// `B`, the upper bound of the fusion system.
    pub fusion_upper: f64,
    /// `M·B`.
    pub certified_bound: f64,
    /// Largest `Σ_{j,i} v_j² |⟨B_j ψ_{ij}, f⟩|² / ‖f‖²` over the probes.
    pub observed_max: f64,
    pub holds: bool,
}

/// Assemble local systems (in block coordinates) into one system on `C^d`
/// and certify the upper bound `M·B` on random probes.
pub fn frame_from_fusion<R: Rng + ?Sized>(
    fs: &FusionSystem,
    local_systems: &[VectorSystem],
    probes: usize,
    rng: &mut R,
) -> Result<FrameFromFusion> {
    if local_systems.len() != fs.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "{} local systems for {} blocks",
            local_systems.len(),
            fs.len()
        )));
    }
    let mut columns = Vec::new();
    let mut local_upper: f64 = 0.0;
    for (j, ((b, &v), loc)) in fs.blocks.iter().zip(&fs.weights).zip(local_systems).enumerate() {
        if loc.dim() != b.ncols() {
            return Err(FrameError::DimensionMismatch(format!(
                "local system {} lives in dimension {}, block has rank {}",
                j + 1,
                loc.dim(),
                b.ncols()
            )));
        }
        local_upper = local_upper.max(optimal_bounds(loc).upper);
        let lifted = (b * loc.synthesis_matrix()) * crate::linalg::real(v);
        columns.extend(lifted.column_iter().map(|c| c.into_owned()));
    }
    let system = VectorSystem::from_columns(&columns, "frame_from_fusion")?;
    let fusion_upper = fusion_operator_bounds(fs).upper;
    let certified_bound = local_upper * fusion_upper;
    let a = system.synthesis_matrix();
    let mut observed_max: f64 = 0.0;
    for _ in 0..probes {
        let f = random::unit_vector(rng, fs.dim());
        observed_max = observed_max.max((a.adjoint() * f).norm_squared());
    }
    let exact = optimal_bounds(&system).upper;
    let holds = observed_max.max(exact) <= certified_bound * (1.0 + CERTIFICATE_SLACK);
    Ok(FrameFromFusion {
        system,
        local_upper,
        fusion_upper,
        certified_bound,
        observed_max,
        holds,
    })
}
