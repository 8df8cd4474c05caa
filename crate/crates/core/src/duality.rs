//! Dual pairs: verification, duals of lower semi-frames, weighted-shift
//! duals, and the Bessel dual-pair dichotomy across truncation families.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{TruncationFamily, VectorSystem};
use crate::calculus::FrameCalculus;
use crate::classify::{classify_systems, SemiFrameVerdict, DEFAULT_TAU, FLAT_SLOPE, TREND_SLOPE};
use crate::error::{FrameError, Result};
use crate::linalg::{basis_vector, spectral_norm, CMat, CVec};
use crate::random;

pub const DUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPairReport {
    /// Max over probes of `‖Σ⟨φ_k, f⟩ψ_k − f‖ / ‖f‖`.
    pub max_residual: f64,
    /// Same with `ψ` and `φ` exchanged.
    pub symmetric_residual: f64,
    /// `‖D_ψ C_φ − I‖` in operator norm.
    pub matrix_defect: f64,
    /// `‖D_φ C_ψ − I‖` in operator norm.
    pub symmetric_matrix_defect: f64,
    pub is_dual: bool,
}

fn reconstruction_residual(d_psi: &CMat, d_phi: &CMat, probes: &[CVec]) -> f64 {
    probes
        .iter()
        .map(|f| {
            let rebuilt = d_psi * (d_phi.adjoint() * f);
            (rebuilt - f).norm() / f.norm()
        })
        .fold(0.0, f64::max)
}

/// Check `f = Σ⟨φ_k, f⟩ψ_k` (and the swapped expansion) on `probes` random
/// unit vectors plus every canonical basis vector.
pub fn is_dual_pair<R: Rng + ?Sized>(
    psi: &VectorSystem,
    phi: &VectorSystem,
    probes: usize,
    rng: &mut R,
) -> Result<DualPairReport> {
    if psi.dim() != phi.dim() || psi.len() != phi.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "systems of shape {}x{} and {}x{}",
            psi.dim(),
            psi.len(),
            phi.dim(),
            phi.len()
        )));
    }
    let d = psi.dim();
    let a_psi = psi.synthesis_matrix();
    let a_phi = phi.synthesis_matrix();
    let mut vectors: Vec<CVec> = (0..d).map(|k| basis_vector(d, k)).collect();
    vectors.extend((0..probes).map(|_| random::unit_vector(rng, d)));

    let max_residual = reconstruction_residual(&a_psi, &a_phi, &vectors);
    let symmetric_residual = reconstruction_residual(&a_phi, &a_psi, &vectors);
    let id = CMat::identity(d, d);
    let matrix_defect = spectral_norm(&(&a_psi * a_phi.adjoint() - &id));
    let symmetric_matrix_defect = spectral_norm(&(&a_phi * a_psi.adjoint() - &id));
    let is_dual = matrix_defect <= DUAL_TOL && symmetric_matrix_defect <= DUAL_TOL;
    Ok(DualPairReport {
        max_residual,
        symmetric_residual,
        matrix_defect,
        symmetric_matrix_defect,
        is_dual,
    })
}

/// `ψ_k = S_φ⁻¹ φ_k`, an upper semi-frame dual to the lower semi-frame `φ`.
pub fn dual_from_lower(phi: &VectorSystem) -> Result<VectorSystem> {
    FrameCalculus::new(phi)
        .canonical_dual()
        .map(|d| d.with_label(format!("dual_from_lower({})", phi.label())))
}

/// Dual of `ψ` obtained through the reweighted system `φ_k = m_k ψ_k`:
/// the atoms `m̄_k S_φ⁻¹ φ_k`.
pub fn weighted_shift_dual(psi: &VectorSystem, m: &[Complex64]) -> Result<VectorSystem> {
    if m.len() != psi.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "{} multipliers for {} atoms",
            m.len(),
            psi.len()
        )));
    }
    if let Some(k) = m.iter().position(|z| *z == Complex64::new(0.0, 0.0) || !z.is_finite()) {
        return Err(FrameError::InvalidWeight(format!("multiplier {} is {}", k + 1, m[k])));
    }
    let mut shifted = psi.synthesis_matrix();
    for (k, &mk) in m.iter().enumerate() {
        shifted.column_mut(k).iter_mut().for_each(|z| *z *= mk);
    }
    let phi = VectorSystem::new(shifted, None, "shifted")?;
    let calc = FrameCalculus::new(&phi);
    calc.require_total()?;
    let mut dual = calc.spectral().pinv() * phi.atoms();
    // stored relative to ψ's weights so that the effective atoms are m̄_k S_φ⁻¹φ_k
    for (k, &mk) in m.iter().enumerate() {
        let s = mk.conj() / psi.weight(k);
        dual.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    VectorSystem::new(
        dual,
        psi.weights().map(|w| w.to_vec()),
        format!("weighted_shift_dual({})", psi.label()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselPairVerdict {
    /// Bounded upper trends come with lower trends bounded away from 0.
    #[serde(rename = "consistent-with-proposition")]
    ConsistentWithProposition,
    /// One lower trend tends to 0 while the partner's upper trend diverges.
    #[serde(rename = "witness-of-contrapositive")]
    WitnessOfContrapositive,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl BesselPairVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            BesselPairVerdict::ConsistentWithProposition => "consistent-with-proposition",
            BesselPairVerdict::WitnessOfContrapositive => "witness-of-contrapositive",
            BesselPairVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselPairReport {
    pub verdict: BesselPairVerdict,
    pub psi: SemiFrameVerdict,
    pub phi: SemiFrameVerdict,
    /// Largest `‖D_ψ C_φ − I‖` over the snapshots.
    pub max_dual_defect: f64,
}

/// Two dual families whose upper bounds both stay bounded must both be
/// frames; check the trends of a pair of dual families against that.
pub fn bessel_pair_check(psi_fam: &TruncationFamily, phi_fam: &TruncationFamily) -> Result<BesselPairReport> {
    if psi_fam.sizes() != phi_fam.sizes() {
        return Err(FrameError::DimensionMismatch("families must share their sizes".into()));
    }
    let psi_sys = psi_fam.realize_all()?;
    let phi_sys = phi_fam.realize_all()?;
    let mut max_dual_defect: f64 = 0.0;
    for ((&size, psi), phi) in psi_fam.sizes().iter().zip(&psi_sys).zip(&phi_sys) {
        if psi.dim() != phi.dim() || psi.len() != phi.len() {
            return Err(FrameError::DimensionMismatch(format!("snapshot shapes differ at size {}", size)));
        }
        let id = CMat::identity(psi.dim(), psi.dim());
        let a = psi.synthesis_matrix();
        let b = phi.synthesis_matrix();
        let defect = spectral_norm(&(&a * b.adjoint() - &id)).max(spectral_norm(&(&b * a.adjoint() - &id)));
        if defect > DUAL_TOL {
            return Err(FrameError::NotDualPair { size, defect });
        }
        max_dual_defect = max_dual_defect.max(defect);
    }
    let psi = classify_systems(psi_fam.sizes(), &psi_sys, DEFAULT_TAU)?;
    let phi = classify_systems(phi_fam.sizes(), &phi_sys, DEFAULT_TAU)?;
    let verdict = bessel_verdict(&psi, &phi);
    Ok(BesselPairReport {
        verdict,
        psi,
        phi,
        max_dual_defect,
    })
}

fn bessel_verdict(psi: &SemiFrameVerdict, phi: &SemiFrameVerdict) -> BesselPairVerdict {
    let lower_vanishes = |v: &SemiFrameVerdict| v.slope_lower <= -TREND_SLOPE;
    let lower_bounded = |v: &SemiFrameVerdict| v.slope_lower >= -FLAT_SLOPE;
    let upper_diverges = |v: &SemiFrameVerdict| v.slope_upper >= TREND_SLOPE;
    let upper_bounded = |v: &SemiFrameVerdict| v.slope_upper <= FLAT_SLOPE;

    if (lower_vanishes(psi) && upper_diverges(phi)) || (lower_vanishes(phi) && upper_diverges(psi)) {
        BesselPairVerdict::WitnessOfContrapositive
    } else if !(upper_bounded(psi) && upper_bounded(phi)) || (lower_bounded(psi) && lower_bounded(phi)) {
        BesselPairVerdict::ConsistentWithProposition
    } else {
        BesselPairVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{make_weighted_diag, WeightRule};
    use crate::calculus::canonical_dual;
    use crate::linalg::real;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(rule: impl Fn(f64) -> f64, n: usize) -> VectorSystem {
        let w: Vec<f64> = (1..=n).map(|k| rule(k as f64)).collect();
        make_weighted_diag(&w, n).unwrap()
    }

    #[test]
    fn diagonal_pair_is_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rep = is_dual_pair(&diag(|k| 1.0 / k, 10), &diag(|k| k, 10), 5, &mut rng).unwrap();
        assert!(rep.is_dual);
        assert!(rep.max_residual < 1e-12 && rep.symmetric_residual < 1e-12);
        let onb = diag(|_| 1.0, 4);
        assert!(is_dual_pair(&onb, &onb, 5, &mut rng).unwrap().is_dual);
        let rep = is_dual_pair(&onb, &diag(|k| k, 4), 5, &mut rng).unwrap();
        assert!(!rep.is_dual);
    }

    #[test]
    fn random_frame_and_canonical_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = random::gaussian_system(&mut rng, 5, 9);
        let dual = canonical_dual(&sys).unwrap();
        assert!(is_dual_pair(&sys, &dual, 10, &mut rng).unwrap().is_dual);
    }

    #[test]
    fn shape_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            is_dual_pair(&diag(|k| k, 3), &diag(|k| k, 4), 1, &mut rng),
            Err(FrameError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dual_of_lower_diagonal() {
        let psi = dual_from_lower(&diag(|k| k, 6)).unwrap();
        for k in 0..6 {
            let kf = (k + 1) as f64;
            assert!((psi.synthesis_matrix()[(k, k)] - real(1.0 / kf)).norm() < 1e-14);
        }
        let tight = VectorSystem::new(CMat::identity(3, 3) * real(3.0), None, "3I").unwrap();
        let d = dual_from_lower(&tight).unwrap();
        assert!((d.atoms() - CMat::identity(3, 3) * real(1.0 / 3.0)).norm() < 1e-14);
        let partial = make_weighted_diag(&[1.0], 2).unwrap();
        assert!(matches!(dual_from_lower(&partial), Err(FrameError::NotTotal { .. })));
    }

    #[test]
    fn weighted_shift_examples() {
        let psi = diag(|k| 1.0 / k, 5);
        let m: Vec<Complex64> = (1..=5).map(|k| real(k as f64)).collect();
        let dual = weighted_shift_dual(&psi, &m).unwrap();
        let canon = canonical_dual(&psi).unwrap();
        assert!((dual.synthesis_matrix() - canon.synthesis_matrix()).norm() < 1e-12);

        let ones = vec![real(1.0); 5];
        let same = weighted_shift_dual(&psi, &ones).unwrap();
        assert!((same.synthesis_matrix() - canon.synthesis_matrix()).norm() < 1e-12);

        let mut zero = ones.clone();
        zero[2] = real(0.0);
        assert!(matches!(weighted_shift_dual(&psi, &zero), Err(FrameError::InvalidWeight(_))));
    }

    #[test]
    fn weighted_shift_dual_of_weighted_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = random::gaussian_system(&mut rng, 4, 7);
        let psi = VectorSystem::new(base.atoms().clone(), Some(vec![0.5, 2.0, 1.0, 3.0, 0.7, 1.1, 1.9]), "w").unwrap();
        let m: Vec<Complex64> = (0..7).map(|_| random::gaussian(&mut rng) + real(0.1)).collect();
        let dual = weighted_shift_dual(&psi, &m).unwrap();
        let rep = is_dual_pair(&psi, &dual, 10, &mut rng).unwrap();
        assert!(rep.matrix_defect < 1e-10, "{:?}", rep);
    }

    #[test]
    fn bessel_pair_verdicts() {
        let sizes = vec![8, 16, 32, 64];
        let psi = TruncationFamily::weighted_diag(WeightRule::Power(-1.0), sizes.clone()).unwrap();
        let phi = TruncationFamily::weighted_diag(WeightRule::Power(1.0), sizes.clone()).unwrap();
        let rep = bessel_pair_check(&psi, &phi).unwrap();
        assert_eq!(rep.verdict, BesselPairVerdict::WitnessOfContrapositive);
        assert_eq!(bessel_pair_check(&phi, &psi).unwrap().verdict, BesselPairVerdict::WitnessOfContrapositive);

        let onb = TruncationFamily::weighted_diag(WeightRule::Constant(1.0), sizes.clone()).unwrap();
        assert_eq!(bessel_pair_check(&onb, &onb).unwrap().verdict, BesselPairVerdict::ConsistentWithProposition);

        let err = bessel_pair_check(&psi, &onb).unwrap_err();
        assert!(matches!(err, FrameError::NotDualPair { size: 8, .. }));
    }
}
