//! The Hilbert scales `H_n = Dom(S^{-n/2})` and `𝕳_n = Dom(G^{-n/2})`.
//!
//! At a total snapshot every scale space is `C^d` (resp. the range of `C`)
//! with the norm `‖S^{-n/2} f‖` (resp. `⟨c, G^{-n} c⟩^{1/2}`); negative
//! indices stand in for the distributional side of the scale. Powers go
//! through the eigendecomposition with the overflow guard of
//! [`OVERFLOW_GUARD`](crate::calculus::OVERFLOW_GUARD).

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{Generator, TruncationFamily, VectorSystem};
use crate::calculus::{optimal_bounds, BoundsReport, FrameCalculus, SpectralFrameData, OVERFLOW_GUARD};
use crate::error::{FrameError, Result};
use crate::linalg::{inner, CVec};
use crate::random;

pub const DEFAULT_N_MAX: usize = 8;
/// Maximal relative distance of a coefficient vector from the range of `C`.
pub const RANGE_TOL: f64 = 1e-8;
/// Cauchy gap between the two largest truncations for end-space tagging.
pub const CAUCHY_GAP: f64 = 1e-6;
/// Minimal tail-decay exponent of partial-sum increments counted as convergent.
pub const MIN_TAIL_DECAY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSide {
    /// `H_n`, built on `S`.
    Vector,
    /// `𝕳_n`, built on `G`.
    Coefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleNorm {
    pub index: i32,
    pub value: f64,
    pub side: ScaleSide,
}

/// A system viewed through its two Hilbert scales.
#[derive(Debug)]
pub struct HilbertScale<'a> {
    calc: FrameCalculus<'a>,
    n_max: usize,
    gram: OnceCell<SpectralFrameData>,
}

impl<'a> HilbertScale<'a> {
    pub fn new(sys: &'a VectorSystem, n_max: usize) -> Result<Self> {
        let calc = FrameCalculus::new(sys);
        calc.require_total()?;
        Ok(Self {
            calc,
            n_max,
            gram: OnceCell::new(),
        })
    }

    pub fn calculus(&self) -> &FrameCalculus<'a> {
        &self.calc
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn gram_spectrum(&self) -> &SpectralFrameData {
        self.gram.get_or_init(|| SpectralFrameData::from_operator(self.calc.gram()))
    }

    fn check_index(&self, n: i32, limit: usize) -> Result<()> {
        if n.unsigned_abs() as usize > limit {
            return Err(FrameError::DomainViolation(format!(
                "scale index {} outside ±{}",
                n, limit
            )));
        }
        Ok(())
    }

    fn check_vector(&self, f: &CVec) -> Result<()> {
        if f.len() != self.calc.system().dim() {
            return Err(FrameError::DimensionMismatch(format!(
                "vector of length {} for dim {}",
                f.len(),
                self.calc.system().dim()
            )));
        }
        Ok(())
    }

    fn check_range(&self, c: &CVec) -> Result<()> {
        let res = self.calc.range_residual(c)?;
        if res > RANGE_TOL {
            return Err(FrameError::OffRange { residual: res });
        }
        Ok(())
    }

    /// `⟨f, g⟩_{H_n} = ⟨f, S^{-n} g⟩`.
    pub fn inner(&self, f: &CVec, g: &CVec, n: i32) -> Result<Complex64> {
        self.check_index(n, self.n_max)?;
        self.check_vector(f)?;
        self.check_vector(g)?;
        let sg = self.calc.spectral().apply_power(g, -(n as f64))?;
        Ok(inner(f, &sg))
    }

    /// `‖S^{-n/2} f‖`.
    pub fn norm(&self, f: &CVec, n: i32) -> Result<ScaleNorm> {
        self.check_index(n, self.n_max)?;
        self.check_vector(f)?;
        let value = if n == 0 {
            f.norm()
        } else {
            self.calc.spectral().apply_power(f, -(n as f64) / 2.0)?.norm()
        };
        Ok(ScaleNorm {
            index: n,
            value,
            side: ScaleSide::Vector,
        })
    }

    /// `⟨c, e⟩_{𝕳_n} = ⟨c, G^{-n} e⟩` with the pseudo-inverse on the range.
    pub fn seq_inner(&self, c: &CVec, e: &CVec, n: i32) -> Result<Complex64> {
        self.check_index(n, self.n_max)?;
        self.check_range(c)?;
        self.check_range(e)?;
        let ge = if n == 0 {
            e.clone()
        } else {
            self.gram_spectrum().apply_power(e, -(n as f64))?
        };
        Ok(inner(c, &ge))
    }

    /// `⟨c, G^{-n} c⟩^{1/2}`.
    pub fn seq_norm(&self, c: &CVec, n: i32) -> Result<ScaleNorm> {
        self.check_index(n, self.n_max)?;
        self.check_range(c)?;
        let value = if n == 0 {
            c.norm()
        } else {
            self.gram_spectrum().quadratic_power(c, -(n as f64))?.max(0.0).sqrt()
        };
        Ok(ScaleNorm {
            index: n,
            value,
            side: ScaleSide::Coefficient,
        })
    }

    /// Largest relative defect of `⟨Cf, Cg⟩_{𝕳_{n+1}} = ⟨f, g⟩_{H_n}` over
    /// random pairs.
    pub fn isometry_defect<R: Rng + ?Sized>(&self, n: i32, trials: usize, rng: &mut R) -> Result<f64> {
        self.check_index(n, self.n_max.saturating_sub(1))?;
        let d = self.calc.system().dim();
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let f = random::gaussian_vector(rng, d);
            let g = random::gaussian_vector(rng, d);
            let cf = self.calc.analysis(&f)?;
            let cg = self.calc.analysis(&g)?;
            let lhs = self.seq_inner(&cf, &cg, n + 1)?;
            let rhs = self.inner(&f, &g, n)?;
            let scale = self.norm(&f, n)?.value * self.norm(&g, n)?.value;
            worst = worst.max((lhs - rhs).norm() / scale);
        }
        Ok(worst)
    }

    /// Atoms `S^{n/2} ψ_k` and their bounds measured in `H_n`.
    pub fn transported_system(&self, n: i32) -> Result<TransportedSystem> {
        self.check_index(n, self.n_max)?;
        let sys = self.calc.system();
        let spec = self.calc.spectral();
        let forward = spec.power_matrix(n as f64 / 2.0)?;
        let backward = spec.power_matrix(-(n as f64) / 2.0)?;
        let transported = VectorSystem::new(
            &forward * sys.atoms(),
            sys.weights().map(|w| w.to_vec()),
            format!("S^({}/2)·{}", n, sys.label()),
        )?;
        // S^{-n/2} is unitary from H_n onto H_0, so the H_n-bounds are the
        // ordinary bounds of the pulled-back atoms.
        let pulled_back = VectorSystem::new(
            &backward * transported.atoms(),
            sys.weights().map(|w| w.to_vec()),
            "pullback",
        )?;
        Ok(TransportedSystem {
            index: n,
            bounds_in_scale: optimal_bounds(&pulled_back),
            system: transported,
        })
    }

    /// `f̂ = Σ_k ⟨ψ_k, S⁻¹f⟩ ψ_k` and `‖f̂ − f‖_{H_{−m}} / ‖f‖_{H_{−m}}`.
    pub fn weak_reconstruct(&self, f: &CVec, m: i32) -> Result<(CVec, f64)> {
        self.check_index(m, self.n_max)?;
        self.check_vector(f)?;
        let sinv_f = self.calc.spectral().apply_power(f, -1.0)?;
        let coeffs = self.calc.analysis(&sinv_f)?;
        let rebuilt = self.calc.synthesis(&coeffs)?;
        let denom = self.norm(f, -m)?.value;
        let residual = if denom == 0.0 {
            self.norm(&(&rebuilt - f), -m)?.value
        } else {
            self.norm(&(&rebuilt - f), -m)?.value / denom
        };
        Ok((rebuilt, residual))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportedSystem {
    pub index: i32,
    pub system: VectorSystem,
    pub bounds_in_scale: BoundsReport,
}

pub fn scale_norm(sys: &VectorSystem, f: &CVec, n: i32) -> Result<ScaleNorm> {
    HilbertScale::new(sys, DEFAULT_N_MAX)?.norm(f, n)
}

pub fn seq_scale_norm(sys: &VectorSystem, c: &CVec, n: i32) -> Result<ScaleNorm> {
    HilbertScale::new(sys, DEFAULT_N_MAX)?.seq_norm(c, n)
}

pub fn isometry_defect<R: Rng + ?Sized>(sys: &VectorSystem, n: i32, trials: usize, rng: &mut R) -> Result<f64> {
    HilbertScale::new(sys, DEFAULT_N_MAX)?.isometry_defect(n, trials, rng)
}

pub fn transported_system(sys: &VectorSystem, n: i32) -> Result<TransportedSystem> {
    HilbertScale::new(sys, DEFAULT_N_MAX)?.transported_system(n)
}

pub fn weak_reconstruct(sys: &VectorSystem, f: &CVec, m: i32) -> Result<(CVec, f64)> {
    HilbertScale::new(sys, DEFAULT_N_MAX)?.weak_reconstruct(f, m)
}

/// Closed-form coefficient sequence `k ↦ c_k` (1-based `k`).
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffRule {
    /// `c_k = k^p`.
    Power(f64),
    /// `c_k = e^{−a k}`.
    Exponential(f64),
    /// Listed values, zero afterwards.
    Finite(Vec<f64>),
}

impl CoeffRule {
    pub fn coefficient(&self, k: usize) -> f64 {
        match self {
            CoeffRule::Power(p) => (k as f64).powf(*p),
            CoeffRule::Exponential(a) => (-a * k as f64).exp(),
            CoeffRule::Finite(list) => list.get(k - 1).copied().unwrap_or(0.0),
        }
    }
}

impl fmt::Display for CoeffRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRule::Power(p) => write!(f, "k^{}", p),
            CoeffRule::Exponential(a) => write!(f, "exp(-{}k)", a),
            CoeffRule::Finite(list) => {
                let items: Vec<String> = list.iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", items.join(","))
            }
        }
    }
}

impl FromStr for CoeffRule {
    type Err = FrameError;

    /// Accepts `k^p`, `1/k^p`, `exp(-k)`, `exp(-a k)`, or `[c1,c2,...]`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || FrameError::InvalidInput(format!("unrecognized coefficient rule '{}'", s));
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            return Ok(CoeffRule::Finite(
                inner.split(',').filter(|x| !x.is_empty()).map(num).collect::<Result<_>>()?,
            ));
        }
        if let Some(p) = t.strip_prefix("k^") {
            return Ok(CoeffRule::Power(num(p)?));
        }
        if let Some(p) = t.strip_prefix("1/k^") {
            return Ok(CoeffRule::Power(-num(p)?));
        }
        if let Some(body) = t.strip_prefix("exp(-").and_then(|r| r.strip_suffix(')')) {
            let a = body.strip_suffix('k').ok_or_else(bad)?.trim_end_matches('*');
            return Ok(CoeffRule::Exponential(if a.is_empty() { 1.0 } else { num(a)? }));
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthTag {
    FastDecreasing,
    PolynomialOrder(usize),
    Divergent,
}

impl Serialize for GrowthTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            tag: &'static str,
            order: Option<usize>,
        }
        let repr = match self {
            GrowthTag::FastDecreasing => Repr { tag: "FastDecreasing", order: None },
            GrowthTag::PolynomialOrder(p) => Repr { tag: "PolynomialOrder", order: Some(*p) },
            GrowthTag::Divergent => Repr { tag: "Divergent", order: None },
        };
        repr.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndSpaceProbe {
    /// `(n, ‖c‖_{𝕳_n})` at the largest truncation.
    pub ladder: Vec<(usize, f64)>,
    /// Whether the `n`-norm converges as the truncation grows.
    pub converged: Vec<bool>,
    pub growth: GrowthTag,
}

/// `⟨c, G^p c⟩` for `G = diag(values)`, same conventions as
/// [`SpectralFrameData::quadratic_power`] without forming dense matrices.
fn diagonal_quadratic_power(values: &[f64], c: &[f64], p: f64) -> Result<f64> {
    let lambda_max = values.iter().copied().fold(0.0, f64::max);
    let threshold = crate::linalg::rank_threshold(lambda_max);
    let mut acc = 0.0;
    for (&lambda, &ck) in values.iter().zip(c) {
        if ck == 0.0 {
            continue;
        }
        let s = if p == 0.0 {
            1.0
        } else if lambda > threshold {
            lambda.powf(p)
        } else {
            0.0
        };
        if s.is_nan() || s > OVERFLOW_GUARD {
            return Err(FrameError::DomainViolation(format!(
                "λ^{} = {:.3e} exceeds the overflow guard",
                p, s
            )));
        }
        acc += s * ck * ck;
    }
    Ok(acc)
}

/// Decide from partial sums `q_t` (squared norms at sizes `N_t`) whether
/// the series converges.
fn partial_sums_converge(sizes: &[usize], q: &[f64]) -> bool {
    let t = q.len();
    let (q1, q2, q3) = (q[t - 3], q[t - 2], q[t - 1]);
    if !q3.is_finite() {
        return false;
    }
    if q3 == 0.0 || (q3.sqrt() - q2.sqrt()).abs() <= CAUCHY_GAP * q3.sqrt() {
        return true;
    }
    let (d1, d2) = (q2 - q1, q3 - q2);
    if d2 <= 0.0 {
        return true;
    }
    if d1 <= 0.0 {
        return false;
    }
    let decay = (d1 / d2).ln() / (sizes[t - 1] as f64 / sizes[t - 2] as f64).ln();
    decay >= MIN_TAIL_DECAY
}

/// Tag the decay class of `coeffs` through the `𝕳_n` norms of a weighted
/// diagonal family, `n = 0..=n_max`.
pub fn end_space_probe(fam: &TruncationFamily, coeffs: &CoeffRule, n_max: usize) -> Result<EndSpaceProbe> {
    let rule = match fam.generator() {
        Generator::WeightedDiag { rule } => rule,
        _ => {
            return Err(FrameError::InvalidInput(
                "end-space probing needs a weighted_diag family".into(),
            ))
        }
    };
    let sizes = fam.sizes();
    // q[n][t] = ‖c‖²_{𝕳_n} at size t
    let mut q = vec![Vec::with_capacity(sizes.len()); n_max + 1];
    for &size in sizes {
        // G = diag(m_k²) for a weighted diagonal snapshot
        let gram: Vec<f64> = rule.weights(size)?.iter().map(|m| m * m).collect();
        let c: Vec<f64> = (1..=size).map(|k| coeffs.coefficient(k)).collect();
        for (n, row) in q.iter_mut().enumerate() {
            row.push(diagonal_quadratic_power(&gram, &c, -(n as f64)).unwrap_or(f64::INFINITY));
        }
    }
    let converged: Vec<bool> = q.iter().map(|row| partial_sums_converge(sizes, row)).collect();
    let leading = converged.iter().take_while(|&&c| c).count();
    let growth = if leading == converged.len() {
        GrowthTag::FastDecreasing
    } else if leading > 0 && converged[leading..].iter().all(|&c| !c) {
        GrowthTag::PolynomialOrder(leading - 1)
    } else {
        GrowthTag::Divergent
    };
    let ladder = q.iter().enumerate().map(|(n, row)| (n, row.last().unwrap().sqrt())).collect();
    Ok(EndSpaceProbe { ladder, converged, growth })
}
