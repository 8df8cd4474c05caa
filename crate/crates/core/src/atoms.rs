//! Vector systems and the generators that build them.
//!
//! A [`VectorSystem`] is a finite indexed family of atoms in `C^d`, stored as
//! the columns of a `d x N` matrix, with optional nonzero real weights.
//! Infinite sequences are represented by a [`TruncationFamily`]: a symbolic
//! generator plus a list of nested truncation sizes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::json::{columns_from_json, columns_to_json, JsonComplex};
use crate::linalg::{real, CMat, CVec, ONE, ZERO};
use crate::random;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSystem {
    atoms: CMat,
    weights: Option<Vec<f64>>,
    label: String,
}

impl VectorSystem {
    pub fn new(atoms: CMat, weights: Option<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        if atoms.nrows() == 0 {
            return Err(FrameError::InvalidInput("d ≥ 1 required".into()));
        }
        if atoms.ncols() == 0 {
            return Err(FrameError::InvalidInput("N ≥ 1 required".into()));
        }
        if atoms.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FrameError::InvalidInput("atoms must be finite".into()));
        }
        if let Some(w) = &weights {
            if w.len() != atoms.ncols() {
                return Err(FrameError::DimensionMismatch(format!(
                    "{} weights for {} atoms",
                    w.len(),
                    atoms.ncols()
                )));
            }
            if let Some(k) = w.iter().position(|v| *v == 0.0 || !v.is_finite()) {
                return Err(FrameError::InvalidWeight(format!("weight {} is {}", k + 1, w[k])));
            }
        }
        Ok(Self {
            atoms,
            weights,
            label: label.into(),
        })
    }

    pub fn from_columns(columns: &[CVec], label: impl Into<String>) -> Result<Self> {
        let d = columns.first().map_or(0, |c| c.len());
        if let Some(bad) = columns.iter().position(|c| c.len() != d) {
            return Err(FrameError::DimensionMismatch(format!(
                "atom {} has length {}, expected {}",
                bad + 1,
                columns[bad].len(),
                d
            )));
        }
        Self::new(CMat::from_columns(columns), None, label)
    }

    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn len(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.ncols() == 0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Raw atoms as columns (weights not applied).
    pub fn atoms(&self) -> &CMat {
        &self.atoms
    }

    pub fn atom(&self, k: usize) -> CVec {
        self.atoms.column(k).into_owned()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[k])
    }

    /// Synthesis matrix: column `k` is `v_k ψ_k`.
    pub fn synthesis_matrix(&self) -> CMat {
        match &self.weights {
            None => self.atoms.clone(),
            Some(w) => {
                let mut m = self.atoms.clone();
                for (k, &v) in w.iter().enumerate() {
                    m.column_mut(k).scale_mut(v);
                }
                m
            }
        }
    }

    /// Same system with the weights folded into the atoms.
    pub fn unweighted(&self) -> Self {
        Self {
            atoms: self.synthesis_matrix(),
            weights: None,
            label: self.label.clone(),
        }
    }

    /// Every atom multiplied by the scalar `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            atoms: &self.atoms * s,
            weights: self.weights.clone(),
            label: self.label.clone(),
        }
    }

    /// Every atom mapped through the `d x d` operator `t`.
    pub fn mapped(&self, t: &CMat) -> Result<Self> {
        if t.nrows() != t.ncols() || t.ncols() != self.dim() {
            return Err(FrameError::DimensionMismatch(format!(
                "operator is {}x{}, system dim {}",
                t.nrows(),
                t.ncols(),
                self.dim()
            )));
        }
        Ok(Self {
            atoms: t * &self.atoms,
            weights: self.weights.clone(),
            label: self.label.clone(),
        })
    }

    pub fn to_file(&self) -> SystemFile {
        SystemFile {
            dim: self.dim(),
            atoms: columns_to_json(&self.atoms),
            weights: self.weights.clone(),
            label: Some(self.label.clone()),
        }
    }

    pub fn from_file(file: &SystemFile) -> Result<Self> {
        if file.dim == 0 {
            return Err(FrameError::InvalidInput("d ≥ 1 required".into()));
        }
        if file.atoms.is_empty() {
            return Err(FrameError::InvalidInput("N ≥ 1 required".into()));
        }
        let atoms = columns_from_json(file.dim, &file.atoms)?;
        Self::new(atoms, file.weights.clone(), file.label.clone().unwrap_or_default())
    }
}

/// On-disk form of a [`VectorSystem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub dim: usize,
    pub atoms: Vec<Vec<JsonComplex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Serialize for VectorSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = SystemFile::deserialize(d)?;
        VectorSystem::from_file(&file).map_err(serde::de::Error::custom)
    }
}

/// `ψ_k = m_k e_k` for `k = 1..N`, embedded in `C^d`.
pub fn make_weighted_diag(weights: &[f64], d: usize) -> Result<VectorSystem> {
    if weights.is_empty() {
        return Err(FrameError::InvalidInput("N ≥ 1 required".into()));
    }
    if d < weights.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "d = {} < N = {}",
            d,
            weights.len()
        )));
    }
    if let Some(k) = weights.iter().position(|w| *w == 0.0 || !w.is_finite()) {
        return Err(FrameError::InvalidWeight(format!("m_{} = {}", k + 1, weights[k])));
    }
    let atoms = CMat::from_fn(d, weights.len(), |r, k| if r == k { real(weights[k]) } else { ZERO });
    VectorSystem::new(atoms, None, format!("weighted_diag(N={}, d={})", weights.len(), d))
}

/// `ψ_k = V e_k` for `k = 1..N`.
pub fn make_operator_image(v: &CMat, n: usize) -> Result<VectorSystem> {
    if v.nrows() != v.ncols() {
        return Err(FrameError::DimensionMismatch(format!(
            "V must be square, got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    if n == 0 || n > v.ncols() {
        return Err(FrameError::DimensionMismatch(format!(
            "N = {} must lie in 1..={}",
            n,
            v.ncols()
        )));
    }
    VectorSystem::new(
        v.columns(0, n).into_owned(),
        None,
        format!("operator_image(N={}, d={})", n, v.nrows()),
    )
}

/// Finite Gabor system: `g_{m,n}[j] = e^{2πi·nb·j/d} · g[(j − ma) mod d]`.
///
/// Atoms are ordered with the time index `m` outermost.
pub fn make_finite_gabor(window: &CVec, a: usize, b: usize) -> Result<VectorSystem> {
    let d = window.len();
    if d == 0 {
        return Err(FrameError::InvalidWindow);
    }
    if a == 0 || !d.is_multiple_of(a) {
        return Err(FrameError::LatticeMismatch { param: "a", value: a, dim: d });
    }
    if b == 0 || !d.is_multiple_of(b) {
        return Err(FrameError::LatticeMismatch { param: "b", value: b, dim: d });
    }
    if window.iter().all(|z| *z == ZERO) {
        return Err(FrameError::InvalidWindow);
    }
    let (nt, nf) = (d / a, d / b);
    let mut atoms = CMat::zeros(d, nt * nf);
    for m in 0..nt {
        for n in 0..nf {
            let col = m * nf + n;
            for j in 0..d {
                let phase = 2.0 * PI * ((n * b * j) % d) as f64 / d as f64;
                let shifted = window[(j + d - (m * a) % d) % d];
                atoms[(j, col)] = Complex64::from_polar(1.0, phase) * shifted;
            }
        }
    }
    VectorSystem::new(atoms, None, format!("gabor(d={}, a={}, b={})", d, a, b))
}

/// Unit-norm periodized Gaussian `Σ_l exp(−π (j − l d)² / d)` on `Z_d`.
pub fn periodized_gaussian(d: usize) -> CVec {
    let mut g = CVec::from_fn(d, |j, _| {
        let s: f64 = (-3i64..=3)
            .map(|l| {
                let t = j as f64 - (l * d as i64) as f64;
                (-PI * t * t / d as f64).exp()
            })
            .sum();
        real(s)
    });
    let n = g.norm();
    g /= real(n);
    g
}

/// Closed-form weight sequence `k ↦ m_k` (1-based `k`).
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    /// `m_k = k^p`.
    Power(f64),
    /// `m_k = r^k`.
    Geometric(f64),
    Constant(f64),
    /// Explicit list; only defined up to its length.
    Explicit(Vec<f64>),
}

impl WeightRule {
    pub fn weight(&self, k: usize) -> Result<f64> {
        let kf = k as f64;
        let w = match self {
            WeightRule::Power(p) => kf.powf(*p),
            WeightRule::Geometric(r) => r.powf(kf),
            WeightRule::Constant(v) => *v,
            WeightRule::Explicit(list) => *list.get(k - 1).ok_or(FrameError::IndexError {
                index: k,
                len: list.len(),
            })?,
        };
        if w == 0.0 || !w.is_finite() {
            return Err(FrameError::InvalidWeight(format!("rule {} gives m_{} = {}", self, k, w)));
        }
        Ok(w)
    }

    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        (1..=n).map(|k| self.weight(k)).collect()
    }
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRule::Power(p) if *p == 1.0 => write!(f, "k"),
            WeightRule::Power(p) if *p == -1.0 => write!(f, "1/k"),
            WeightRule::Power(p) if *p < 0.0 => write!(f, "1/k^{}", -p),
            WeightRule::Power(p) => write!(f, "k^{}", p),
            WeightRule::Geometric(r) => write!(f, "{}^k", r),
            WeightRule::Constant(v) => write!(f, "{}", v),
            WeightRule::Explicit(list) => {
                let items: Vec<String> = list.iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", items.join(","))
            }
        }
    }
}

impl FromStr for WeightRule {
    type Err = FrameError;

    /// Accepts `k`, `1/k`, `k^p`, `1/k^p`, `r^k`, a constant, or `[a,b,...]`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || FrameError::InvalidInput(format!("unrecognized weight rule '{}'", s));
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let list = inner.split(',').filter(|x| !x.is_empty()).map(num).collect::<Result<Vec<_>>>()?;
            return Ok(WeightRule::Explicit(list));
        }
        if t == "k" {
            return Ok(WeightRule::Power(1.0));
        }
        if let Some(rest) = t.strip_prefix("1/k") {
            if rest.is_empty() {
                return Ok(WeightRule::Power(-1.0));
            }
            let p = rest.strip_prefix('^').ok_or_else(bad)?;
            return Ok(WeightRule::Power(-num(p)?));
        }
        if let Some(p) = t.strip_prefix("k^") {
            return Ok(WeightRule::Power(num(p)?));
        }
        if let Some(r) = t.strip_suffix("^k") {
            return Ok(WeightRule::Geometric(num(r)?));
        }
        Ok(WeightRule::Constant(num(&t)?))
    }
}

impl Serialize for WeightRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for WeightRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Gaussian,
    Delta,
    Constant,
}

impl WindowKind {
    pub fn sample(self, d: usize) -> CVec {
        match self {
            WindowKind::Gaussian => periodized_gaussian(d),
            WindowKind::Delta => crate::linalg::basis_vector(d, 0),
            WindowKind::Constant => CVec::from_element(d, real(1.0 / (d as f64).sqrt())),
        }
    }
}

/// Time-frequency lattice of a Gabor family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Lattice {
    /// `a = b = √d`; every size must be a perfect square.
    Critical,
    Fixed { a: usize, b: usize },
}

/// Generator rule of a [`TruncationFamily`].
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `ψ_k = m_k e_k` with `N = d`.
    WeightedDiag { rule: WeightRule },
    /// `ψ_k = V_N e_k` where `V_N = blockdiag(V, diag(padding(k)))` and `V`
    /// is a seeded perturbation of the identity of size `base_dim`.
    OperatorImage { seed: u64, base_dim: usize, padding: WeightRule },
    /// Sizes are the signal lengths `d`.
    Gabor { window: WindowKind, lattice: Lattice },
    /// Explicit enumeration `(basis index, weight)`; the truncation of size `N`
    /// keeps the first `N` entries and lives in the span of the indices seen.
    Enumerated { entries: Vec<(usize, f64)> },
    /// One prebuilt system per size.
    Systems { systems: Vec<VectorSystem> },
}

impl Generator {
    pub fn id(&self) -> &'static str {
        match self {
            Generator::WeightedDiag { .. } => "weighted_diag",
            Generator::OperatorImage { .. } => "operator_image",
            Generator::Gabor { .. } => "gabor",
            Generator::Enumerated { .. } | Generator::Systems { .. } => "custom",
        }
    }

    /// True when each truncation extends the previous one.
    pub fn is_nested(&self) -> bool {
        !matches!(self, Generator::Gabor { .. } | Generator::Systems { .. })
    }
}

/// Finite-truncation model of an infinite sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationFamily {
    generator: Generator,
    sizes: Vec<usize>,
}

impl TruncationFamily {
    pub fn new(generator: Generator, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(FrameError::InsufficientData(format!(
                "a family needs at least 3 sizes, got {}",
                sizes.len()
            )));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
            return Err(FrameError::InvalidInput("sizes must be positive and strictly increasing".into()));
        }
        match &generator {
            Generator::OperatorImage { base_dim, .. } if sizes[0] < *base_dim => {
                return Err(FrameError::DimensionMismatch(format!(
                    "smallest size {} below base dimension {}",
                    sizes[0], base_dim
                )))
            }
            Generator::Gabor { lattice, .. } => {
                for &d in &sizes {
                    let (a, b) = lattice_params(*lattice, d)?;
                    if d % a != 0 {
                        return Err(FrameError::LatticeMismatch { param: "a", value: a, dim: d });
                    }
                    if d % b != 0 {
                        return Err(FrameError::LatticeMismatch { param: "b", value: b, dim: d });
                    }
                }
            }
            Generator::Enumerated { entries } => {
                if entries.len() < *sizes.last().unwrap() {
                    return Err(FrameError::InvalidInput(format!(
                        "enumeration has {} entries, largest size is {}",
                        entries.len(),
                        sizes.last().unwrap()
                    )));
                }
                if let Some(bad) = entries.iter().find(|(i, w)| *i == 0 || *w == 0.0) {
                    return Err(FrameError::InvalidWeight(format!("bad enumeration entry {:?}", bad)));
                }
            }
            Generator::Systems { systems }
                if systems.len() != sizes.len() => {
                    return Err(FrameError::DimensionMismatch(format!(
                        "{} systems for {} sizes",
                        systems.len(),
                        sizes.len()
                    )));
                }
            _ => {}
        }
        Ok(Self { generator, sizes })
    }

    pub fn weighted_diag(rule: WeightRule, sizes: Vec<usize>) -> Result<Self> {
        Self::new(Generator::WeightedDiag { rule }, sizes)
    }

    /// Family with one explicit system per size.
    pub fn from_systems(sizes: Vec<usize>, systems: Vec<VectorSystem>) -> Result<Self> {
        Self::new(Generator::Systems { systems }, sizes)
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Replace the size list, keeping the generator.
    pub fn with_sizes(&self, sizes: Vec<usize>) -> Result<Self> {
        if matches!(self.generator, Generator::Systems { .. }) {
            return Err(FrameError::InvalidInput("sizes of an explicit family cannot be changed".into()));
        }
        Self::new(self.generator.clone(), sizes)
    }

    /// System at the 1-based truncation index `t`.
    pub fn realize_truncation(&self, t: usize) -> Result<VectorSystem> {
        if t == 0 || t > self.sizes.len() {
            return Err(FrameError::IndexError { index: t, len: self.sizes.len() });
        }
        let size = self.sizes[t - 1];
        let sys = match &self.generator {
            Generator::WeightedDiag { rule } => make_weighted_diag(&rule.weights(size)?, size)?,
            Generator::OperatorImage { seed, base_dim, padding } => {
                let v = padded_operator(*seed, *base_dim, padding, size)?;
                make_operator_image(&v, size)?
            }
            Generator::Gabor { window, lattice } => {
                let (a, b) = lattice_params(*lattice, size)?;
                make_finite_gabor(&window.sample(size), a, b)?
            }
            Generator::Enumerated { entries } => {
                let used = &entries[..size];
                let d = used.iter().map(|(i, _)| *i).max().unwrap_or(1);
                let atoms = CMat::from_fn(d, size, |r, k| if used[k].0 == r + 1 { real(used[k].1) } else { ZERO });
                VectorSystem::new(atoms, None, "enumerated")?
            }
            Generator::Systems { systems } => return Ok(systems[t - 1].clone()),
        };
        Ok(sys.with_label(format!("{}[N={}]", self.generator.id(), size)))
    }

    /// All truncations in order.
    pub fn realize_all(&self) -> Result<Vec<VectorSystem>> {
        (1..=self.sizes.len()).map(|t| self.realize_truncation(t)).collect()
    }

    pub fn to_file(&self) -> FamilyFile {
        let params = match &self.generator {
            Generator::WeightedDiag { rule } => serde_json::json!({ "rule": rule }),
            Generator::OperatorImage { seed, base_dim, padding } => {
                serde_json::json!({ "seed": seed, "base_dim": base_dim, "padding": padding })
            }
            Generator::Gabor { window, lattice } => serde_json::json!({ "window": window, "lattice": lattice }),
            Generator::Enumerated { entries } => serde_json::json!({ "entries": entries }),
            Generator::Systems { systems } => serde_json::json!({ "systems": systems }),
        };
        FamilyFile {
            generator: self.generator.id().to_string(),
            params,
            sizes: self.sizes.clone(),
        }
    }

    pub fn from_file(file: &FamilyFile) -> Result<Self> {
        let p = &file.params;
        let parse_err = |e: serde_json::Error| FrameError::InvalidInput(format!("family params: {}", e));
        let generator = match file.generator.as_str() {
            "weighted_diag" => {
                #[derive(Deserialize)]
                struct P {
                    rule: WeightRule,
                }
                let P { rule } = serde_json::from_value(p.clone()).map_err(parse_err)?;
                Generator::WeightedDiag { rule }
            }
            "operator_image" => {
                #[derive(Deserialize)]
                struct P {
                    seed: u64,
                    base_dim: usize,
                    #[serde(default = "unit_rule")]
                    padding: WeightRule,
                }
                let P { seed, base_dim, padding } = serde_json::from_value(p.clone()).map_err(parse_err)?;
                Generator::OperatorImage { seed, base_dim, padding }
            }
            "gabor" => {
                #[derive(Deserialize)]
                struct P {
                    window: WindowKind,
                    lattice: Lattice,
                }
                let P { window, lattice } = serde_json::from_value(p.clone()).map_err(parse_err)?;
                Generator::Gabor { window, lattice }
            }
            "custom" => {
                #[derive(Deserialize)]
                #[serde(untagged)]
                enum P {
                    Entries { entries: Vec<(usize, f64)> },
                    Systems { systems: Vec<VectorSystem> },
                }
                match serde_json::from_value(p.clone()).map_err(parse_err)? {
                    P::Entries { entries } => Generator::Enumerated { entries },
                    P::Systems { systems } => Generator::Systems { systems },
                }
            }
            other => return Err(FrameError::InvalidInput(format!("unknown generator '{}'", other))),
        };
        Self::new(generator, file.sizes.clone())
    }
}

fn unit_rule() -> WeightRule {
    WeightRule::Constant(1.0)
}

/// On-disk form of a [`TruncationFamily`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFile {
    pub generator: String,
    #[serde(default)]
    pub params: serde_json::Value,
    pub sizes: Vec<usize>,
}

fn lattice_params(lattice: Lattice, d: usize) -> Result<(usize, usize)> {
    match lattice {
        Lattice::Fixed { a, b } => Ok((a, b)),
        Lattice::Critical => {
            let r = (d as f64).sqrt().round() as usize;
            if r * r != d {
                return Err(FrameError::LatticeMismatch { param: "a", value: r, dim: d });
            }
            Ok((r, r))
        }
    }
}

/// `blockdiag(V, diag(padding(k)))` of size `n`, with `V = I + G / (2√b)` for a
/// seeded complex Gaussian `G`.
fn padded_operator(seed: u64, base_dim: usize, padding: &WeightRule, n: usize) -> Result<CMat> {
    if n < base_dim {
        return Err(FrameError::DimensionMismatch(format!(
            "size {} below base dimension {}",
            n, base_dim
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random::gaussian_matrix(&mut rng, base_dim, base_dim);
    let scale = 0.5 / (base_dim.max(1) as f64).sqrt();
    let mut v = CMat::identity(n, n);
    for i in 0..base_dim {
        for j in 0..base_dim {
            v[(i, j)] = if i == j { ONE } else { ZERO } + g[(i, j)] * scale;
        }
    }
    for k in base_dim..n {
        v[(k, k)] = real(padding.weight(k + 1)?);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_diag_matches_columns() {
        let sys = make_weighted_diag(&[1.0, 0.5, 1.0 / 3.0], 3).unwrap();
        assert_eq!(sys.len(), 3);
        assert_eq!(sys.atom(1)[1], real(0.5));
        assert_eq!(sys.atom(1)[0], ZERO);
        assert_eq!(sys.atom(2)[2], real(1.0 / 3.0));
        let onb = make_weighted_diag(&[1.0; 3], 3).unwrap();
        assert_eq!(onb.atoms(), &CMat::identity(3, 3));
    }

    #[test]
    fn weighted_diag_errors() {
        assert!(matches!(make_weighted_diag(&[1.0, 0.0], 2), Err(FrameError::InvalidWeight(_))));
        assert!(matches!(make_weighted_diag(&[1.0, 1.0, 1.0], 2), Err(FrameError::DimensionMismatch(_))));
    }

    #[test]
    fn operator_image_is_leading_columns() {
        let v = CMat::from_fn(4, 4, |i, j| real((i * 4 + j) as f64 + 1.0));
        let sys = make_operator_image(&v, 3).unwrap();
        assert_eq!(sys.atoms(), &v.columns(0, 3).into_owned());
        let rect = CMat::zeros(3, 4);
        assert!(matches!(make_operator_image(&rect, 2), Err(FrameError::DimensionMismatch(_))));
    }

    #[test]
    fn operator_image_of_diag_equals_weighted_diag() {
        let w: Vec<f64> = (1..=5).map(|k| 1.0 / k as f64).collect();
        let v = CMat::from_diagonal(&CVec::from_iterator(5, w.iter().map(|&x| real(x))));
        let a = make_operator_image(&v, 5).unwrap();
        let b = make_weighted_diag(&w, 5).unwrap();
        assert_eq!(a.atoms(), b.atoms());
    }

    #[test]
    fn gabor_counts_and_errors() {
        let g = make_finite_gabor(&crate::linalg::basis_vector(4, 0), 1, 1).unwrap();
        assert_eq!(g.len(), 16);
        assert!(matches!(
            make_finite_gabor(&periodized_gaussian(6), 4, 1),
            Err(FrameError::LatticeMismatch { param: "a", .. })
        ));
        assert!(matches!(
            make_finite_gabor(&periodized_gaussian(6), 2, 5),
            Err(FrameError::LatticeMismatch { param: "b", .. })
        ));
        assert!(matches!(make_finite_gabor(&CVec::zeros(4), 2, 2), Err(FrameError::InvalidWindow)));
    }

    #[test]
    fn gabor_atom_formula() {
        let w = periodized_gaussian(6);
        let g = make_finite_gabor(&w, 2, 3).unwrap();
        // m = 1, n = 1: e^{2πi·3j/6} · w[(j − 2) mod 6]
        let col = 2 + 1;
        for j in 0..6 {
            let expect = Complex64::from_polar(1.0, 2.0 * PI * 3.0 * j as f64 / 6.0) * w[(j + 4) % 6];
            assert!((g.atoms()[(j, col)] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn rules_parse_and_print() {
        for (s, rule) in [
            ("1/k", WeightRule::Power(-1.0)),
            ("k", WeightRule::Power(1.0)),
            ("1/k^2", WeightRule::Power(-2.0)),
            ("k^-4", WeightRule::Power(-4.0)),
            ("0.5^k", WeightRule::Geometric(0.5)),
            ("1", WeightRule::Constant(1.0)),
            ("[1, 0.5]", WeightRule::Explicit(vec![1.0, 0.5])),
        ] {
            assert_eq!(s.parse::<WeightRule>().unwrap(), rule, "{}", s);
            assert_eq!(rule.to_string().parse::<WeightRule>().unwrap(), rule);
        }
        assert!("sin(k)".parse::<WeightRule>().is_err());
        assert!(matches!(WeightRule::Explicit(vec![1.0]).weight(2), Err(FrameError::IndexError { .. })));
    }

    #[test]
    fn truncation_examples() {
        let fam = TruncationFamily::weighted_diag(WeightRule::Power(-1.0), vec![4, 8, 16]).unwrap();
        let s = fam.realize_truncation(1).unwrap();
        let expect = make_weighted_diag(&[1.0, 0.5, 1.0 / 3.0, 0.25], 4).unwrap();
        assert_eq!(s.atoms(), expect.atoms());
        assert!(matches!(fam.realize_truncation(0), Err(FrameError::IndexError { .. })));
        assert!(matches!(fam.realize_truncation(4), Err(FrameError::IndexError { .. })));

        let op = TruncationFamily::new(
            Generator::OperatorImage { seed: 7, base_dim: 3, padding: WeightRule::Constant(1.0) },
            vec![4, 6, 9],
        )
        .unwrap();
        let s2 = op.realize_truncation(2).unwrap();
        assert_eq!((s2.dim(), s2.len()), (6, 6));
        assert_eq!(op.realize_truncation(2).unwrap(), s2);

        let gab = TruncationFamily::new(
            Generator::Gabor { window: WindowKind::Gaussian, lattice: Lattice::Critical },
            vec![4, 16, 64],
        )
        .unwrap();
        let g = gab.realize_truncation(2).unwrap();
        assert_eq!(g.len(), 16 * 16 / (4 * 4));
    }

    #[test]
    fn family_validation() {
        assert!(matches!(
            TruncationFamily::weighted_diag(WeightRule::Power(-1.0), vec![4, 8]),
            Err(FrameError::InsufficientData(_))
        ));
        assert!(TruncationFamily::weighted_diag(WeightRule::Power(-1.0), vec![4, 4, 8]).is_err());
        assert!(TruncationFamily::new(
            Generator::Gabor { window: WindowKind::Gaussian, lattice: Lattice::Critical },
            vec![4, 8, 16]
        )
        .is_err());
    }

    #[test]
    fn enumerated_family_repeats_directions() {
        // (½e₁, ½e₂, ¼e₁, ⅓e₃, ⅛e₁, ¼e₄)
        let entries = vec![(1, 0.5), (2, 0.5), (1, 0.25), (3, 1.0 / 3.0), (1, 0.125), (4, 0.25)];
        let fam = TruncationFamily::new(Generator::Enumerated { entries }, vec![2, 4, 6]).unwrap();
        let s = fam.realize_truncation(2).unwrap();
        assert_eq!((s.dim(), s.len()), (3, 4));
        assert_eq!(s.atom(2)[0], real(0.25));
    }

    #[test]
    fn family_json_round_trip() {
        let fam = TruncationFamily::new(
            Generator::OperatorImage { seed: 3, base_dim: 2, padding: WeightRule::Power(1.0) },
            vec![2, 4, 8],
        )
        .unwrap();
        let text = serde_json::to_string(&fam.to_file()).unwrap();
        let back = TruncationFamily::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn system_json_rejects_empty() {
        let file: SystemFile = serde_json::from_str(r#"{"dim": 3, "atoms": []}"#).unwrap();
        let err = VectorSystem::from_file(&file).unwrap_err();
        assert!(err.to_string().contains("N ≥ 1 required"));
    }
}
