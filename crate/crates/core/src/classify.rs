//! Asymptotic classification of truncation families.
//!
//! Every total finite snapshot is a frame, so upper/lower semi-frame
//! behaviour is read off the trend of the optimal bounds `m(N)`, `M(N)` over
//! growing truncations, via least-squares slopes in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::atoms::{TruncationFamily, VectorSystem};
use crate::calculus::{optimal_bounds, BoundsReport, FrameCalculus};
use crate::error::{FrameError, Result};

pub const DEFAULT_TAU: f64 = 1e-3;
/// Slopes within this band count as "bounded".
pub const FLAT_SLOPE: f64 = 0.1;
/// Slopes beyond this magnitude count as "tending to 0 / ∞".
pub const TREND_SLOPE: f64 = 0.5;
pub const MAX_FIT_RESIDUAL: f64 = 0.2;
/// A norm sequence whose last/first ratio reaches this factor is unbounded.
pub const DIVERGENCE_FACTOR: f64 = 1e3;
pub const DEFAULT_N_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Frame,
    UpperSemiFrame,
    LowerSemiFrame,
    BesselOnly,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiFrameVerdict {
    pub verdict: Verdict,
    pub lower_trend: Vec<(usize, f64)>,
    pub upper_trend: Vec<(usize, f64)>,
    pub slope_lower: f64,
    pub slope_upper: f64,
    pub residual_lower: f64,
    pub residual_upper: f64,
    /// Every truncation had full rank.
    pub all_total: bool,
}

impl SemiFrameVerdict {
    /// Worst of the two fit residuals.
    pub fn confidence(&self) -> f64 {
        self.residual_lower.max(self.residual_upper)
    }
}

/// Least-squares slope and RMS residual of `ln y` against `ln x`.
pub fn loglog_fit(points: &[(usize, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(x, _)| (*x as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum();
    (slope, (rss / n).sqrt())
}

pub fn classify_snapshot(sys: &VectorSystem) -> BoundsReport {
    optimal_bounds(sys)
}

pub fn classify_asymptotic(fam: &TruncationFamily, tau: f64) -> Result<SemiFrameVerdict> {
    let systems = fam.realize_all()?;
    classify_systems(fam.sizes(), &systems, tau)
}

/// Classify an explicit sequence of snapshots labelled by `sizes`.
pub fn classify_systems(sizes: &[usize], systems: &[VectorSystem], tau: f64) -> Result<SemiFrameVerdict> {
    if sizes.len() < 3 || systems.len() != sizes.len() {
        return Err(FrameError::InsufficientData(format!(
            "need at least 3 sizes with one system each, got {} sizes and {} systems",
            sizes.len(),
            systems.len()
        )));
    }
    let reports: Vec<BoundsReport> = systems.iter().map(optimal_bounds).collect();
    Ok(verdict_from_bounds(sizes, &reports, tau))
}

pub fn verdict_from_bounds(sizes: &[usize], reports: &[BoundsReport], tau: f64) -> SemiFrameVerdict {
    let lower_trend: Vec<(usize, f64)> = sizes.iter().zip(reports).map(|(&n, r)| (n, r.lower)).collect();
    let upper_trend: Vec<(usize, f64)> = sizes.iter().zip(reports).map(|(&n, r)| (n, r.upper)).collect();
    let (slope_lower, residual_lower) = loglog_fit(&lower_trend);
    let (slope_upper, residual_upper) = loglog_fit(&upper_trend);
    let all_total = reports.iter().all(|r| r.total);
    let last = reports.last().expect("nonempty trend");
    let ratio = if last.upper > 0.0 { last.lower / last.upper } else { 0.0 };

    let verdict = if !all_total {
        Verdict::BesselOnly
    } else if ratio >= tau && slope_lower >= -FLAT_SLOPE {
        Verdict::Frame
    } else if slope_upper <= FLAT_SLOPE && slope_lower <= -TREND_SLOPE && residual_lower < MAX_FIT_RESIDUAL {
        Verdict::UpperSemiFrame
    } else if slope_lower >= -FLAT_SLOPE && slope_upper >= TREND_SLOPE {
        Verdict::LowerSemiFrame
    } else {
        Verdict::Indeterminate
    };

    SemiFrameVerdict {
        verdict,
        lower_trend,
        upper_trend,
        slope_lower,
        slope_upper,
        residual_lower,
        residual_upper,
        all_total,
    }
}

/// Scale-membership orders of the atoms of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub n_max: usize,
    /// `n̂_k` for each atom probed (atoms of the smallest truncation).
    pub atom_orders: Vec<usize>,
    /// `n₀ = min_k n̂_k`.
    pub family_order: usize,
    pub totally_regular: bool,
    /// `ratios[k][n]`: last/first value of `‖S_N^{-n/2} ψ_k‖` over the sizes
    /// (infinite when the overflow guard tripped).
    pub ratios: Vec<Vec<f64>>,
}

pub fn regularity_order(fam: &TruncationFamily, n_max: usize) -> Result<RegularityReport> {
    regularity_order_systems(&fam.realize_all()?, n_max)
}

pub fn regularity_order_systems(systems: &[VectorSystem], n_max: usize) -> Result<RegularityReport> {
    if systems.len() < 3 {
        return Err(FrameError::InsufficientData(format!(
            "need at least 3 truncations, got {}",
            systems.len()
        )));
    }
    let probed = systems[0].len();
    // norms[s][k][n]
    let mut norms = Vec::with_capacity(systems.len());
    for sys in systems {
        let calc = FrameCalculus::new(sys);
        calc.require_total()?;
        if sys.len() < probed {
            return Err(FrameError::DimensionMismatch(format!(
                "truncation with {} atoms is smaller than the first ({})",
                sys.len(),
                probed
            )));
        }
        let per_atom: Vec<Vec<f64>> = (0..probed)
            .map(|k| {
                let atom = sys.atom(k);
                (0..=n_max)
                    .map(|n| match calc.spectral().apply_power(&atom, -(n as f64) / 2.0) {
                        Ok(v) => v.norm(),
                        Err(_) => f64::INFINITY,
                    })
                    .collect()
            })
            .collect();
        norms.push(per_atom);
    }

    let mut atom_orders = Vec::with_capacity(probed);
    let mut ratios = Vec::with_capacity(probed);
    for k in 0..probed {
        let row: Vec<f64> = (0..=n_max)
            .map(|n| {
                let first = norms[0][k][n];
                let last = norms[norms.len() - 1][k][n];
                let peak = norms.iter().map(|s| s[k][n]).fold(0.0, f64::max);
                if !peak.is_finite() {
                    f64::INFINITY
                } else if first > 0.0 {
                    last / first
                } else if last == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let order = row.iter().take_while(|&&r| r < DIVERGENCE_FACTOR).count().saturating_sub(1);
        atom_orders.push(order);
        ratios.push(row);
    }
    let family_order = atom_orders.iter().copied().min().unwrap_or(0);
    Ok(RegularityReport {
        n_max,
        totally_regular: atom_orders.iter().all(|&o| o >= n_max),
        atom_orders,
        family_order,
        ratios,
    })
}
