//! Finite-n growth readouts for speed tables. Tags are heuristics, not classifications.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::SpeedTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub n: usize,
    /// `log2 |H_n|`, absent when `|H_n| = 0`.
    pub log2: Option<f64>,
    /// `ln |H_n| / (n ln n)`, for `n >= 2`.
    pub log_ratio: Option<f64>,
    pub over_factorial: f64,
    /// `log2 |H_n| - log2 |H_{n-1}|`.
    pub diff_log2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthTag {
    PolynomialOrExponential,
    /// Roughly `n^{(1 - 1/k) n}`.
    Factorial(usize),
    PenultimateOrAbove,
}

impl std::fmt::Display for GrowthTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GrowthTag::PolynomialOrExponential => write!(f, "polynomial/exponential"),
            GrowthTag::Factorial(k) => write!(f, "factorial degree {k}"),
            GrowthTag::PenultimateOrAbove => write!(f, "penultimate-or-above"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<DiagnosticRow>,
    pub tag: GrowthTag,
}

fn log2_big(x: &BigUint) -> Option<f64> {
    if x.is_zero() {
        return None;
    }
    let bits = x.bits();
    // keep 53 significant bits
    let shift = bits.saturating_sub(53);
    let top = (x >> shift).to_f64()?;
    Some(top.log2() + shift as f64)
}

const TOLERANCE: f64 = 1e-9;

pub fn growth_diagnostics(table: &SpeedTable) -> Result<GrowthReport> {
    if table.rows.len() < 4 {
        return Err(Error::TooFewRows { needed: 4, got: table.rows.len() });
    }
    let mut rows: Vec<DiagnosticRow> = Vec::new();
    let mut log2_factorial = 0.0f64;
    for (i, r) in table.rows.iter().enumerate() {
        log2_factorial += (r.n.max(1) as f64).log2();
        let log2 = log2_big(&r.labeled);
        let log_ratio = match log2 {
            Some(l) if r.n >= 2 => Some(l * std::f64::consts::LN_2 / (r.n as f64 * (r.n as f64).ln())),
            _ => None,
        };
        let over_factorial = log2.map_or(0.0, |l| (l - log2_factorial).exp2());
        let diff_log2 = match (i.checked_sub(1).and_then(|j| rows[j].log2), log2) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        rows.push(DiagnosticRow { n: r.n, log2, log_ratio, over_factorial, diff_log2 });
    }
    let tail = &rows[rows.len() - 3..];
    let diffs: Vec<f64> = tail.iter().filter_map(|r| r.diff_log2).collect();
    let tag = if diffs.len() < 3 || diffs.windows(2).all(|w| w[1] <= w[0] + TOLERANCE) {
        GrowthTag::PolynomialOrExponential
    } else if tail.windows(2).all(|w| w[1].over_factorial > w[0].over_factorial)
        && tail[2].over_factorial > 1.0
    {
        GrowthTag::PenultimateOrAbove
    } else {
        // the increments of log2 |H_n| grow like (1 - 1/k) log2 n
        let x0 = (tail[0].n as f64).log2();
        let x2 = (tail[2].n as f64).log2();
        let slope = (diffs[2] - diffs[0]) / (x2 - x0);
        if slope >= 1.0 - TOLERANCE {
            GrowthTag::PenultimateOrAbove
        } else {
            GrowthTag::Factorial(((1.0 / (1.0 - slope)).round() as usize).max(2))
        }
    };
    Ok(GrowthReport { rows, tag })
}
