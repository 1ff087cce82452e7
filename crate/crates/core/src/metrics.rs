//! Balance metrics over per-style alignment scores.

use crate::error::{Error, Result};

/// `n / sum(1/v)`; 0 if any value is non-positive.
pub fn harmonic_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|&v| v <= 0.0) {
        return Ok(0.0);
    }
    // Factoring out the minimum keeps HM(a, .., a) == a bit-for-bit.
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min * values.len() as f64 / values.iter().map(|v| min / v).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub per_style_alignment: Vec<f64>,
    pub harmonic_mean: f64,
    /// Index of the style that leads the runner-up by more than the margin.
    pub dominant_style: Option<usize>,
}

pub fn balance_report(alignments: &[f64], dominance_margin: f64) -> Result<BalanceReport> {
    let hm = harmonic_mean(alignments)?;
    let (best, &top) = alignments
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let runner_up = alignments
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let dominant_style = (top - runner_up > dominance_margin).then_some(best);
    Ok(BalanceReport {
        per_style_alignment: alignments.to_vec(),
        harmonic_mean: hm,
        dominant_style,
    })
}
