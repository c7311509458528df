use serde::Serialize;

use super::scoring::ScoredDataset;
use crate::dd::Dd;
use crate::error::{Error, Result};

/// Name of the integration rule used for [`PrCurve::aupr`].
pub const AUPR_RULE: &str = "average_precision";

/// Precision-recall curve swept over descending score thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    /// `(recall, precision)` after each distinct threshold.
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
    /// `sum_i (recall_i - recall_{i-1}) * precision_i`.
    pub aupr: f64,
    pub positives: usize,
    pub negatives: usize,
    pub rule: &'static str,
}

impl PrCurve {
    /// Fraction of positive labels, the AUPR of an uninformative scorer.
    pub fn prevalence(&self) -> f64 {
        self.positives as f64 / (self.positives + self.negatives) as f64
    }
}

/// PR curve of `scores` (higher = predicted positive) against `labels`.
/// Tied scores enter the sweep together.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<PrCurve> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if let Some((i, &v)) = scores.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { coord: 0, value: v }.at_row(i));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::new();
    let mut thresholds = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    // each term is (new_tp / P) * (tp / (tp + fp)); summed in double-double
    // and rounded once
    let mut aupr = Dd::ZERO;
    let mut prev_tp = 0usize;
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        if tp > prev_tp {
            let num = Dd::from(((tp - prev_tp) * tp) as f64);
            aupr = aupr + num / Dd::from(((tp + fp) * positives) as f64);
        }
        prev_tp = tp;
        points.push((recall, precision));
        thresholds.push(t);
    }
    Ok(PrCurve {
        points,
        thresholds,
        aupr: aupr.to_f64(),
        positives,
        negatives,
        rule: AUPR_RULE,
    })
}

pub fn pr_curve_scored(scored: &ScoredDataset) -> Result<PrCurve> {
    let labels = scored.labels().ok_or(Error::MissingLabels)?;
    pr_curve(&scored.scores, labels)
}
