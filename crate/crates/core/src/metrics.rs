//! AUC and support-recovery metrics.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::linalg::{SupportSet, Vector};

/// How a tied positive/negative score pair counts toward the AUC.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Wilcoxon–Mann–Whitney convention: a tie counts ½.
    #[default]
    Half,
    /// Literal `wᵀ(x₊ − x₋) > 0` indicator: a tie counts 0.
    Strict,
}

fn class_counts(labels: &[Label]) -> Result<(usize, usize)> {
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!("AUC needs both classes ({n_pos} positive, {n_neg} negative)")));
    }
    Ok((n_pos, n_neg))
}

/// AUC by rank statistics in `O(n log n)`.
pub fn auc_score(scores: &[f64], labels: &[Label], ties: TieRule) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Argument(format!("score {i} is not finite")));
    }
    let (n_pos, n_neg) = class_counts(labels)?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Walk tie groups in ascending score order. Each positive beats every
    // negative seen in earlier groups and ties with negatives in its own group.
    let mut wins = 0.0;
    let mut tied = 0.0;
    let mut neg_below = 0usize;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let group = &order[start..end];
        let pos_here = group.iter().filter(|&&i| labels[i].is_positive()).count();
        let neg_here = group.len() - pos_here;
        wins += (pos_here * neg_below) as f64;
        tied += (pos_here * neg_here) as f64;
        neg_below += neg_here;
        start = end;
    }
    let credit = match ties {
        TieRule::Half => wins + 0.5 * tied,
        TieRule::Strict => wins,
    };
    Ok(credit / (n_pos as f64 * n_neg as f64))
}

/// Quadratic reference AUC: enumerates every positive/negative pair.
pub fn auc_pairwise(scores: &[f64], labels: &[Label], ties: TieRule) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    let (n_pos, n_neg) = class_counts(labels)?;
    let mut credit = 0.0;
    for (sp, _) in scores.iter().zip(labels).filter(|(_, l)| l.is_positive()) {
        for (sn, _) in scores.iter().zip(labels).filter(|(_, l)| !l.is_positive()) {
            if sp > sn {
                credit += 1.0;
            } else if sp == sn && ties == TieRule::Half {
                credit += 0.5;
            }
        }
    }
    Ok(credit / (n_pos as f64 * n_neg as f64))
}

/// Test AUC of the linear scorer `w` on `data`.
pub fn model_auc(w: &Vector, data: &Dataset) -> Result<f64> {
    auc_score(&data.scores(w)?, data.labels(), TieRule::Half)
}

fn require_truth(truth: &SupportSet) -> Result<()> {
    if truth.is_empty() {
        return Err(Error::Argument("ground-truth support is empty".into()));
    }
    Ok(())
}

/// Support-recovery F1 against `truth`, after zeroing `|wᵢ| <= truncate_eps`.
/// An empty predicted support or empty overlap scores 0.
pub fn support_f1(w: &Vector, truth: &SupportSet, truncate_eps: f64) -> Result<f64> {
    require_truth(truth)?;
    let predicted = SupportSet::of_truncated(w.as_slice(), truncate_eps);
    let hits = predicted.intersection_len(truth);
    if predicted.is_empty() || hits == 0 {
        return Ok(0.0);
    }
    let precision = hits as f64 / predicted.len() as f64;
    let recall = hits as f64 / truth.len() as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

pub fn support_jaccard(w: &Vector, truth: &SupportSet, truncate_eps: f64) -> Result<f64> {
    require_truth(truth)?;
    let predicted = SupportSet::of_truncated(w.as_slice(), truncate_eps);
    Ok(predicted.intersection_len(truth) as f64 / predicted.union_len(truth) as f64)
}

/// Fraction of the true support that the model selected.
pub fn related_ratio(w: &Vector, truth: &SupportSet, truncate_eps: f64) -> Result<f64> {
    require_truth(truth)?;
    let predicted = SupportSet::of_truncated(w.as_slice(), truncate_eps);
    Ok(predicted.intersection_len(truth) as f64 / truth.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    pub f1: Option<f64>,
    pub jaccard: Option<f64>,
    pub ratio: Option<f64>,
    pub support_size: usize,
}

/// Evaluates a model on a test set, and on a known support when given one.
pub fn evaluate(w: &Vector, test: &Dataset, truth: Option<&SupportSet>, truncate_eps: f64) -> Result<EvalReport> {
    let auc = model_auc(w, test)?;
    let (f1, jaccard, ratio) = match truth {
        Some(t) => (
            Some(support_f1(w, t, truncate_eps)?),
            Some(support_jaccard(w, t, truncate_eps)?),
            Some(related_ratio(w, t, truncate_eps)?),
        ),
        None => (None, None, None),
    };
    Ok(EvalReport { auc, f1, jaccard, ratio, support_size: SupportSet::of_truncated(w.as_slice(), truncate_eps).len() })
}
