//! Ranking metrics: ROC AUC, average precision and top-K hit counts.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_inputs<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::shape(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::MetricUndefined("scores contain NaN".into()));
    }
    Ok(())
}

/// Indices ordered by descending score; equal scores keep input order.
fn descending_order<T: Scalar>(scores: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    idx
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half (Mann-Whitney U with midranks).
pub fn auc<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<f64> {
    check_inputs(scores, labels)?;
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::MetricUndefined(format!(
            "auc needs both classes, got {n_pos} positives and {n_neg} negatives"
        )));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    // Twice the rank sum keeps midranks integral.
    let mut pos_rank_sum2: u128 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let midrank2 = (i + 1 + j + 1) as u128;
        let positives = idx[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        pos_rank_sum2 += midrank2 * positives;
        i = j + 1;
    }
    let p = n_pos as u128;
    let u2 = pos_rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// Average precision: mean of precision@rank over the ranks of the positives.
pub fn aupr<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<f64> {
    check_inputs(scores, labels)?;
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    if n_pos == 0 {
        return Err(Error::MetricUndefined("aupr needs at least one positive".into()));
    }
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, &k) in descending_order(scores).iter().enumerate() {
        if labels[k] == 1 {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(total / n_pos as f64)
}

/// True anomalies among the `k` highest scores.
pub fn topk_count<T: Scalar>(scores: &[T], labels: &[u8], k: usize) -> Result<usize> {
    check_inputs(scores, labels)?;
    if k > scores.len() {
        return Err(Error::Range(format!("top-{k} requested from {} scores", scores.len())));
    }
    Ok(descending_order(scores)[..k].iter().filter(|&&i| labels[i] == 1).count())
}
