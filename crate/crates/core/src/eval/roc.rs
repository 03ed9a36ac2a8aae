use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{PredictionRecord, RdrLabel};

pub const DEFAULT_THRESHOLDS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

impl RocPoint {
    pub fn false_positive_rate(&self) -> f64 {
        1.0 - self.specificity
    }
}

/// Sensitivity/specificity at evenly spaced thresholds, highest threshold
/// first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub positives: usize,
    pub negatives: usize,
}

impl RocCurve {
    /// Checks the ordering and range invariants every curve must satisfy.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(format!("invalid ROC curve: {msg}")));
        for p in &self.points {
            if !(0.0..=1.0).contains(&p.sensitivity) || !(0.0..=1.0).contains(&p.specificity) {
                return fail(format!("rate outside [0, 1] at threshold {}", p.threshold));
            }
        }
        for w in self.points.windows(2) {
            if w[1].threshold >= w[0].threshold {
                return fail("thresholds not strictly decreasing".into());
            }
            if w[1].sensitivity < w[0].sensitivity {
                return fail("sensitivity decreases".into());
            }
            if w[1].false_positive_rate() < w[0].false_positive_rate() {
                return fail("false positive rate decreases".into());
            }
        }
        Ok(())
    }
}

/// Builds the ROC curve at `n_thresholds` thresholds evenly spaced over
/// `[0, 1]` inclusive, in descending order. A score counts as a predicted
/// positive when it is at least the threshold.
pub fn roc_curve(scores: &[f64], labels: &[bool], n_thresholds: usize) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidConfig(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if n_thresholds < 2 {
        return Err(Error::InvalidConfig("need at least two thresholds".into()));
    }
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    for (&s, &l) in scores.iter().zip(labels) {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ScoreOutOfRange {
                image_id: String::new(),
                score: s,
            });
        }
        if l {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateLabels);
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);

    let at_or_above = |sorted: &[f64], t: f64| sorted.len() - sorted.partition_point(|&s| s < t);
    let last = (n_thresholds - 1) as f64;
    let points = (0..n_thresholds)
        .map(|i| {
            let threshold = (n_thresholds - 1 - i) as f64 / last;
            let tp = at_or_above(&pos, threshold);
            let fp = at_or_above(&neg, threshold);
            RocPoint {
                threshold,
                sensitivity: tp as f64 / pos.len() as f64,
                specificity: (neg.len() - fp) as f64 / neg.len() as f64,
            }
        })
        .collect();

    Ok(RocCurve {
        points,
        positives: pos.len(),
        negatives: neg.len(),
    })
}

/// [`roc_curve`] over prediction records joined to labels by image id.
pub fn roc_from_predictions(
    predictions: &[PredictionRecord],
    labels: &HashMap<String, RdrLabel>,
    n_thresholds: usize,
) -> Result<RocCurve> {
    let (scores, flags) = join_labels(predictions, labels)?;
    roc_curve(&scores, &flags, n_thresholds)
}

pub(crate) fn join_labels(
    predictions: &[PredictionRecord],
    labels: &HashMap<String, RdrLabel>,
) -> Result<(Vec<f64>, Vec<bool>)> {
    predictions
        .iter()
        .map(|p| {
            labels
                .get(&p.image_id)
                .map(|l| (p.score(), l.referable))
                .ok_or_else(|| Error::MissingLabel(p.image_id.clone()))
        })
        .collect()
}

/// Trapezoidal area under sensitivity as a function of `1 - specificity`,
/// closing the curve at `(0, 0)` and `(1, 1)` when those corners are absent.
pub fn auc(curve: &RocCurve) -> f64 {
    let mut xy: Vec<(f64, f64)> = Vec::with_capacity(curve.points.len() + 2);
    if curve
        .points
        .first()
        .is_none_or(|p| p.false_positive_rate() != 0.0 || p.sensitivity != 0.0)
    {
        xy.push((0.0, 0.0));
    }
    xy.extend(curve.points.iter().map(|p| (p.false_positive_rate(), p.sensitivity)));
    if curve
        .points
        .last()
        .is_none_or(|p| p.false_positive_rate() != 1.0 || p.sensitivity != 1.0)
    {
        xy.push((1.0, 1.0));
    }
    let area: f64 = xy
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    area.clamp(0.0, 1.0)
}
