use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::types::{PredictionRecord, RdrLabel};

/// Mean squared difference between predicted probability and 0/1 label.
pub fn brier_score(
    predictions: &[PredictionRecord],
    labels: &HashMap<String, RdrLabel>,
) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    for p in predictions {
        let label = labels
            .get(&p.image_id)
            .ok_or_else(|| Error::MissingLabel(p.image_id.clone()))?;
        sum += (p.score() - label.as_f64()).powi(2);
    }
    Ok(sum / predictions.len() as f64)
}

/// [`brier_score`] over parallel score and label slices.
pub fn brier_from_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    if scores.len() != labels.len() {
        return Err(Error::InvalidConfig("scores and labels differ in length".into()));
    }
    let sum: f64 = scores
        .iter()
        .zip(labels)
        .map(|(s, &l)| (s - if l { 1.0 } else { 0.0 }).powi(2))
        .sum();
    Ok(sum / scores.len() as f64)
}
