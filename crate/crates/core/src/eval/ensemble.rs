use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::types::PredictionRecord;

pub const ENSEMBLE_MODEL_ID: &str = "ensemble";

/// Per-image arithmetic mean of member scores, sorted by image id.
///
/// Every member must score exactly the same set of images. Member scores
/// are summed in sorted order as offsets from their minimum, so the result
/// does not depend on member order and identical members fuse to exactly
/// their common score.
pub fn ensemble_mean(members: &[Vec<PredictionRecord>]) -> Result<Vec<PredictionRecord>> {
    let Some(first) = members.first() else {
        return Err(Error::EmptyInput);
    };
    let mut by_image: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for p in first {
        if by_image.insert(&p.image_id, vec![p.score()]).is_some() {
            return Err(Error::MismatchedCoverage(p.image_id.clone()));
        }
    }
    for member in &members[1..] {
        let mut seen = HashSet::with_capacity(member.len());
        for p in member {
            if !seen.insert(p.image_id.as_str()) {
                return Err(Error::MismatchedCoverage(p.image_id.clone()));
            }
            by_image
                .get_mut(p.image_id.as_str())
                .ok_or_else(|| Error::MismatchedCoverage(p.image_id.clone()))?
                .push(p.score());
        }
        if seen.len() != by_image.len() {
            let absent = by_image.keys().find(|k| !seen.contains(*k)).unwrap();
            return Err(Error::MismatchedCoverage(absent.to_string()));
        }
    }

    let k = members.len() as f64;
    by_image
        .into_iter()
        .map(|(id, mut scores)| {
            scores.sort_by(f64::total_cmp);
            let lo = scores[0];
            let hi = scores[scores.len() - 1];
            let offset: f64 = scores.iter().map(|s| s - lo).sum::<f64>() / k;
            PredictionRecord::new(id, (lo + offset).clamp(lo, hi), ENSEMBLE_MODEL_ID)
        })
        .collect()
}
