use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetManifest, Split};
use crate::error::{Error, Result};

/// Where [`stratified_sample`] puts the images it selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitAssignment {
    /// Split the selection into train and validation at `train_fraction`.
    #[default]
    TrainValidation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_total: usize,
    /// rDR-positive share of the selection.
    pub positive_fraction: f64,
    pub train_fraction: f64,
    pub seed: u64,
    pub gradable_only: bool,
    pub assign: SplitAssignment,
}

impl SplitSpec {
    pub fn new(n_total: usize, positive_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            n_total,
            positive_fraction,
            train_fraction: 0.8,
            seed,
            gradable_only: false,
            assign: SplitAssignment::TrainValidation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "positive_fraction {} must lie in (0, 1)",
                self.positive_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.train_fraction) {
            return Err(Error::InvalidConfig(format!(
                "train_fraction {} must lie in [0, 1]",
                self.train_fraction
            )));
        }
        Ok(())
    }

    pub fn n_positive(&self) -> usize {
        (self.n_total as f64 * self.positive_fraction).round() as usize
    }
}

/// Selects `round(n_total * positive_fraction)` rDR-positive and the
/// complementary number of negative images from the excluded pool, uniformly
/// at random under `spec.seed`.
///
/// With [`SplitAssignment::TrainValidation`] each class is then divided into
/// train and validation at `train_fraction`, so both splits keep the
/// selection's balance up to integer rounding. Images not selected stay
/// excluded. The pool is ordered by image id before sampling, so the result
/// depends only on the pool's contents and the seed.
pub fn stratified_sample(manifest: &DatasetManifest, spec: &SplitSpec) -> Result<DatasetManifest> {
    spec.validate()?;
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        if e.split != Split::Excluded {
            continue;
        }
        if spec.gradable_only && !e.grade_record.gradability.is_gradable() {
            continue;
        }
        if e.referable() {
            positives.push(i);
        } else {
            negatives.push(i);
        }
    }
    let by_id = |&a: &usize, &b: &usize| manifest.entries[a].image_id().cmp(manifest.entries[b].image_id());
    positives.sort_by(by_id);
    negatives.sort_by(by_id);

    let n_pos = spec.n_positive();
    let n_neg = spec.n_total.saturating_sub(n_pos);
    if positives.len() < n_pos {
        return Err(Error::InsufficientPool {
            class: "positive".into(),
            short: n_pos - positives.len(),
        });
    }
    if negatives.len() < n_neg {
        return Err(Error::InsufficientPool {
            class: "negative".into(),
            short: n_neg - negatives.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = manifest.clone();
    out.seed = spec.seed;
    for (pool, n) in [(&positives, n_pos), (&negatives, n_neg)] {
        let mut chosen: Vec<usize> = pool.choose_multiple(&mut rng, n).copied().collect();
        chosen.shuffle(&mut rng);
        let n_train = match spec.assign {
            SplitAssignment::Test => 0,
            SplitAssignment::TrainValidation => (n as f64 * spec.train_fraction).round() as usize,
        };
        for (k, &idx) in chosen.iter().enumerate() {
            out.entries[idx].split = match spec.assign {
                SplitAssignment::Test => Split::Test,
                SplitAssignment::TrainValidation if k < n_train => Split::Train,
                SplitAssignment::TrainValidation => Split::Validation,
            };
        }
    }
    Ok(out)
}
