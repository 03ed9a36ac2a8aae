use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{BackboneKind, BackboneSpec};
use crate::preprocess::{AugmentationConfig, NormalizationMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Rmsprop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub optimizer: Optimizer,
    /// Decay of the squared-gradient moving average.
    pub rmsprop_decay: f64,
    pub rmsprop_epsilon: f64,
    pub rmsprop_momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience_epochs: usize,
    pub min_auc_delta: f64,
    pub normalization: NormalizationMethod,
    pub backbone: BackboneSpec,
    pub pretrained_init: bool,
    /// Checkpoint whose weights seed an `inception_v3_like` network when
    /// `pretrained_init` is set.
    pub pretrained_path: Option<PathBuf>,
    pub augmentation: AugmentationConfig,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.001,
            weight_decay: 4e-5,
            optimizer: Optimizer::Rmsprop,
            rmsprop_decay: 0.9,
            rmsprop_epsilon: 1.0,
            rmsprop_momentum: 0.0,
            batch_size: 32,
            max_epochs: 50,
            patience_epochs: 10,
            min_auc_delta: 0.01,
            normalization: NormalizationMethod::SymmetricRange,
            backbone: BackboneSpec::default(),
            pretrained_init: false,
            pretrained_path: None,
            augmentation: AugmentationConfig::default(),
            seed: 0,
        }
    }
}

impl TrainingConfig {
    /// Defaults with a `small_cnn` backbone at the given input size.
    pub fn small_cnn(input_size: u32) -> Self {
        TrainingConfig {
            backbone: BackboneSpec::new(BackboneKind::SmallCnn, input_size),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be finite and non-negative", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0) {
            return bad("weight_decay must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.rmsprop_decay) {
            return bad("rmsprop_decay must lie in [0, 1)".into());
        }
        if !(self.rmsprop_epsilon > 0.0) {
            return bad("rmsprop_epsilon must be positive".into());
        }
        if !(0.0..1.0).contains(&self.rmsprop_momentum) {
            return bad("rmsprop_momentum must lie in [0, 1)".into());
        }
        if self.batch_size < 2 {
            return bad("batch_size must be at least 2 for batch normalization".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.patience_epochs == 0 {
            return bad("patience_epochs must be at least 1".into());
        }
        if !(self.min_auc_delta >= 0.0) {
            return bad("min_auc_delta must be non-negative".into());
        }
        if self.pretrained_init
            && self.backbone.kind == BackboneKind::InceptionV3Like
            && self.pretrained_path.is_none()
        {
            return bad("pretrained_init needs pretrained_path".into());
        }
        self.augmentation.validate()?;
        self.backbone.validate()
    }
}

/// Seeds of independently trained ensemble members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct EnsembleSpec {
    member_seeds: Vec<u64>,
}

impl EnsembleSpec {
    pub fn new(member_seeds: Vec<u64>) -> Result<Self> {
        if member_seeds.is_empty() {
            return Err(Error::InvalidConfig("an ensemble needs at least one member".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = member_seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::InvalidConfig(format!("duplicate ensemble seed {dup}")));
        }
        Ok(EnsembleSpec { member_seeds })
    }

    /// Seeds `base, base + 1, ..`.
    pub fn sequential(n_members: usize, base: u64) -> Result<Self> {
        EnsembleSpec::new((0..n_members as u64).map(|i| base + i).collect())
    }

    pub fn n_members(&self) -> usize {
        self.member_seeds.len()
    }

    pub fn member_seeds(&self) -> &[u64] {
        &self.member_seeds
    }
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec::sequential(10, 0).expect("ten distinct seeds")
    }
}

impl TryFrom<Vec<u64>> for EnsembleSpec {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        EnsembleSpec::new(v)
    }
}

impl From<EnsembleSpec> for Vec<u64> {
    fn from(e: EnsembleSpec) -> Self {
        e.member_seeds
    }
}
