//! Run configuration: a TOML file with one table per pipeline stage, plus
//! `--set section.key=value` overrides. The resolved configuration is
//! written into every output directory as `run_config.toml`.

use std::fs;
use std::path::Path;

use rdr_core::dataset::{Source, SplitAssignment, SplitSpec};
use rdr_core::eval::{ReportConfig, DEFAULT_THRESHOLDS};
use rdr_core::preprocess::{Interpolation, PreprocessConfig};
use rdr_core::synthetic::SyntheticConfig;
use rdr_core::train::{EnsembleSpec, TrainingConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const RUN_CONFIG_FILE: &str = "run_config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub source: Source,
    pub target_size: u32,
    pub localization_threshold_fraction: f64,
    pub interpolation: Interpolation,
    /// `preprocess` exits with a data error above this share of failures.
    pub max_failure_fraction: f64,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        let p = PreprocessConfig::default();
        PreprocessSection {
            source: Source::Eyepacs,
            target_size: p.target_size,
            localization_threshold_fraction: p.localization_threshold_fraction,
            interpolation: p.interpolation,
            max_failure_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    /// 0 skips this split.
    pub n_total: usize,
    /// No default: class balance has to come from the study being matched.
    pub positive_fraction: Option<f64>,
    pub train_fraction: f64,
    pub gradable_only: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            n_total: 0,
            positive_fraction: None,
            train_fraction: 0.8,
            gradable_only: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Splits {
    /// Sampled first, so the test set never competes with training data.
    pub test: SplitSection,
    pub train_validation: SplitSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_members: usize,
    /// Explicit seeds; otherwise `seed, seed + 1, ..`.
    pub member_seeds: Option<Vec<u64>>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            n_members: 10,
            member_seeds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub test_set_name: String,
    pub n_thresholds: usize,
    pub sensitivity_constraint: f64,
    pub specificity_constraint: f64,
    pub include_reference: bool,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            test_set_name: "test".into(),
            n_thresholds: DEFAULT_THRESHOLDS,
            sensitivity_constraint: 0.95,
            specificity_constraint: 0.98,
            include_reference: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub n_images: usize,
    pub positive_fraction: f64,
    pub image_size: u32,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        SyntheticSection {
            n_images: 3000,
            positive_fraction: 0.3,
            image_size: 192,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Every seed in the run derives from this one.
    pub seed: u64,
    pub preprocess: PreprocessSection,
    pub split: Splits,
    pub training: TrainingConfig,
    pub ensemble: EnsembleSection,
    pub evaluation: EvaluationSection,
    pub synthetic: SyntheticSection,
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| CliError::usage(format!("empty key in override {key:?}")))?;
    let mut cur = table;
    for p in parts {
        let next = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = next
            .as_table_mut()
            .ok_or_else(|| CliError::usage(format!("{p} in {key:?} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// File (if any), then `key=value` overrides, then the `--seed` flag.
    pub fn load(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("override {o:?} is not key=value")))?;
            set_path(&mut table, k.trim(), parse_value(v.trim()))?;
        }
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::usage(format!("invalid configuration: {e}")))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.training.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let text = toml::to_string_pretty(self).map_err(|e| CliError::usage(e.to_string()))?;
        let path = dir.join(RUN_CONFIG_FILE);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig {
            target_size: self.preprocess.target_size,
            localization_threshold_fraction: self.preprocess.localization_threshold_fraction,
            interpolation: self.preprocess.interpolation,
            augmentation: self.training.augmentation.clone(),
        }
    }

    fn split_spec(&self, s: &SplitSection, name: &str, assign: SplitAssignment) -> Result<Option<SplitSpec>, CliError> {
        if s.n_total == 0 {
            return Ok(None);
        }
        let positive_fraction = s.positive_fraction.ok_or_else(|| {
            CliError::usage(format!("split.{name}.positive_fraction is not set"))
        })?;
        Ok(Some(SplitSpec {
            n_total: s.n_total,
            positive_fraction,
            train_fraction: s.train_fraction,
            seed: self.seed,
            gradable_only: s.gradable_only,
            assign,
        }))
    }

    pub fn test_split(&self) -> Result<Option<SplitSpec>, CliError> {
        self.split_spec(&self.split.test, "test", SplitAssignment::Test)
    }

    pub fn train_validation_split(&self) -> Result<Option<SplitSpec>, CliError> {
        self.split_spec(&self.split.train_validation, "train_validation", SplitAssignment::TrainValidation)
    }

    pub fn ensemble_spec(&self) -> Result<EnsembleSpec, CliError> {
        let spec = match &self.ensemble.member_seeds {
            Some(seeds) => EnsembleSpec::new(seeds.clone()),
            None => EnsembleSpec::sequential(self.ensemble.n_members, self.seed),
        };
        Ok(spec?)
    }

    pub fn report_config(&self, ensemble_size: usize) -> ReportConfig {
        ReportConfig {
            normalization: self.training.normalization,
            ensemble_size,
            n_thresholds: self.evaluation.n_thresholds,
            sensitivity_constraint: self.evaluation.sensitivity_constraint,
            specificity_constraint: self.evaluation.specificity_constraint,
        }
    }

    pub fn synthetic_config(&self) -> SyntheticConfig {
        SyntheticConfig {
            n_images: self.synthetic.n_images,
            positive_fraction: self.synthetic.positive_fraction,
            image_size: self.synthetic.image_size,
            seed: self.seed,
        }
    }
}
