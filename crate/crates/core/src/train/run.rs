use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::load_into;
use super::{
    brier_from_scores, early_stop_decision, load_split, Checkpoint, EarlyStopping, EnsembleSpec,
    EpochRecord, LabeledImages, RmsProp, StopDecision, TrainingConfig, TrainingRunState,
};
use crate::dataset::{DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::eval::{auc, roc_curve, DEFAULT_THRESHOLDS};
use crate::nn::{BackboneKind, Network};
use crate::preprocess::NormalizationMethod;
use crate::types::PredictionRecord;

pub const TRAINING_LOG_HEADER: &str = "epoch,train_brier,validation_auc,elapsed_seconds";
const PREDICT_BATCH: usize = 64;

/// Result of one training run: the best-epoch weights and the run history.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub checkpoint: Checkpoint,
    /// Where the best checkpoint was written, when a run directory was given.
    pub checkpoint_path: Option<PathBuf>,
    pub state: TrainingRunState,
}

impl TrainedModel {
    pub fn network(&self) -> Result<Network> {
        self.checkpoint.to_network()
    }
}

fn sigmoid(z: f32) -> f64 {
    let z = z as f64;
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn bce_with_logits(z: f32, y: f32) -> f64 {
    let (z, y) = (z as f64, y as f64);
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Sigmoid probabilities in evaluation mode, in input order.
pub fn predict(network: &mut Network, data: &LabeledImages, method: NormalizationMethod) -> Vec<f64> {
    let idx: Vec<usize> = (0..data.len()).collect();
    let mut out = Vec::with_capacity(data.len());
    for chunk in idx.chunks(PREDICT_BATCH) {
        let x = data.batch::<ChaCha8Rng>(chunk, method, None);
        out.extend(network.forward(&x, false).into_iter().map(sigmoid));
    }
    out
}

pub fn predict_records(
    network: &mut Network,
    data: &LabeledImages,
    method: NormalizationMethod,
    model_id: &str,
) -> Result<Vec<PredictionRecord>> {
    predict(network, data, method)
        .into_iter()
        .zip(&data.ids)
        .map(|(s, id)| PredictionRecord::new(id.clone(), s, model_id))
        .collect()
}

fn initial_network(config: &TrainingConfig) -> Result<Network> {
    let mut net = Network::new(config.backbone, config.seed)?;
    if config.pretrained_init {
        match config.backbone.kind {
            BackboneKind::InceptionV3Like => {
                let path = config
                    .pretrained_path
                    .as_deref()
                    .ok_or_else(|| Error::InvalidConfig("pretrained_init needs pretrained_path".into()))?;
                let ckpt = Checkpoint::load(path)?;
                load_into(&mut net, &ckpt.tensors).map_err(|reason| Error::Checkpoint {
                    path: path.to_path_buf(),
                    reason,
                })?;
            }
            BackboneKind::SmallCnn => {
                log::warn!("pretrained_init is ignored for small_cnn");
            }
        }
    }
    Ok(net)
}

/// Validation AUC over the shared 200-threshold ROC path.
fn validation_auc(network: &mut Network, val: &LabeledImages, method: NormalizationMethod, epoch: usize) -> Result<f64> {
    let scores = predict(network, val, method);
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFiniteLoss { epoch });
    }
    Ok(auc(&roc_curve(&scores, &val.labels, DEFAULT_THRESHOLDS)?))
}

/// Appends one row to the training log, writing the header first if the
/// file is new.
pub fn write_training_log(path: &Path, record: &EpochRecord) -> Result<()> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let empty = f.metadata().map_err(|e| Error::io(path, e))?.len() == 0;
    let mut line = String::new();
    if empty {
        line.push_str(TRAINING_LOG_HEADER);
        line.push('\n');
    }
    line.push_str(&format!(
        "{},{},{},{:.3}\n",
        record.epoch, record.train_brier, record.validation_auc, record.elapsed_seconds
    ));
    f.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Trains on in-memory splits. With `run_dir`, the best checkpoint is kept
/// at `run_dir/best.ckpt` and every epoch is appended to
/// `run_dir/training_log.csv`.
pub fn train_on(
    train: &LabeledImages,
    val: &LabeledImages,
    config: &TrainingConfig,
    run_dir: Option<&Path>,
) -> Result<TrainedModel> {
    config.validate()?;
    if train.len() < 2 {
        return Err(Error::DataUnavailable("train split needs at least 2 images".into()));
    }
    if val.is_empty() {
        return Err(Error::DataUnavailable("validation split is empty".into()));
    }
    let size = config.backbone.input_size;
    for img in train.images.iter().chain(&val.images) {
        if img.dimensions() != (size, size) {
            return Err(Error::DataUnavailable(format!(
                "image is {}x{}, network expects {size}x{size}",
                img.width(),
                img.height()
            )));
        }
    }
    let (log_path, ckpt_path) = match run_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let log = dir.join("training_log.csv");
            if log.exists() {
                fs::remove_file(&log).map_err(|e| Error::io(&log, e))?;
            }
            (Some(log), Some(dir.join("best.ckpt")))
        }
        None => (None, None),
    };

    let mut net = initial_network(config)?;
    let mut opt = RmsProp::new(config);
    let rule = EarlyStopping::from(config);
    let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5EED_0F_0DE5);
    let mut aug_rng = ChaCha8Rng::seed_from_u64(config.seed.rotate_left(17) ^ config.augmentation.rng_seed);
    let mut state = TrainingRunState::new();
    let mut best: Option<Checkpoint> = None;
    let started = Instant::now();
    let method = config.normalization;

    let mut order: Vec<usize> = (0..train.len()).collect();
    while state.epoch < config.max_epochs {
        let epoch = state.epoch + 1;
        order.shuffle(&mut order_rng);
        let mut train_scores = Vec::with_capacity(train.len());
        let mut train_labels = Vec::with_capacity(train.len());
        for batch in order.chunks(config.batch_size) {
            if batch.len() < 2 {
                continue;
            }
            let x = train.batch(batch, method, Some((&config.augmentation, &mut aug_rng)));
            let logits = net.forward(&x, true);
            let n = batch.len() as f32;
            let mut loss = 0.0;
            let mut dlogits = Vec::with_capacity(batch.len());
            for (&z, &i) in logits.iter().zip(batch) {
                let y = if train.labels[i] { 1.0 } else { 0.0 };
                loss += bce_with_logits(z, y);
                let p = sigmoid(z);
                dlogits.push((p as f32 - y) / n);
                train_scores.push(p);
                train_labels.push(train.labels[i]);
            }
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            net.zero_grad();
            net.backward(&dlogits);
            opt.step(net.params());
        }

        let train_brier = brier_from_scores(&train_scores, &train_labels)?;
        if !train_brier.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        let validation_auc = validation_auc(&mut net, val, method, epoch)?;
        let decision = early_stop_decision(&mut state, validation_auc, &rule);
        let record = EpochRecord {
            epoch,
            train_brier,
            validation_auc,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        };
        state.history.push(record);
        if let Some(log) = &log_path {
            write_training_log(log, &record)?;
        }
        if state.best_epoch == epoch {
            let ckpt = Checkpoint::from_network(&net, config, validation_auc, epoch);
            if let Some(path) = &ckpt_path {
                ckpt.save(path)?;
                state.checkpoints.insert(epoch, path.clone());
            }
            best = Some(ckpt);
        }
        log::info!(
            "epoch {epoch}: train_brier {train_brier:.4} validation_auc {validation_auc:.4}"
        );
        if decision == StopDecision::Stop {
            break;
        }
    }

    Ok(TrainedModel {
        checkpoint: best.expect("the first epoch always becomes best"),
        checkpoint_path: ckpt_path,
        state,
    })
}

/// Loads the train and validation splits from preprocessed images and
/// trains one model.
pub fn train_one(
    manifest: &DatasetManifest,
    image_dir: &Path,
    config: &TrainingConfig,
    run_dir: Option<&Path>,
) -> Result<TrainedModel> {
    config.validate()?;
    let size = config.backbone.input_size;
    let train = load_split(manifest, Split::Train, image_dir, size)?;
    let val = load_split(manifest, Split::Validation, image_dir, size)?;
    train_on(&train, &val, config, run_dir)
}

/// Trains one member per seed; member `i` writes to `run_dir/member_<i>`.
pub fn train_ensemble(
    manifest: &DatasetManifest,
    image_dir: &Path,
    config: &TrainingConfig,
    ensemble: &EnsembleSpec,
    run_dir: Option<&Path>,
) -> Result<Vec<TrainedModel>> {
    config.validate()?;
    let size = config.backbone.input_size;
    let train = load_split(manifest, Split::Train, image_dir, size)?;
    let val = load_split(manifest, Split::Validation, image_dir, size)?;
    ensemble
        .member_seeds()
        .iter()
        .enumerate()
        .map(|(index, &seed)| {
            let member = TrainingConfig {
                seed,
                ..config.clone()
            };
            let dir = run_dir.map(|d| d.join(format!("member_{index}")));
            train_on(&train, &val, &member, dir.as_deref()).map_err(|e| Error::EnsembleMember {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
