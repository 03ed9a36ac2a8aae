//! Training: optimiser, AUC-based early stopping, checkpoints and ensembles.

mod brier;
mod checkpoint;
mod config;
mod data;
mod early_stop;
mod optimizer;
mod run;

pub use brier::{brier_from_scores, brier_score};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use config::{EnsembleSpec, Optimizer, TrainingConfig};
pub use data::{load_split, LabeledImages};
pub use early_stop::{early_stop_decision, EarlyStopping, EpochRecord, StopDecision, TrainingRunState};
pub use optimizer::RmsProp;
pub use run::{
    predict, predict_records, train_ensemble, train_on, train_one, write_training_log, TrainedModel,
    TRAINING_LOG_HEADER,
};
