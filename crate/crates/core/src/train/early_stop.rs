use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::TrainingConfig;

/// Absorbs floating-point noise in `new - best` so that an improvement of
/// exactly `min_auc_delta` counts.
const DELTA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopping {
    pub patience_epochs: usize,
    pub min_auc_delta: f64,
}

impl From<&TrainingConfig> for EarlyStopping {
    fn from(c: &TrainingConfig) -> Self {
        EarlyStopping {
            patience_epochs: c.patience_epochs,
            min_auc_delta: c.min_auc_delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_brier: f64,
    pub validation_auc: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRunState {
    /// Epochs completed so far (1-based once the first epoch is scored).
    pub epoch: usize,
    pub best_auc: f64,
    /// 0 until some epoch has been accepted as best.
    pub best_epoch: usize,
    pub epochs_since_improvement: usize,
    pub history: Vec<EpochRecord>,
    pub checkpoints: BTreeMap<usize, PathBuf>,
}

impl Default for TrainingRunState {
    fn default() -> Self {
        TrainingRunState {
            epoch: 0,
            best_auc: f64::NEG_INFINITY,
            best_epoch: 0,
            epochs_since_improvement: 0,
            history: Vec::new(),
            checkpoints: BTreeMap::new(),
        }
    }
}

impl TrainingRunState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Scores one more epoch: an AUC at least `min_auc_delta` above the best
/// so far becomes the new best and resets the counter, anything else
/// increments it. Stops once the counter reaches the patience.
pub fn early_stop_decision(
    state: &mut TrainingRunState,
    new_auc: f64,
    rule: &EarlyStopping,
) -> StopDecision {
    state.epoch += 1;
    if new_auc + DELTA_SLACK >= state.best_auc + rule.min_auc_delta {
        state.best_auc = new_auc;
        state.best_epoch = state.epoch;
        state.epochs_since_improvement = 0;
    } else {
        state.epochs_since_improvement += 1;
    }
    if state.epochs_since_improvement >= rule.patience_epochs {
        StopDecision::Stop
    } else {
        StopDecision::Continue
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(patience: usize, delta: f64) -> EarlyStopping {
        EarlyStopping {
            patience_epochs: patience,
            min_auc_delta: delta,
        }
    }

    fn run(seq: &[f64], r: &EarlyStopping) -> (Option<usize>, TrainingRunState) {
        let mut s = TrainingRunState::new();
        for &a in seq {
            if early_stop_decision(&mut s, a, r) == StopDecision::Stop {
                return (Some(s.epoch), s);
            }
        }
        (None, s)
    }

    #[test]
    fn worked_sequence() {
        let (stop, s) = run(&[0.50, 0.60, 0.605, 0.608], &rule(2, 0.01));
        assert_eq!(stop, Some(4));
        assert_eq!(s.best_epoch, 2);
        assert_eq!(s.best_auc, 0.60);
    }

    #[test]
    fn first_epoch_always_becomes_best() {
        let mut s = TrainingRunState::new();
        assert_eq!(early_stop_decision(&mut s, 0.5, &rule(1, 0.01)), StopDecision::Continue);
        assert_eq!((s.best_epoch, s.best_auc), (1, 0.5));
    }

    #[test]
    fn counter_tracks_distance_from_best() {
        let mut s = TrainingRunState::new();
        for a in [0.7, 0.71, 0.70, 0.715, 0.69] {
            early_stop_decision(&mut s, a, &rule(10, 0.01));
            assert_eq!(s.epochs_since_improvement, s.epoch - s.best_epoch);
        }
    }

    proptest::proptest! {
        #[test]
        fn state_invariants_hold(
            seq in proptest::collection::vec(0.0f64..=1.0, 1..60),
            patience in 1usize..12,
            delta in 0.0f64..0.05,
        ) {
            let r = rule(patience, delta);
            let mut s = TrainingRunState::new();
            let mut accepted = Vec::new();
            for (i, &a) in seq.iter().enumerate() {
                let before = s.best_auc;
                let d = early_stop_decision(&mut s, a, &r);
                if s.best_epoch == i + 1 {
                    accepted.push(a);
                    proptest::prop_assert!(a + 1e-12 >= before + delta);
                }
                proptest::prop_assert_eq!(s.epochs_since_improvement, s.epoch - s.best_epoch);
                proptest::prop_assert_eq!(d == StopDecision::Stop, s.epochs_since_improvement >= patience);
                if d == StopDecision::Stop {
                    break;
                }
            }
            let max = accepted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            proptest::prop_assert_eq!(s.best_auc, max);
        }
    }
}
