//! Building blocks for training and evaluating a binary referable diabetic
//! retinopathy (rDR) detector on retinal fundus photographs.
//!
//! The crate is organised as a pipeline:
//!
//! * [`types`]: grades, labels, gradability and prediction records.
//! * [`preprocess`]: fundus localisation, crop/resize, normalisation and
//!   augmentation.
//! * [`dataset`]: grade ingestion, manifests, stratified sampling and
//!   gradability filtering.
//! * [`nn`] and [`train`]: a small CPU network library, RMSProp, AUC-based
//!   early stopping and ensembles.
//! * [`eval`]: 200-threshold ROC curves, AUC, operating points and reports.
//! * [`synthetic`]: a planted-lesion fundus generator for desk-scale runs.
//!
//! ```
//! use rdr_core::eval::{auc, roc_curve};
//!
//! let scores = [0.9, 0.8, 0.2, 0.1];
//! let labels = [true, true, false, false];
//! let curve = roc_curve(&scores, &labels, 200).unwrap();
//! assert_eq!(auc(&curve), 1.0);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod nn;
pub mod preprocess;
pub mod synthetic;
pub mod train;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    binarize_rdr, Gradability, GradabilityStatus, GradeRecord, IcdrGrade, PredictionRecord,
    Quality, RdrLabel,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    mod preprocessing {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/roc.md")]
    mod roc {}
    #[doc = include_str!("../../../book/src/ensembles.md")]
    mod ensembles {}
}
