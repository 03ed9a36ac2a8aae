//! Grade ingestion, manifests, stratified sampling and gradability.
//!
//! A [`DatasetManifest`] is the persisted record of every image's identity,
//! grade, gradability and split assignment for one pipeline run. Freshly
//! ingested entries start in [`Split::Excluded`]; [`stratified_sample`]
//! moves a class-balanced selection into train/validation or test, and
//! [`filter_gradable`] moves images that are not known to be gradable back
//! out.

mod gradability;
mod ingest;
mod manifest;
mod split;

pub use gradability::{
    append_gradability, apply_gradability, filter_gradable, read_gradability_file,
    resolve_latest, FilterReport, GradabilityEntry, GRADABILITY_HEADER,
};
pub use ingest::{ingest_grades, IngestReport, RowIssue};
pub use manifest::{
    read_manifest, write_manifest, BalanceSummary, ClassCounts, DatasetManifest, ManifestEntry,
    Source, Split, MANIFEST_HEADER,
};
pub use split::{stratified_sample, SplitAssignment, SplitSpec};
