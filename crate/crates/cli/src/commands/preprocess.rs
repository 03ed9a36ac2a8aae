use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rdr_core::dataset::{ingest_grades, write_manifest, DatasetManifest, ManifestEntry};
use rdr_core::preprocess::{preprocess_image, FundusCircle};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessOutcome {
    pub succeeded: usize,
    pub failed: usize,
    pub malformed_rows: usize,
    pub manifest_path: PathBuf,
}

impl PreprocessOutcome {
    pub fn failure_fraction(&self) -> f64 {
        let total = self.succeeded + self.failed;
        if total == 0 {
            0.0
        } else {
            self.failed as f64 / total as f64
        }
    }

    pub fn check(&self, max_failure_fraction: f64) -> Result<(), CliError> {
        if self.succeeded == 0 || self.failure_fraction() > max_failure_fraction {
            return Err(CliError::data(format!(
                "{} of {} images failed preprocessing (limit {:.0}%)",
                self.failed,
                self.succeeded + self.failed,
                100.0 * max_failure_fraction
            )));
        }
        Ok(())
    }
}

fn process_one(
    entry: &ManifestEntry,
    input: &Path,
    out: &Path,
    cfg: &rdr_core::preprocess::PreprocessConfig,
) -> Result<FundusCircle, String> {
    let src = input.join(&entry.file_path);
    let img = image::open(&src).map_err(|e| format!("unreadable: {e}"))?.to_rgb8();
    let (circle, cropped) = preprocess_image(&img, cfg).map_err(|e| e.to_string())?;
    let dst = out.join(format!("{}.png", entry.image_id()));
    cropped.save(&dst).map_err(|e| format!("write {}: {e}", dst.display()))?;
    Ok(circle)
}

/// Preprocesses every graded image under `input` into `out/<id>.png`.
///
/// Alongside the images it writes `circles.csv` with the located fundus,
/// `failures.csv` with the reason each failed image was dropped, and
/// `manifest.csv` holding the successful entries only. Images are
/// processed in parallel but every output is written in grade-file order,
/// so reruns produce identical files.
pub fn preprocess(cfg: &RunConfig, input: &Path, grades: &Path, out: &Path) -> Result<PreprocessOutcome, CliError> {
    let pcfg = cfg.preprocess_config();
    pcfg.validate()?;
    let ingest = ingest_grades(grades, cfg.preprocess.source, Some(input))?;
    for issue in &ingest.malformed {
        log::warn!("{}: row {}: {}", grades.display(), issue.row, issue.reason);
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    let results: Vec<Result<FundusCircle, String>> = ingest
        .manifest
        .entries
        .par_iter()
        .map(|e| {
            if ingest.missing.iter().any(|m| m == e.image_id()) {
                Err("image file not found".to_string())
            } else {
                process_one(e, input, out, &pcfg)
            }
        })
        .collect();

    let circles_path = out.join("circles.csv");
    let failures_path = out.join("failures.csv");
    let mut circles = csv::Writer::from_path(&circles_path)?;
    let mut failures = csv::Writer::from_path(&failures_path)?;
    circles.write_record(["image_id", "center_x", "center_y", "radius"])?;
    failures.write_record(["image_id", "reason"])?;

    let mut kept = Vec::new();
    for (entry, result) in ingest.manifest.entries.iter().zip(results) {
        match result {
            Ok(c) => {
                circles.write_record([
                    entry.image_id().to_string(),
                    format!("{:.3}", c.center_x),
                    format!("{:.3}", c.center_y),
                    format!("{:.3}", c.radius),
                ])?;
                let mut e = entry.clone();
                e.file_path = format!("{}.png", entry.image_id()).into();
                kept.push(e);
            }
            Err(reason) => {
                log::warn!("{}: {reason}", entry.image_id());
                failures.write_record([entry.image_id(), reason.as_str()])?;
            }
        }
    }
    circles.flush().map_err(|e| CliError::io(&circles_path, e))?;
    failures.flush().map_err(|e| CliError::io(&failures_path, e))?;

    let failed = ingest.manifest.entries.len() - kept.len();
    let succeeded = kept.len();
    let manifest_path = out.join("manifest.csv");
    write_manifest(&DatasetManifest::new(kept, cfg.seed)?, &manifest_path)?;
    cfg.write_to(out)?;
    Ok(PreprocessOutcome {
        succeeded,
        failed,
        malformed_rows: ingest.malformed.len(),
        manifest_path,
    })
}
