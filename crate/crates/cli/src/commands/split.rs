use std::fs;
use std::path::Path;

use rdr_core::dataset::{
    apply_gradability, read_gradability_file, read_manifest, resolve_latest, stratified_sample,
    write_manifest,
};

use crate::config::RunConfig;
use crate::error::CliError;

/// Writes `out/manifest.csv`. The test split is drawn before train and
/// validation so it never depends on training-set settings.
pub fn run(cfg: &RunConfig, manifest: &Path, out: &Path, gradability: Option<&Path>) -> Result<(), CliError> {
    let test = cfg.test_split()?;
    let train_validation = cfg.train_validation_split()?;
    if test.is_none() && train_validation.is_none() {
        return Err(CliError::usage("both split.test.n_total and split.train_validation.n_total are 0"));
    }
    let mut m = read_manifest(manifest)?;
    if let Some(path) = gradability {
        let n = apply_gradability(&mut m, &resolve_latest(&read_gradability_file(path)?));
        log::info!("applied {n} quality grades from {}", path.display());
    }
    m.seed = cfg.seed;
    for spec in [test, train_validation].into_iter().flatten() {
        m = stratified_sample(&m, &spec)?;
    }

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_manifest(&m, &out.join("manifest.csv"))?;
    cfg.write_to(out)?;
    for (split, counts) in m.balance_summary() {
        println!(
            "{:<11} {:>7} images, {:>6} referable ({:.1}%)",
            split.as_str(),
            counts.total(),
            counts.positive,
            100.0 * counts.positive_fraction()
        );
    }
    Ok(())
}
