use std::path::Path;

use rdr_core::synthetic::generate_corpus;

use crate::config::RunConfig;
use crate::error::CliError;

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let corpus = generate_corpus(&cfg.synthetic_config(), out)?;
    cfg.write_to(out)?;
    let positives = corpus.entries.iter().filter(|e| e.grade >= 2).count();
    println!(
        "wrote {} images ({positives} referable) to {}, grades in {}",
        corpus.entries.len(),
        corpus.image_dir.display(),
        corpus.grades_csv.display()
    );
    Ok(())
}
