use std::fs;
use std::path::{Path, PathBuf};

use rdr_core::eval::{render_table, EvaluationReport};

use crate::config::RunConfig;
use crate::error::CliError;

pub fn run(cfg: &RunConfig, inputs: &[PathBuf], out: Option<&Path>, reference: bool) -> Result<(), CliError> {
    let reports = inputs
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_slice::<EvaluationReport>(&bytes)
                .map_err(|e| CliError::data(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let table = render_table(&reports, reference || cfg.evaluation.include_reference);
    if let Some(path) = out {
        fs::write(path, &table).map_err(|e| CliError::io(path, e))?;
    }
    print!("{table}");
    Ok(())
}
