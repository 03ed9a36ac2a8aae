use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use rdr_core::dataset::{read_manifest, Split};
use rdr_core::eval::{build_report, ensemble_mean, render_table, write_predictions, write_roc_csv, EvaluationReport};
use rdr_core::train::{load_split, predict_records, Checkpoint};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub checkpoints: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub images: PathBuf,
    pub out: PathBuf,
    pub split: Split,
    pub name: Option<String>,
}

/// Scores `split` with every checkpoint, fuses the members by mean score
/// and writes `predictions_member_<i>.csv`, `predictions.csv`, `roc.csv`,
/// `report.json` and `report.txt` under `out`.
pub fn evaluate(cfg: &RunConfig, args: &EvaluateArgs) -> Result<EvaluationReport, CliError> {
    let manifest = read_manifest(&args.manifest)?;
    let checkpoints = args
        .checkpoints
        .iter()
        .map(|p| Checkpoint::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let normalization = checkpoints[0].config.normalization;
    if let Some(c) = checkpoints.iter().find(|c| c.config.normalization != normalization) {
        return Err(CliError::usage(format!(
            "ensemble members disagree on normalization: {normalization:?} and {:?}",
            c.config.normalization
        )));
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let mut members = Vec::with_capacity(checkpoints.len());
    let mut labels = HashMap::new();
    for (i, ckpt) in checkpoints.iter().enumerate() {
        let data = load_split(&manifest, args.split, &args.images, ckpt.backbone.input_size)?;
        for (id, &l) in data.ids.iter().zip(&data.labels) {
            labels.insert(id.clone(), l);
        }
        let mut net = ckpt.to_network()?;
        let records = predict_records(&mut net, &data, normalization, &format!("member_{i}"))?;
        write_predictions(&args.out.join(format!("predictions_member_{i}.csv")), &records)?;
        members.push(records);
    }
    let fused = ensemble_mean(&members)?;
    write_predictions(&args.out.join("predictions.csv"), &fused)?;

    let scores: Vec<f64> = fused.iter().map(|p| p.score()).collect();
    let truth: Vec<bool> = fused.iter().map(|p| labels[&p.image_id]).collect();
    let mut rcfg = cfg.report_config(checkpoints.len());
    rcfg.normalization = normalization;
    let name = args.name.clone().unwrap_or_else(|| cfg.evaluation.test_set_name.clone());
    let (report, curve) = build_report(&name, &scores, &truth, &rcfg)?;

    write_roc_csv(&args.out.join("roc.csv"), &curve)?;
    let json_path = args.out.join("report.json");
    fs::write(&json_path, serde_json::to_vec_pretty(&report)?).map_err(|e| CliError::io(&json_path, e))?;
    let txt_path = args.out.join("report.txt");
    let table = render_table(std::slice::from_ref(&report), cfg.evaluation.include_reference);
    fs::write(&txt_path, &table).map_err(|e| CliError::io(&txt_path, e))?;
    cfg.write_to(&args.out)?;
    print!("{table}");
    Ok(report)
}
