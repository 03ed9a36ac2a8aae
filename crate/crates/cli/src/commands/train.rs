use rdr_core::dataset::read_manifest;
use rdr_core::train::{train_ensemble, train_one, TrainedModel};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::TrainArgs;

fn summarize(label: &str, model: &TrainedModel) {
    let s = &model.state;
    println!(
        "{label}: best validation AUC {:.4} at epoch {} of {}{}",
        s.best_auc,
        s.best_epoch,
        s.epoch,
        model
            .checkpoint_path
            .as_ref()
            .map(|p| format!(", checkpoint {}", p.display()))
            .unwrap_or_default()
    );
}

pub fn run_single(cfg: &RunConfig, args: &TrainArgs) -> Result<(), CliError> {
    cfg.training.validate()?;
    let manifest = read_manifest(&args.manifest)?;
    cfg.write_to(&args.out)?;
    let model = train_one(&manifest, &args.images, &cfg.training, Some(&args.out))?;
    summarize("model", &model);
    Ok(())
}

pub fn run_ensemble(cfg: &RunConfig, args: &TrainArgs) -> Result<(), CliError> {
    cfg.training.validate()?;
    let spec = cfg.ensemble_spec()?;
    let manifest = read_manifest(&args.manifest)?;
    cfg.write_to(&args.out)?;
    let models = train_ensemble(&manifest, &args.images, &cfg.training, &spec, Some(&args.out))?;
    for (i, m) in models.iter().enumerate() {
        summarize(&format!("member {i} (seed {})", spec.member_seeds()[i]), m);
    }
    Ok(())
}
