mod evaluate;
mod grading;
mod preprocess;
mod report;
mod split;
mod synthetic;
mod train;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::Command;

pub use evaluate::{evaluate, EvaluateArgs};
pub use preprocess::{preprocess, PreprocessOutcome};

pub fn dispatch(command: Command, mut cfg: RunConfig) -> Result<(), CliError> {
    match command {
        Command::GenerateSynthetic {
            out,
            n,
            positive_fraction,
            image_size,
        } => {
            if let Some(n) = n {
                cfg.synthetic.n_images = n;
            }
            if let Some(f) = positive_fraction {
                cfg.synthetic.positive_fraction = f;
            }
            if let Some(s) = image_size {
                cfg.synthetic.image_size = s;
            }
            synthetic::run(&cfg, &out)
        }
        Command::Preprocess {
            input,
            grades,
            out,
            source,
        } => {
            if let Some(s) = source {
                cfg.preprocess.source = s.parse()?;
            }
            let outcome = preprocess(&cfg, &input, &grades, &out)?;
            println!(
                "preprocessed {} images, {} failures, {} malformed grade rows",
                outcome.succeeded, outcome.failed, outcome.malformed_rows
            );
            outcome.check(cfg.preprocess.max_failure_fraction)
        }
        Command::Split {
            manifest,
            out,
            gradability,
        } => split::run(&cfg, &manifest, &out, gradability.as_deref()),
        Command::ServeGrading {
            manifest,
            images,
            grades,
            host,
            port,
            grader,
            session,
            shards,
            instructions,
        } => grading::run(grading::ServeArgs {
            manifest,
            images,
            grades,
            host,
            port,
            grader,
            session,
            shards,
            instructions,
        }),
        Command::Train { data } => train::run_single(&cfg, &data),
        Command::TrainEnsemble { data, members } => {
            if let Some(m) = members {
                cfg.ensemble.n_members = m;
                cfg.ensemble.member_seeds = None;
            }
            train::run_ensemble(&cfg, &data)
        }
        Command::Evaluate {
            checkpoints,
            manifest,
            images,
            out,
            split,
            name,
        } => {
            let report = evaluate(
                &cfg,
                &EvaluateArgs {
                    checkpoints,
                    manifest,
                    images,
                    out,
                    split: split.parse()?,
                    name,
                },
            )?;
            println!(
                "{}: AUC {:.4} on {} images ({} positive)",
                report.test_set_name, report.auc, report.n_images, report.positives
            );
            Ok(())
        }
        Command::Report {
            inputs,
            out,
            reference,
        } => report::run(&cfg, &inputs, out.as_deref(), reference),
    }
}
