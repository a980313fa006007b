use std::path::PathBuf;

use neon::data::{read_profiles, read_records};
use neon::model::{save_checkpoint, Variant};
use neon::train::{run_training, write_loss_trace, ModelOptions, TrainingConfig};
use neon::{Error, Result};

use crate::commands::{ensure_dir, progress};
use crate::manifest::RunManifest;

#[allow(clippy::too_many_arguments)]
pub fn run(
    corpus: PathBuf,
    profiles_path: PathBuf,
    config: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    variant: &str,
    drop_st: bool,
    drop_group: bool,
    quiet: bool,
) -> Result<()> {
    let mut train_config = match &config {
        Some(path) => TrainingConfig::load(path)?,
        None => TrainingConfig::default(),
    };
    if let Some(seed) = seed {
        train_config.seed = seed;
    }
    let variant = match variant {
        "multitask" => Variant::Multitask,
        "single_task_sum" => Variant::SingleTaskSum,
        other => {
            return Err(Error::Validation(format!(
                "unknown variant '{other}' (expected multitask or single_task_sum)"
            )))
        }
    };
    let options = ModelOptions {
        variant,
        drop_st,
        drop_group,
    };
    ensure_dir(&out)?;

    let records = read_records(&corpus)?;
    let profiles = read_profiles(&profiles_path)?;
    progress(
        quiet,
        &format!(
            "training on {} records ({} epochs, batch {}, seed {})",
            records.len(),
            train_config.epochs,
            train_config.batch_size,
            train_config.seed
        ),
    );

    let artifacts = run_training(&records, &profiles, &train_config, &options)?;
    for entry in &artifacts.trace {
        progress(
            quiet,
            &format!(
                "epoch {}: need {:.4} way {:.4} total {:.4}",
                entry.epoch, entry.need_loss, entry.way_loss, entry.total
            ),
        );
    }

    let checkpoint_path = out.join("checkpoint.json");
    let features_path = out.join("features.json");
    let trace_path = out.join("loss_trace.jsonl");
    save_checkpoint(&artifacts.model, &checkpoint_path)?;
    artifacts.features.save(&features_path)?;
    write_loss_trace(&trace_path, &artifacts.trace)?;

    let mut manifest = RunManifest::new("train");
    if let Some(path) = &config {
        manifest.config(path);
        manifest.input(path)?;
    }
    manifest.seed("train", train_config.seed);
    manifest.input(&corpus)?;
    manifest.input(&profiles_path)?;
    manifest.output(&checkpoint_path)?;
    manifest.output(&features_path)?;
    manifest.output(&trace_path)?;
    manifest.write(&out)?;

    progress(quiet, &format!("checkpoint -> {}", checkpoint_path.display()));
    Ok(())
}
