use std::path::PathBuf;

use neon::data::{build_labeled_scenes, read_profiles, read_records};
use neon::eval::evaluate;
use neon::features::FeatureSet;
use neon::model::load_checkpoint;
use neon::train::{split_dataset, TrainingConfig};
use neon::world::{bayes_optimal_sa, WorldModel};
use neon::Result;

use crate::commands::{ensure_dir, progress};
use crate::manifest::RunManifest;

#[allow(clippy::too_many_arguments)]
pub fn run(
    checkpoint: PathBuf,
    features_path: PathBuf,
    corpus: PathBuf,
    profiles_path: PathBuf,
    config: Option<PathBuf>,
    world: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    quiet: bool,
) -> Result<()> {
    let mut train_config = match &config {
        Some(path) => TrainingConfig::load(path)?,
        None => TrainingConfig::default(),
    };
    if let Some(seed) = seed {
        train_config.seed = seed;
    }
    ensure_dir(&out)?;

    let model = load_checkpoint(&checkpoint)?;
    let features = FeatureSet::load(&features_path)?;
    let records = read_records(&corpus)?;
    let profiles = read_profiles(&profiles_path)?;
    let scenes = build_labeled_scenes(&records, &profiles)?;
    let split = split_dataset(scenes, train_config.split_fraction, train_config.seed)?;

    progress(quiet, &format!("evaluating {} eval scenes", split.eval.len()));
    let report = evaluate(&model, &features, &split.eval)?;

    let mut report_json = serde_json::to_value(&report)?;
    if let Some(world_path) = &world {
        let world = WorldModel::load(world_path)?;
        let oracle = bayes_optimal_sa(&world, &split.eval)?;
        report_json["oracle_sa"] = serde_json::json!(oracle);
        report_json["oracle_gap"] = serde_json::json!(oracle - report.sa);
        progress(quiet, &format!("oracle SA {oracle:.4} (gap {:+.4})", report.sa - oracle));
    }

    let json_path = out.join("report.json");
    let text_path = out.join("report.txt");
    std::fs::write(&json_path, serde_json::to_string_pretty(&report_json)?)?;
    std::fs::write(&text_path, report.text_table())?;

    let mut manifest = RunManifest::new("eval");
    if let Some(path) = &config {
        manifest.config(path);
        manifest.input(path)?;
    }
    manifest.seed("split", train_config.seed);
    manifest.input(&checkpoint)?;
    manifest.input(&features_path)?;
    manifest.input(&corpus)?;
    manifest.input(&profiles_path)?;
    if let Some(path) = &world {
        manifest.input(path)?;
    }
    manifest.output(&json_path)?;
    manifest.output(&text_path)?;
    manifest.write(&out)?;

    if !quiet {
        print!("{}", report.text_table());
    }
    Ok(())
}
