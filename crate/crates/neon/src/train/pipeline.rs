//! The full training pipeline: scenes, split, feature fitting, encoding,
//! model initialization, and the training loop.

use rayon::prelude::*;

use crate::data::{build_labeled_scenes, LabeledScene, PurchaseRecord, UserProfile};
use crate::error::Result;
use crate::features::{
    build_group_tables, encode_scene, FeatureSet, FeatureSchema, GroupTableConfig,
};
use crate::model::{ModelConfig, NeonModel, Variant};
use crate::train::split::{split_dataset, DatasetSplit};
use crate::train::trainer::{train, LossTraceEntry, TrainExample, TrainingConfig};

/// Model wiring switches exposed by the pipeline (dimensions stay standard).
#[derive(Debug, Clone, Copy)]
pub struct ModelOptions {
    pub variant: Variant,
    pub drop_st: bool,
    pub drop_group: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            variant: Variant::Multitask,
            drop_st: false,
            drop_group: false,
        }
    }
}

/// Everything a training run produces.
pub struct TrainedArtifacts {
    pub model: NeonModel,
    pub features: FeatureSet,
    pub split: DatasetSplit,
    pub trace: Vec<LossTraceEntry>,
}

/// The record a labeled scene was built from.
fn scene_record(scene: &LabeledScene) -> PurchaseRecord {
    PurchaseRecord {
        user_id: scene.scene.profile.user_id.clone(),
        context: scene.scene.context.clone(),
        need: scene.need_label,
    }
}

/// Encodes labeled scenes in parallel (encoders are pure; order preserved).
pub fn encode_examples(
    scenes: &[LabeledScene],
    features: &FeatureSet,
) -> Result<Vec<TrainExample>> {
    scenes
        .par_iter()
        .map(|s| {
            Ok(TrainExample {
                encoded: encode_scene(&s.scene, &features.schema, &features.tables)?,
                need: s.need_label,
                way: s.way_label(),
            })
        })
        .collect()
}

/// Runs the whole pipeline on a record corpus.
///
/// The feature schema and group tables are fitted on the training split
/// only; eval records never touch them.
pub fn run_training(
    records: &[PurchaseRecord],
    profiles: &[UserProfile],
    config: &TrainingConfig,
    options: &ModelOptions,
) -> Result<TrainedArtifacts> {
    config.validate()?;
    let scenes = build_labeled_scenes(records, profiles)?;
    let split = split_dataset(scenes, config.split_fraction, config.seed)?;

    let train_records: Vec<PurchaseRecord> = split.train.iter().map(scene_record).collect();
    let schema = FeatureSchema::fit(&train_records)?;
    let tables = build_group_tables(&train_records, profiles, &GroupTableConfig::default())?;
    let features = FeatureSet::new(schema, tables);

    let mut model_config = ModelConfig::standard(&features.schema);
    model_config.variant = options.variant;
    model_config.drop_st = options.drop_st;
    model_config.drop_group = options.drop_group;
    let mut model = NeonModel::init(model_config, config.seed)?;

    let examples = encode_examples(&split.train, &features)?;
    let trace = train(&mut model, &examples, config)?;

    Ok(TrainedArtifacts {
        model,
        features,
        split,
        trace,
    })
}
