use std::path::PathBuf;

use neon::data::{build_labeled_scenes, read_profiles, read_records, PurchaseRecord};
use neon::features::{build_group_tables, FeatureSchema, FeatureSet, GroupTableConfig};
use neon::train::split_dataset;
use neon::Result;

use crate::commands::progress;
use crate::manifest::RunManifest;

#[allow(clippy::too_many_arguments)]
pub fn run(
    corpus: PathBuf,
    profiles_path: PathBuf,
    out: PathBuf,
    split_fraction: f64,
    seed: u64,
    all: bool,
    quiet: bool,
) -> Result<()> {
    let records = read_records(&corpus)?;
    let profiles = read_profiles(&profiles_path)?;

    // Fit on the train partition of the seeded split unless --all.
    let fit_records: Vec<PurchaseRecord> = if all {
        records.clone()
    } else {
        let scenes = build_labeled_scenes(&records, &profiles)?;
        let split = split_dataset(scenes, split_fraction, seed)?;
        split
            .train
            .iter()
            .map(|s| PurchaseRecord {
                user_id: s.scene.profile.user_id.clone(),
                context: s.scene.context.clone(),
                need: s.need_label,
            })
            .collect()
    };

    let schema = FeatureSchema::fit(&fit_records)?;
    let tables = build_group_tables(&fit_records, &profiles, &GroupTableConfig::default())?;
    let set = FeatureSet::new(schema, tables);
    set.save(&out)?;

    let mut manifest = RunManifest::new("build-features");
    manifest.seed("split", seed);
    manifest.input(&corpus)?;
    manifest.input(&profiles_path)?;
    manifest.output(&out)?;
    manifest.write_file(&out.with_extension("manifest.json"))?;

    progress(
        quiet,
        &format!(
            "fitted schema and tables from {} records ({} rules) -> {}",
            fit_records.len(),
            set.tables.rules.len(),
            out.display()
        ),
    );
    Ok(())
}
