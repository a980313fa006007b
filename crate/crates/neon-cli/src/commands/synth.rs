use std::path::PathBuf;

use neon::data::{write_profiles, write_records};
use neon::world::{all_profiles, build_world, sample_records, WorldConfig};
use neon::Result;

use crate::commands::{ensure_dir, progress};
use crate::manifest::RunManifest;

pub fn run(config: Option<PathBuf>, out: PathBuf, seed: Option<u64>, quiet: bool) -> Result<()> {
    let mut world_config = match &config {
        Some(path) => WorldConfig::load(path)?,
        None => WorldConfig::default(),
    };
    if let Some(seed) = seed {
        world_config.seed = seed;
    }
    ensure_dir(&out)?;

    progress(quiet, &format!("building world (seed {})", world_config.seed));
    let world = build_world(&world_config)?;
    progress(quiet, &format!("sampling {} records", world_config.record_count));
    let records = sample_records(&world, world_config.record_count, world_config.seed)?;
    let profiles = all_profiles(&world);

    let corpus_path = out.join("corpus.jsonl");
    let profiles_path = out.join("profiles.jsonl");
    let world_path = out.join("world.json");
    write_records(&corpus_path, &records)?;
    write_profiles(&profiles_path, &profiles)?;
    world.save(&world_path)?;

    let mut manifest = RunManifest::new("synth");
    if let Some(path) = &config {
        manifest.config(path);
        manifest.input(path)?;
    }
    manifest.seed("world", world_config.seed);
    manifest.output(&corpus_path)?;
    manifest.output(&profiles_path)?;
    manifest.output(&world_path)?;
    manifest.write(&out)?;

    progress(
        quiet,
        &format!(
            "wrote {} records, {} profiles, world ground truth -> {}",
            records.len(),
            profiles.len(),
            out.display()
        ),
    );
    Ok(())
}
