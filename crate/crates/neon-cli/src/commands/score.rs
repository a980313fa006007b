use std::io::{BufRead, Write};
use std::path::PathBuf;

use neon::features::FeatureSet;
use neon::model::load_checkpoint;
use neon::{Error, Result};

use crate::commands::ensure_dir;
use crate::manifest::RunManifest;
use crate::requests::{score_scene, SceneRequest};

/// Batch scoring: strict parsing, one response line per request line.
pub fn run(
    checkpoint: PathBuf,
    features_path: PathBuf,
    scenes: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let model = load_checkpoint(&checkpoint)?;
    let features = FeatureSet::load(&features_path)?;

    let input: Box<dyn BufRead> = match &scenes {
        Some(path) => Box::new(std::io::BufReader::new(std::fs::File::open(path).map_err(
            |e| Error::Validation(format!("cannot open scenes file {}: {e}", path.display())),
        )?)),
        None => Box::new(std::io::BufReader::new(std::io::stdin())),
    };

    let mut lines = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: SceneRequest = serde_json::from_str(&line).map_err(|e| {
            Error::Validation(format!("scene line {}: {e}", lineno + 1))
        })?;
        let response = score_scene(&model, &features, &request.scene, false)?;
        lines.push(serde_json::to_string(&response)?);
    }

    match out {
        Some(dir) => {
            ensure_dir(&dir)?;
            let path = dir.join("scores.jsonl");
            std::fs::write(&path, lines.join("\n") + "\n")?;
            let mut manifest = RunManifest::new("score");
            manifest.input(&checkpoint)?;
            manifest.input(&features_path)?;
            if let Some(s) = &scenes {
                manifest.input(s)?;
            }
            manifest.output(&path)?;
            manifest.write(&dir)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            for line in lines {
                writeln!(handle, "{line}")?;
            }
        }
    }
    Ok(())
}
