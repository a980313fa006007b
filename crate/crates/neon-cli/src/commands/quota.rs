use std::io::{BufRead, Write};
use std::path::PathBuf;

use neon::features::FeatureSet;
use neon::model::{load_checkpoint, NeonModel};
use neon::{Error, Result};

use crate::commands::ensure_dir;
use crate::manifest::RunManifest;
use crate::requests::{answer_quota_request, QuotaRequest};

pub fn run(
    checkpoint: Option<PathBuf>,
    features_path: Option<PathBuf>,
    requests: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let model: Option<NeonModel> = checkpoint.as_ref().map(|p| load_checkpoint(p)).transpose()?;
    let features: Option<FeatureSet> =
        features_path.as_ref().map(|p| FeatureSet::load(p)).transpose()?;
    if model.is_some() != features.is_some() {
        return Err(Error::Validation(
            "--checkpoint and --features must be given together".into(),
        ));
    }

    let input: Box<dyn BufRead> = match &requests {
        Some(path) => Box::new(std::io::BufReader::new(std::fs::File::open(path).map_err(
            |e| Error::Validation(format!("cannot open requests file {}: {e}", path.display())),
        )?)),
        None => Box::new(std::io::BufReader::new(std::io::stdin())),
    };

    let mut lines = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: QuotaRequest = serde_json::from_str(&line)
            .map_err(|e| Error::Validation(format!("request line {}: {e}", lineno + 1)))?;
        let response = answer_quota_request(&request, model.as_ref(), features.as_ref())?;
        lines.push(serde_json::to_string(&response)?);
    }

    match out {
        Some(dir) => {
            ensure_dir(&dir)?;
            let path = dir.join("quotas.jsonl");
            std::fs::write(&path, lines.join("\n") + "\n")?;
            let mut manifest = RunManifest::new("quota");
            if let Some(p) = &checkpoint {
                manifest.input(p)?;
            }
            if let Some(p) = &features_path {
                manifest.input(p)?;
            }
            if let Some(p) = &requests {
                manifest.input(p)?;
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
