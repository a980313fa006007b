use std::io::{BufRead, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use neon::features::FeatureSet;
use neon::model::load_checkpoint;
use neon::Result;

use crate::requests::{score_scene, SceneRequest, ScoreResponse};

#[derive(Serialize)]
struct ErrorLine {
    error: String,
}

enum Outcome {
    Ok(ScoreResponse),
    Err(String),
}

/// Streaming scorer: one response line per input line, in input order.
/// Malformed lines produce structured error objects; the process keeps
/// going. Lines are handled in small batches fanned out over the worker
/// pool.
pub fn run(checkpoint: PathBuf, features_path: PathBuf, quotas: bool) -> Result<()> {
    let model = load_checkpoint(&checkpoint)?;
    let features = FeatureSet::load(&features_path)?;

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());

    const BATCH: usize = 64;
    let mut pending: Vec<String> = Vec::with_capacity(BATCH);

    let flush = |pending: &mut Vec<String>, out: &mut dyn Write| -> Result<()> {
        if pending.is_empty() {
            return Ok(());
        }
        let outcomes: Vec<Outcome> = pending
            .par_iter()
            .map(|line| match serde_json::from_str::<SceneRequest>(line) {
                Ok(request) => match score_scene(&model, &features, &request.scene, quotas) {
                    Ok(response) => Outcome::Ok(response),
                    Err(e) => Outcome::Err(e.to_string()),
                },
                Err(e) => Outcome::Err(format!("invalid request: {e}")),
            })
            .collect();
        for outcome in outcomes {
            let line = match outcome {
                Outcome::Ok(response) => serde_json::to_string(&response)?,
                Outcome::Err(error) => serde_json::to_string(&ErrorLine { error })?,
            };
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        pending.clear();
        Ok(())
    };

    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        pending.push(line);
        if pending.len() >= BATCH {
            flush(&mut pending, &mut out)?;
        }
    }
    flush(&mut pending, &mut out)?;
    Ok(())
}
