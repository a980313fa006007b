//! Checkpoint persistence.
//!
//! A checkpoint is one JSON document `{format_version, model_config,
//! tensors}` where every tensor value is written as a base-10 decimal with 17
//! significant digits — enough for an exact `f64` round trip, so a reloaded
//! model reproduces bit-identical scores.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::config::ModelConfig;
use crate::model::neon::NeonModel;
use crate::nn::Tensor;

/// Current checkpoint format version.
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Serializes the model (parameters plus batch-norm running statistics).
pub fn save_checkpoint(model: &NeonModel, path: &Path) -> Result<()> {
    let mut tensors: BTreeMap<String, &Tensor> = BTreeMap::new();
    for (name, t) in model.named_params().into_iter().chain(model.named_state()) {
        tensors.insert(name, t);
    }

    for (name, t) in &tensors {
        if !t.all_finite() {
            return Err(Error::CheckpointTensor {
                name: name.clone(),
                reason: "contains non-finite values".into(),
            });
        }
    }

    let mut out = Vec::with_capacity(1 << 20);
    out.extend_from_slice(b"{\n  \"format_version\": ");
    write!(out, "{CHECKPOINT_FORMAT_VERSION}")?;
    out.extend_from_slice(b",\n  \"model_config\": ");
    out.extend_from_slice(serde_json::to_string(&model.config)?.as_bytes());
    out.extend_from_slice(b",\n  \"tensors\": {\n");
    for (i, (name, tensor)) in tensors.iter().enumerate() {
        write!(out, "    {}: {{\"shape\": ", serde_json::to_string(name)?)?;
        out.extend_from_slice(serde_json::to_string(tensor.shape())?.as_bytes());
        out.extend_from_slice(b", \"data\": [");
        for (j, v) in tensor.data().iter().enumerate() {
            if j > 0 {
                out.push(b',');
            }
            // 17 significant digits: one leading digit plus 16 fractional.
            write!(out, "{v:.16e}")?;
        }
        out.extend_from_slice(if i + 1 == tensors.len() { b"]}\n" } else { b"]},\n" });
    }
    out.extend_from_slice(b"  }\n}\n");
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Deserialize)]
struct TensorDoc {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct CheckpointDoc {
    #[allow(dead_code)] // checked via the probe before full parsing
    format_version: u32,
    model_config: ModelConfig,
    tensors: BTreeMap<String, TensorDoc>,
}

/// Loads a checkpoint, validating version, tensor inventory, shapes, and
/// finiteness.
pub fn load_checkpoint(path: &Path) -> Result<NeonModel> {
    let text = std::fs::read_to_string(path)?;

    // Check the version before insisting on the full schema so version
    // mismatches surface as such.
    let probe: serde_json::Value = serde_json::from_str(&text)?;
    let found = probe
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Validation("checkpoint lacks a format_version field".into()))?;
    if found != u64::from(CHECKPOINT_FORMAT_VERSION) {
        return Err(Error::FormatVersion {
            found: found as u32,
            supported: CHECKPOINT_FORMAT_VERSION,
        });
    }

    let doc: CheckpointDoc = serde_json::from_str(&text)?;
    doc.model_config.validate()?;

    // A freshly initialized model provides the expected tensor inventory.
    let mut model = NeonModel::init(doc.model_config, 0)?;
    let mut expected: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (name, t) in model.named_params().into_iter().chain(model.named_state()) {
        expected.insert(name, t.shape().to_vec());
    }

    for name in doc.tensors.keys() {
        if !expected.contains_key(name) {
            return Err(Error::CheckpointTensor {
                name: name.clone(),
                reason: "unknown tensor".into(),
            });
        }
    }
    let mut loaded: BTreeMap<String, Tensor> = BTreeMap::new();
    for (name, shape) in &expected {
        let doc_tensor = doc.tensors.get(name).ok_or_else(|| Error::CheckpointTensor {
            name: name.clone(),
            reason: "missing tensor".into(),
        })?;
        if &doc_tensor.shape != shape {
            return Err(Error::CheckpointTensor {
                name: name.clone(),
                reason: format!("shape {:?} does not match expected {:?}", doc_tensor.shape, shape),
            });
        }
        let expected_len: usize = shape.iter().product();
        if doc_tensor.data.len() != expected_len {
            return Err(Error::CheckpointTensor {
                name: name.clone(),
                reason: format!(
                    "data length {} does not match shape {:?}",
                    doc_tensor.data.len(),
                    shape
                ),
            });
        }
        if doc_tensor.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::CheckpointTensor {
                name: name.clone(),
                reason: "contains non-finite values".into(),
            });
        }
        loaded.insert(name.clone(), Tensor::new(shape.clone(), doc_tensor.data.clone())?);
    }

    {
        let mut params = model.params_mut();
        for (name, target) in params.iter_mut() {
            **target = loaded.remove(name).expect("validated above");
        }
    }
    for (name, block) in [
        ("merge", &mut model.merge),
        ("user", &mut model.user),
        ("expert_shared", &mut model.expert_shared),
        ("expert_need", &mut model.expert_need),
        ("expert_way", &mut model.expert_way),
    ] {
        block.bn.running_mean = loaded
            .remove(&format!("{name}.bn.running_mean"))
            .expect("validated above");
        block.bn.running_var = loaded
            .remove(&format!("{name}.bn.running_var"))
            .expect("validated above");
    }
    debug_assert!(loaded.is_empty());
    Ok(model)
}
