//! End-to-end mini-batch training.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{NeedCategory, NeedsMeetingWay};
use crate::error::{Error, Result};
use crate::features::EncodedScene;
use crate::model::{NeonModel, Variant};
use crate::nn::{softmax_rows, GradientSet, OptimizerState, Tensor};
use crate::train::loss::{focal_loss, focal_loss_grad, total_loss, way_loss, way_loss_grad};

/// Training hyperparameters. The JSON config file mirrors these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    /// Focal-loss focusing exponent γ.
    pub gamma: f64,
    /// Weight λ₁ of the need loss.
    pub lambda1: f64,
    /// Weight λ₂ of the way loss.
    pub lambda2: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Train share of the dataset split.
    pub split_fraction: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            gamma: 2.0,
            lambda1: 1.0,
            lambda2: 0.5,
            learning_rate: 1e-3,
            batch_size: 256,
            epochs: 10,
            seed: 0,
            split_fraction: 0.8,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma < 0.0 {
            return Err(Error::Validation(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 || self.lambda1 + self.lambda2 <= 0.0 {
            return Err(Error::Validation(format!(
                "lambda weights must be non-negative with a positive sum, got λ₁={} λ₂={}",
                self.lambda1, self.lambda2
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::Validation(format!(
                "batch_size must be >= 2 for batch normalization, got {}",
                self.batch_size
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Validation(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0 < self.split_fraction && self.split_fraction < 1.0) {
            return Err(Error::Validation(format!(
                "split_fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<TrainingConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Validation(format!("cannot read training config {}: {e}", path.display()))
        })?;
        let cfg: TrainingConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("invalid training config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One encoded training example.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub encoded: EncodedScene,
    pub need: NeedCategory,
    pub way: NeedsMeetingWay,
}

/// Per-epoch mean per-sample losses, emitted as JSON-lines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossTraceEntry {
    pub epoch: usize,
    pub need_loss: f64,
    pub way_loss: f64,
    pub total: f64,
}

/// Trains the model in place over seed-deterministically shuffled
/// mini-batches and returns the per-epoch loss trace.
///
/// Trailing batches smaller than two samples are skipped (batch
/// normalization needs at least two rows). A non-finite loss aborts with a
/// diagnostic naming the first offending batch.
pub fn train(
    model: &mut NeonModel,
    examples: &[TrainExample],
    config: &TrainingConfig,
) -> Result<Vec<LossTraceEntry>> {
    config.validate()?;
    if examples.len() < 2 {
        return Err(Error::Validation(format!(
            "training needs at least 2 examples, got {}",
            examples.len()
        )));
    }
    let single_task = model.config.variant == Variant::SingleTaskSum;
    let mut optimizer = OptimizerState::new(config.learning_rate);
    let mut trace = Vec::with_capacity(config.epochs);

    let mut order: Vec<usize> = (0..examples.len()).collect();
    for epoch in 0..config.epochs {
        let mut rng =
            ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        order.shuffle(&mut rng);

        let mut need_sum = 0.0;
        let mut way_sum = 0.0;
        let mut samples = 0usize;

        for (batch_index, chunk) in order.chunks(config.batch_size).enumerate() {
            if chunk.len() < 2 {
                continue;
            }
            let scenes: Vec<EncodedScene> =
                chunk.iter().map(|&i| examples[i].encoded.clone()).collect();
            let needs: Vec<NeedCategory> = chunk.iter().map(|&i| examples[i].need).collect();
            let ways: Vec<NeedsMeetingWay> = chunk.iter().map(|&i| examples[i].way).collect();

            let (grads, need_l, way_l) = batch_step(model, &scenes, &needs, &ways, config)?;
            let total = total_loss(
                need_l,
                way_l,
                config.lambda1,
                if single_task { 0.0 } else { config.lambda2 },
            )?;
            if !total.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite loss at epoch {epoch}, batch {batch_index}"
                )));
            }

            let mut params = model.params_mut();
            optimizer.step(&mut params, &grads)?;

            need_sum += need_l;
            way_sum += way_l;
            samples += chunk.len();
        }

        let n = samples.max(1) as f64;
        let entry = LossTraceEntry {
            epoch,
            need_loss: need_sum / n,
            way_loss: way_sum / n,
            total: (config.lambda1 * need_sum
                + if single_task { 0.0 } else { config.lambda2 * way_sum })
                / n,
        };
        trace.push(entry);
    }
    Ok(trace)
}

/// One forward/backward pass over a batch; returns the gradient set and the
/// two (summed) batch losses.
pub fn batch_step(
    model: &mut NeonModel,
    scenes: &[EncodedScene],
    needs: &[NeedCategory],
    ways: &[NeedsMeetingWay],
    config: &TrainingConfig,
) -> Result<(GradientSet, f64, f64)> {
    let single_task = model.config.variant == Variant::SingleTaskSum;
    let acts = model.forward_train(scenes)?;
    let q_need = softmax_rows(&acts.s_need)?;

    let need_l = focal_loss(&q_need, needs, config.gamma)?;
    let d_s_need = focal_loss_grad(&q_need, needs, config.gamma, config.lambda1)?;

    let (way_l, d_s_way) = if single_task {
        (0.0, Tensor::zeros(vec![scenes.len(), crate::data::WAY_COUNT]))
    } else {
        let q_way = softmax_rows(&acts.s_way)?;
        (
            way_loss(&q_way, ways)?,
            way_loss_grad(&q_way, ways, config.lambda2)?,
        )
    };

    let grads = model.backward(scenes, &acts, &d_s_need, &d_s_way)?;
    Ok((grads, need_l, way_l))
}

/// Writes a loss trace as JSON-lines.
pub fn write_loss_trace(path: &std::path::Path, trace: &[LossTraceEntry]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for entry in trace {
        serde_json::to_writer(&mut out, entry)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
