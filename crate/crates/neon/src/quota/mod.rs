//! Downstream quota allocation: homepage quotas, the leisure-page
//! way-score adjustment, and pop-up category selection.

use serde::{Deserialize, Serialize};

use crate::data::{NeedCategory, NEED_COUNT};
use crate::error::{Error, Result};
use crate::eval::DistributionVector;
use crate::model::{rank_needs, PredictionScores};
use crate::simplex::validate_simplex;

/// Default minimum per-category quota after flooring.
pub const DEFAULT_QUOTA_FLOOR: f64 = 0.005;

/// Mixing weights of the four quota sources. Must form a simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotaWeights {
    pub w_model: f64,
    pub w_prerank: f64,
    pub w_supply: f64,
    pub w_order: f64,
}

impl Default for QuotaWeights {
    fn default() -> Self {
        QuotaWeights {
            w_model: 0.5,
            w_prerank: 0.2,
            w_supply: 0.15,
            w_order: 0.15,
        }
    }
}

impl QuotaWeights {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.w_model, self.w_prerank, self.w_supply, self.w_order];
        validate_simplex(&parts, 1e-9, "quota weights")
    }

    /// The control arm: the model's scores carry no weight.
    pub fn without_model() -> QuotaWeights {
        QuotaWeights {
            w_model: 0.0,
            w_prerank: 0.45,
            w_supply: 0.275,
            w_order: 0.275,
        }
    }
}

/// Inputs to homepage quota generation.
#[derive(Debug, Clone)]
pub struct QuotaInputs {
    pub model_scores: PredictionScores,
    pub preranking_proportions: DistributionVector,
    pub supply_distribution: DistributionVector,
    pub order_distribution: DistributionVector,
    pub weights: QuotaWeights,
    pub floor: f64,
}

/// Per-category list proportions: a simplex over the ten needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotaVector(pub [f64; NEED_COUNT]);

impl QuotaVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn validate(&self) -> Result<()> {
        validate_simplex(&self.0, 1e-9, "quota vector")
    }
}

/// Blends the model's softmax scores with the pre-ranking, supply, and order
/// distributions, then floors and renormalizes so every category keeps at
/// least `floor` exposure.
///
/// With `w_model = 0` the result is independent of the model scores (the
/// control arm).
pub fn homepage_quotas(inputs: &QuotaInputs) -> Result<QuotaVector> {
    inputs.weights.validate()?;
    for (name, d) in [
        ("preranking_proportions", &inputs.preranking_proportions),
        ("supply_distribution", &inputs.supply_distribution),
        ("order_distribution", &inputs.order_distribution),
    ] {
        validate_simplex(d.as_slice(), 1e-9, name)?;
    }
    validate_simplex(&inputs.model_scores.q_need, 1e-9, "model q_need")?;
    if !(0.0..0.1).contains(&inputs.floor) {
        return Err(Error::Validation(format!(
            "quota floor must lie in [0, 0.1), got {}",
            inputs.floor
        )));
    }

    let w = &inputs.weights;
    let mut q = [0.0; NEED_COUNT];
    for i in 0..NEED_COUNT {
        q[i] = w.w_model * inputs.model_scores.q_need[i]
            + w.w_prerank * inputs.preranking_proportions.as_slice()[i]
            + w.w_supply * inputs.supply_distribution.as_slice()[i]
            + w.w_order * inputs.order_distribution.as_slice()[i];
    }
    floor_and_renormalize(&mut q, inputs.floor);
    let out = QuotaVector(q);
    out.validate()?;
    Ok(out)
}

/// Guarantees `floor` per slot and a total of one: each slot receives the
/// floor plus its proportional share of the remaining mass.
fn floor_and_renormalize(q: &mut [f64; NEED_COUNT], floor: f64) {
    let spare = 1.0 - NEED_COUNT as f64 * floor;
    let excess: Vec<f64> = q.iter().map(|&v| (v - floor).max(0.0)).collect();
    let total: f64 = excess.iter().sum();
    if total <= 0.0 {
        // Degenerate: everything at or below the floor — spread evenly.
        q.fill(1.0 / NEED_COUNT as f64);
        return;
    }
    for (slot, e) in q.iter_mut().zip(excess) {
        *slot = floor + spare * e / total;
    }
}

/// Re-weights quotas by the needs-meeting-way scores: categories whose way
/// scored above one half gain mass, the other way loses it, then the result
/// is renormalized. `boost = 0` is the identity.
pub fn guess_you_like_quotas(
    homepage: &QuotaVector,
    scores: &PredictionScores,
    boost: f64,
) -> Result<QuotaVector> {
    homepage.validate()?;
    if !boost.is_finite() || boost < 0.0 {
        return Err(Error::Validation(format!(
            "boost must be a finite non-negative real, got {boost}"
        )));
    }
    let mut out = [0.0; NEED_COUNT];
    for need in NeedCategory::ALL {
        let way_score = scores.q_way[need.way().code()];
        let multiplier = (1.0 + boost * (way_score - 0.5) * 2.0).max(0.0);
        out[need.code()] = homepage.0[need.code()] * multiplier;
    }
    crate::simplex::normalize(&mut out, "guess-you-like quotas")?;
    Ok(QuotaVector(out))
}

/// The single category to push: the argmax of the need scores under the
/// deterministic tie rule.
pub fn popup_category(scores: &PredictionScores) -> NeedCategory {
    rank_needs(scores)[0]
}
