//! Model architecture configuration.

use serde::{Deserialize, Serialize};

use crate::data::{NEED_COUNT, WAY_COUNT};
use crate::error::{Error, Result};
use crate::features::{ContextFeatureVector, FeatureSchema, GroupFeatureVector};

/// Prediction-head wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Joint need + way prediction (the full model).
    Multitask,
    /// Way head removed; the need head consumes the sum of both mixture
    /// outputs. Way scores are reported as neutral zeros.
    SingleTaskSum,
}

/// Dimensions and switches of the prediction model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Embedding width shared by every categorical family.
    pub embedding_dim: usize,
    /// Output width of the feature-merging network.
    pub merge_dim: usize,
    /// Output width of the user-preference network.
    pub user_dim: usize,
    /// Output width of the shared and per-task expert networks.
    pub expert_dim: usize,
    /// Hidden width of the two-layer way head.
    pub way_hidden_dim: usize,
    pub need_count: usize,
    pub way_count: usize,
    pub variant: Variant,
    /// Replace the context feature block with zeros.
    pub drop_st: bool,
    /// Replace the group feature block with zeros.
    pub drop_group: bool,
    /// Embedding table sizes (vocabulary length incl. the reserved slot).
    pub poi_vocab: usize,
    pub aoi_vocab: usize,
    pub city_vocab: usize,
}

impl ModelConfig {
    /// Production dimensions with vocabulary sizes taken from a fitted schema.
    pub fn standard(schema: &FeatureSchema) -> ModelConfig {
        ModelConfig {
            embedding_dim: 16,
            merge_dim: 120,
            user_dim: 340,
            expert_dim: 256,
            way_hidden_dim: 10,
            need_count: NEED_COUNT,
            way_count: WAY_COUNT,
            variant: Variant::Multitask,
            drop_st: false,
            drop_group: false,
            poi_vocab: schema.poi_vocab.len(),
            aoi_vocab: schema.aoi_vocab.len(),
            city_vocab: schema.city_vocab.len(),
        }
    }

    /// Width of the fused scene representation (merge + user outputs).
    pub fn fused_dim(&self) -> usize {
        self.merge_dim + self.user_dim
    }

    /// Width of the embedded user vector: seven pooled embedding blocks plus
    /// the raw historical-share vector.
    pub fn user_raw_dim(&self) -> usize {
        7 * self.embedding_dim + NEED_COUNT
    }

    /// Width of the resolved context vector: dense block plus POI/AOI/city
    /// embeddings.
    pub fn context_dim(&self) -> usize {
        ContextFeatureVector::DENSE_LEN + 3 * self.embedding_dim
    }

    /// Width of the merge network input: context, group, and user blocks.
    pub fn merge_in_dim(&self) -> usize {
        self.context_dim() + GroupFeatureVector::LEN + self.user_raw_dim()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("embedding_dim", self.embedding_dim),
            ("merge_dim", self.merge_dim),
            ("user_dim", self.user_dim),
            ("expert_dim", self.expert_dim),
            ("way_hidden_dim", self.way_hidden_dim),
            ("poi_vocab", self.poi_vocab),
            ("aoi_vocab", self.aoi_vocab),
            ("city_vocab", self.city_vocab),
        ] {
            if v == 0 {
                return Err(Error::Validation(format!("{name} must be positive")));
            }
        }
        if self.need_count != NEED_COUNT {
            return Err(Error::Validation(format!(
                "need_count must be {NEED_COUNT}, got {}",
                self.need_count
            )));
        }
        if self.way_count != WAY_COUNT {
            return Err(Error::Validation(format!(
                "way_count must be {WAY_COUNT}, got {}",
                self.way_count
            )));
        }
        Ok(())
    }
}
