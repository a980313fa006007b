//! The gated multitask prediction model and its persistence.

mod checkpoint;
mod config;
mod neon;
mod scores;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use config::{ModelConfig, Variant};
pub use neon::{DenseBlock, Embeddings, ForwardActivations, NeonModel};
pub use scores::{predict_way, rank_needs, PredictionScores};
