//! Losses, dataset splitting, and the training loop.

mod loss;
mod pipeline;
mod split;
mod trainer;

pub use loss::{
    focal_loss, focal_loss_grad, total_loss, way_loss, way_loss_grad, PROB_FLOOR,
};
pub use pipeline::{encode_examples, run_training, ModelOptions, TrainedArtifacts};
pub use split::{split_dataset, DatasetSplit};
pub use trainer::{
    batch_step, train, write_loss_trace, LossTraceEntry, TrainExample, TrainingConfig,
};
