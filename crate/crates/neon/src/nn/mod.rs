//! Minimal dense neural-network substrate.
//!
//! Tensors, linear layers, ReLU, batch normalization, softmax, and an
//! adaptive-moment optimizer — everything the prediction model needs, with
//! exact hand-derived backward passes verified against finite differences.

mod activation;
mod adam;
mod batchnorm;
pub(crate) mod kernels;
mod linear;
mod tensor;

pub use activation::{relu, relu_backward, softmax, softmax_rows};
pub use adam::{GradientSet, OptimizerState};
pub use batchnorm::{BatchNormCache, BatchNormGrads, BatchNormLayer, Mode};
pub use linear::{LinearGrads, LinearLayer};
pub use tensor::Tensor;
