//! Prediction of daily living needs from spatiotemporal context.
//!
//! People generate different service needs depending on where they are, what
//! time it is, what the weather is doing, and who they are: food delivery at
//! a workplace desk on a rainy noon, a restaurant table on a sunny evening
//! downtown, a hotel room the night a trip starts. This crate implements a
//! complete desk-scale system for predicting those needs over a fixed
//! taxonomy of ten categories:
//!
//! - **Feature mining** ([`features`]): per-user features (profile, recent
//!   and aggregated behavior, most-visited places), dense context features
//!   (time, location, weather, travel state), and corpus-level group
//!   behavior tables with association-rule mining over need co-occurrence.
//! - **A gated multitask model** ([`model`]): embeddings feed a
//!   feature-merging network and a user-preference network; their fused
//!   output drives a shared network and two task experts mixed by per-task
//!   softmax gates; one head scores the ten needs, the other scores the two
//!   ways of meeting them (via delivery vs. in store).
//! - **Training** ([`train`]): multi-class focal loss for the need task,
//!   two-class cross-entropy for the way task, combined with configurable
//!   weights and optimized by an adaptive-moment method over an exact,
//!   finite-difference-verified backward pass ([`nn`]).
//! - **Evaluation** ([`eval`]): sort accuracy (overall and per
//!   needs-meeting way) and KL divergence between order distributions and
//!   allocated quotas.
//! - **Synthetic worlds** ([`world`]): a generator with known conditional
//!   need distributions and a Bayes-optimal ranking oracle, so every claim
//!   is testable against ground truth.
//! - **Quota allocation** ([`quota`]): homepage category quotas, the
//!   way-score adjustment for leisure-page recommendations, and pop-up
//!   category selection.
//!
//! The `neon-cli` crate wires these into an operator command line; the
//! workspace book (`book/`) walks through the concepts with runnable
//! examples.

pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod nn;
pub mod quota;
pub mod train;
pub mod world;

pub(crate) mod simplex;

pub use error::{Error, Result};
