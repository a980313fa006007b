//! Synthetic spatiotemporal world with known conditional need distributions,
//! enabling oracle-based evaluation.

mod config;
mod model;
mod oracle;
mod sample;

pub use config::WorldConfig;
pub use model::{build_world, CellIndex, WorldModel, CELL_COUNT};
pub use oracle::{bayes_optimal_sa, oracle_ranking};
pub use sample::{all_profiles, sample_records};
