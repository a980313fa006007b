//! Ranking metrics (sort accuracy and its way-filtered variants), KL
//! divergence, and the offline evaluation report.

mod kld;
mod metrics;

pub use kld::{distribution_from_counts, kld, order_distribution, DistributionVector};
pub use metrics::{
    evaluate, rank_scenes, relative_ranking_error, sort_accuracy_from_samples, EvalReport,
    PerNeedStats, RankedSample, WayFilter, MAX_RANKING_ERROR,
};
