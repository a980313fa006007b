//! Sort accuracy: how close the true need ranks to the top.

use serde::{Deserialize, Serialize};

use crate::data::{LabeledScene, NeedCategory, NeedsMeetingWay, NEED_COUNT};
use crate::error::{Error, Result};
use crate::features::{encode_scene, FeatureSet};
use crate::model::{rank_needs, NeonModel, PredictionScores};
use crate::nn::Tensor;

/// Worst possible ranking error with ten categories.
pub const MAX_RANKING_ERROR: usize = NEED_COUNT - 1;

/// Zero-based distance of the ground truth from the top of the ranking.
///
/// Errors unless `ranking` is a permutation of all ten needs.
pub fn relative_ranking_error(ranking: &[NeedCategory], truth: NeedCategory) -> Result<usize> {
    if ranking.len() != NEED_COUNT {
        return Err(Error::Validation(format!(
            "ranking has {} entries, expected {NEED_COUNT}",
            ranking.len()
        )));
    }
    let mut seen = [false; NEED_COUNT];
    for need in ranking {
        if seen[need.code()] {
            return Err(Error::Validation(format!(
                "ranking repeats {need:?}; not a permutation"
            )));
        }
        seen[need.code()] = true;
    }
    ranking
        .iter()
        .position(|&n| n == truth)
        .ok_or_else(|| Error::Validation(format!("{truth:?} absent from ranking")))
}

/// Per-sample score: `1 − RRE / MRE`.
pub fn rank_score(ranking: &[NeedCategory], truth: NeedCategory) -> Result<f64> {
    let rre = relative_ranking_error(ranking, truth)?;
    Ok(1.0 - rre as f64 / MAX_RANKING_ERROR as f64)
}

/// Which ground-truth population a metric averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WayFilter {
    All,
    ViaDelivery,
    InStore,
}

/// One evaluated sample: the model's ranking and the ground truth.
#[derive(Debug, Clone)]
pub struct RankedSample {
    pub ranking: Vec<NeedCategory>,
    pub truth: NeedCategory,
}

/// Mean per-sample score over samples passing the way filter. Errors when
/// the filtered set is empty.
pub fn sort_accuracy_from_samples(samples: &[RankedSample], filter: WayFilter) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in samples {
        let keep = match filter {
            WayFilter::All => true,
            WayFilter::ViaDelivery => s.truth.way() == NeedsMeetingWay::ViaDelivery,
            WayFilter::InStore => s.truth.way() == NeedsMeetingWay::InStore,
        };
        if keep {
            sum += rank_score(&s.ranking, s.truth)?;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyInput(format!(
            "no samples pass the {filter:?} filter"
        )));
    }
    Ok(sum / n as f64)
}

/// Per-need breakdown of ranking quality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerNeedStats {
    pub need: NeedCategory,
    pub count: usize,
    /// Mean `1 − RRE/MRE` over samples whose truth is this need.
    pub mean_rank_score: f64,
    /// Mean reciprocal rank `1/(RRE+1)` over the same samples.
    pub mean_reciprocal_rank: f64,
}

/// The offline evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub sa: f64,
    pub vdsa: f64,
    pub issa: f64,
    pub n_total: usize,
    pub n_via_delivery: usize,
    pub n_in_store: usize,
    pub per_need: Vec<PerNeedStats>,
}

impl EvalReport {
    /// Builds the report from per-sample rankings. SA is accumulated from
    /// the two way populations, so the partition identity
    /// `SA·|T| = |T_VD|·VDSA + |T_IS|·ISSA` holds to rounding.
    pub fn from_samples(samples: &[RankedSample]) -> Result<EvalReport> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("evaluation over zero samples".into()));
        }
        let mut sum = [0.0f64; 2];
        let mut count = [0usize; 2];
        let mut per_need_sum = [0.0f64; NEED_COUNT];
        let mut per_need_mrr = [0.0f64; NEED_COUNT];
        let mut per_need_count = [0usize; NEED_COUNT];

        for s in samples {
            let rre = relative_ranking_error(&s.ranking, s.truth)?;
            let score = 1.0 - rre as f64 / MAX_RANKING_ERROR as f64;
            let way = s.truth.way().code();
            sum[way] += score;
            count[way] += 1;
            per_need_sum[s.truth.code()] += score;
            per_need_mrr[s.truth.code()] += 1.0 / (rre + 1) as f64;
            per_need_count[s.truth.code()] += 1;
        }

        let n_total = count[0] + count[1];
        let sa = (sum[0] + sum[1]) / n_total as f64;
        let vdsa = if count[0] > 0 { sum[0] / count[0] as f64 } else { 0.0 };
        let issa = if count[1] > 0 { sum[1] / count[1] as f64 } else { 0.0 };

        let per_need = NeedCategory::ALL
            .iter()
            .map(|&need| {
                let c = per_need_count[need.code()];
                PerNeedStats {
                    need,
                    count: c,
                    mean_rank_score: if c > 0 {
                        per_need_sum[need.code()] / c as f64
                    } else {
                        0.0
                    },
                    mean_reciprocal_rank: if c > 0 {
                        per_need_mrr[need.code()] / c as f64
                    } else {
                        0.0
                    },
                }
            })
            .collect();

        Ok(EvalReport {
            sa,
            vdsa,
            issa,
            n_total,
            n_via_delivery: count[0],
            n_in_store: count[1],
            per_need,
        })
    }

    /// Plain-text table with the three headline metrics.
    pub fn text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>10} {:>10} {:>10}\n",
            "Population", "VDSA", "ISSA", "SA"
        ));
        out.push_str(&format!(
            "{:<12} {:>10.4} {:>10.4} {:>10.4}\n",
            "metric", self.vdsa, self.issa, self.sa
        ));
        out.push_str(&format!(
            "{:<12} {:>10} {:>10} {:>10}\n",
            "samples", self.n_via_delivery, self.n_in_store, self.n_total
        ));
        out
    }
}

/// Scores labeled scenes with the model (inference mode, batched) and builds
/// the evaluation report.
pub fn evaluate(
    model: &NeonModel,
    features: &FeatureSet,
    scenes: &[LabeledScene],
) -> Result<EvalReport> {
    let samples = rank_scenes(model, features, scenes)?;
    EvalReport::from_samples(&samples)
}

/// Ranks every scene with the model.
pub fn rank_scenes(
    model: &NeonModel,
    features: &FeatureSet,
    scenes: &[LabeledScene],
) -> Result<Vec<RankedSample>> {
    use rayon::prelude::*;
    let encoded: Vec<crate::features::EncodedScene> = scenes
        .par_iter()
        .map(|s| encode_scene(&s.scene, &features.schema, &features.tables))
        .collect::<Result<_>>()?;

    const CHUNK: usize = 512;
    let mut samples = Vec::with_capacity(scenes.len());
    for (chunk_start, chunk) in encoded.chunks(CHUNK).enumerate().map(|(i, c)| (i * CHUNK, c)) {
        let (s_need, s_way) = model.forward_infer(chunk)?;
        for row in 0..chunk.len() {
            let scores = scores_from_rows(&s_need, &s_way, row)?;
            samples.push(RankedSample {
                ranking: rank_needs(&scores),
                truth: scenes[chunk_start + row].need_label,
            });
        }
    }
    Ok(samples)
}

pub(crate) fn scores_from_rows(s_need: &Tensor, s_way: &Tensor, row: usize) -> Result<PredictionScores> {
    let mut sn = [0.0; NEED_COUNT];
    sn.copy_from_slice(s_need.row(row));
    let mut sw = [0.0; crate::data::WAY_COUNT];
    sw.copy_from_slice(s_way.row(row));
    PredictionScores::from_raw(sn, sw)
}
