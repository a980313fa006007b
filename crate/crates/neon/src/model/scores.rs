//! Prediction scores, ranking, and way selection.

use serde::{Deserialize, Serialize};

use crate::data::{NeedCategory, NeedsMeetingWay, NEED_COUNT, WAY_COUNT};
use crate::error::{Error, Result};
use crate::nn::softmax;

/// Raw scores and their softmax forms for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionScores {
    /// Raw need scores, one per category code.
    pub s_need: [f64; NEED_COUNT],
    /// Raw way scores: via-delivery, in-store.
    pub s_way: [f64; WAY_COUNT],
    /// Softmax of `s_need`.
    pub q_need: [f64; NEED_COUNT],
    /// Softmax of `s_way`.
    pub q_way: [f64; WAY_COUNT],
}

impl PredictionScores {
    pub fn from_raw(s_need: [f64; NEED_COUNT], s_way: [f64; WAY_COUNT]) -> Result<Self> {
        for v in s_need.iter().chain(s_way.iter()) {
            if !v.is_finite() {
                return Err(Error::Numerical("non-finite prediction score".into()));
            }
        }
        let qn = softmax(&s_need)?;
        let qw = softmax(&s_way)?;
        let mut q_need = [0.0; NEED_COUNT];
        q_need.copy_from_slice(&qn);
        let mut q_way = [0.0; WAY_COUNT];
        q_way.copy_from_slice(&qw);
        Ok(PredictionScores { s_need, s_way, q_need, q_way })
    }
}

/// All ten needs ordered by descending score; ties broken by ascending
/// category code, giving a deterministic total order.
pub fn rank_needs(scores: &PredictionScores) -> Vec<NeedCategory> {
    let mut order: Vec<usize> = (0..NEED_COUNT).collect();
    order.sort_by(|&a, &b| {
        scores.s_need[b]
            .partial_cmp(&scores.s_need[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
        .into_iter()
        .map(|c| NeedCategory::from_code(c).expect("codes 0..10"))
        .collect()
}

/// The higher-scoring needs-meeting way; ties resolve to via-delivery.
pub fn predict_way(scores: &PredictionScores) -> NeedsMeetingWay {
    if scores.s_way[1] > scores.s_way[0] {
        NeedsMeetingWay::InStore
    } else {
        NeedsMeetingWay::ViaDelivery
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(s_need: [f64; NEED_COUNT], s_way: [f64; WAY_COUNT]) -> PredictionScores {
        PredictionScores::from_raw(s_need, s_way).unwrap()
    }

    #[test]
    fn softmax_forms_are_simplices() {
        let s = scores([1.0, -2.0, 0.5, 3.0, 0.0, 0.0, -1.0, 2.0, 0.3, -0.4], [0.2, -0.2]);
        assert!((s.q_need.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((s.q_way.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_score_ranks_first() {
        let mut sn = [0.0; NEED_COUNT];
        sn[NeedCategory::Tourism.code()] = 5.0;
        let s = scores(sn, [0.0, 0.0]);
        assert_eq!(rank_needs(&s)[0], NeedCategory::Tourism);
    }

    #[test]
    fn all_equal_scores_rank_by_code() {
        let s = scores([1.5; NEED_COUNT], [0.0, 0.0]);
        let ranking = rank_needs(&s);
        for (i, need) in ranking.iter().enumerate() {
            assert_eq!(need.code(), i);
        }
    }

    #[test]
    fn random_scores_match_stable_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let mut sn = [0.0; NEED_COUNT];
            for v in &mut sn {
                *v = rng.gen_range(-3.0..3.0);
            }
            let s = scores(sn, [0.0, 0.0]);
            let ranking = rank_needs(&s);

            // Brute-force stable sort oracle over (score desc, code asc).
            let mut oracle: Vec<usize> = (0..NEED_COUNT).collect();
            oracle.sort_by(|&a, &b| sn[b].partial_cmp(&sn[a]).unwrap().then(a.cmp(&b)));
            let got: Vec<usize> = ranking.iter().map(|n| n.code()).collect();
            assert_eq!(got, oracle);
        }
    }

    #[test]
    fn ranking_is_shift_invariant() {
        let sn = [0.3, -1.0, 2.0, 0.0, 1.0, -0.5, 0.7, 0.1, -2.0, 0.9];
        let s1 = scores(sn, [0.0, 0.0]);
        let mut shifted = sn;
        for v in &mut shifted {
            *v += 123.0;
        }
        let s2 = scores(shifted, [0.0, 0.0]);
        assert_eq!(rank_needs(&s1), rank_needs(&s2));
    }

    #[test]
    fn way_prediction_and_tie_rule() {
        assert_eq!(predict_way(&scores([0.0; 10], [2.0, 1.0])), NeedsMeetingWay::ViaDelivery);
        assert_eq!(predict_way(&scores([0.0; 10], [1.0, 2.0])), NeedsMeetingWay::InStore);
        assert_eq!(predict_way(&scores([0.0; 10], [0.0, 0.0])), NeedsMeetingWay::ViaDelivery);
    }

    #[test]
    fn way_prediction_is_scale_invariant() {
        for (a, b) in [(0.4, -0.3), (-1.0, 2.5), (0.0, 1e-9)] {
            let small = predict_way(&scores([0.0; 10], [a, b]));
            let large = predict_way(&scores([0.0; 10], [a * 1e6, b * 1e6]));
            assert_eq!(small, large);
        }
    }

    #[test]
    fn non_finite_scores_are_rejected() {
        let mut sn = [0.0; NEED_COUNT];
        sn[0] = f64::INFINITY;
        assert!(PredictionScores::from_raw(sn, [0.0, 0.0]).is_err());
    }
}
