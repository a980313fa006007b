//! Wire formats of the scoring and quota streams.

use serde::{Deserialize, Serialize};

use neon::data::{NeedCategory, NeedsMeetingWay, UserScene, NEED_COUNT, WAY_COUNT};
use neon::error::{Error, Result};
use neon::eval::DistributionVector;
use neon::features::{encode_scene, FeatureSet};
use neon::model::{predict_way, rank_needs, NeonModel, PredictionScores};
use neon::quota::{
    guess_you_like_quotas, homepage_quotas, popup_category, QuotaInputs, QuotaWeights,
    DEFAULT_QUOTA_FLOOR,
};

/// One scoring request: a full scene (history optional).
#[derive(Debug, Deserialize)]
pub struct SceneRequest {
    #[serde(flatten)]
    pub scene: UserScene,
}

/// One scoring response.
#[derive(Debug, Serialize)]
pub struct ScoreResponse {
    pub q_need: [f64; NEED_COUNT],
    pub q_way: [f64; WAY_COUNT],
    pub ranking: Vec<NeedCategory>,
    pub way: NeedsMeetingWay,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quotas: Option<[f64; NEED_COUNT]>,
}

/// Scores one scene, optionally attaching pure-model homepage quotas.
pub fn score_scene(
    model: &NeonModel,
    features: &FeatureSet,
    scene: &UserScene,
    with_quotas: bool,
) -> Result<ScoreResponse> {
    scene.validate()?;
    let encoded = encode_scene(scene, &features.schema, &features.tables)?;
    let scores = model.predict(&encoded)?;
    let quotas = if with_quotas {
        let inputs = QuotaInputs {
            model_scores: scores.clone(),
            preranking_proportions: DistributionVector::uniform(),
            supply_distribution: DistributionVector::uniform(),
            order_distribution: DistributionVector::uniform(),
            weights: QuotaWeights {
                w_model: 1.0,
                w_prerank: 0.0,
                w_supply: 0.0,
                w_order: 0.0,
            },
            floor: DEFAULT_QUOTA_FLOOR,
        };
        Some(homepage_quotas(&inputs)?.0)
    } else {
        None
    };
    Ok(ScoreResponse {
        q_need: scores.q_need,
        q_way: scores.q_way,
        ranking: rank_needs(&scores),
        way: predict_way(&scores),
        quotas,
    })
}

/// Raw scores as they appear on the quota wire.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawScores {
    pub s_need: [f64; NEED_COUNT],
    pub s_way: [f64; WAY_COUNT],
}

/// One quota request: either a scene (scored by the loaded model) or
/// precomputed scores, plus optional distributions, weights, floor, and the
/// leisure-page boost.
#[derive(Debug, Deserialize)]
pub struct QuotaRequest {
    #[serde(default)]
    pub scene: Option<UserScene>,
    #[serde(default)]
    pub scores: Option<RawScores>,
    #[serde(default)]
    pub prerank: Option<[f64; NEED_COUNT]>,
    #[serde(default)]
    pub supply: Option<[f64; NEED_COUNT]>,
    #[serde(default)]
    pub order: Option<[f64; NEED_COUNT]>,
    #[serde(default)]
    pub weights: Option<QuotaWeights>,
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub boost: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct QuotaResponse {
    pub quotas: [f64; NEED_COUNT],
    pub argmax_category: NeedCategory,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gyl_quotas: Option<[f64; NEED_COUNT]>,
}

/// Resolves a quota request against an optionally loaded model.
pub fn answer_quota_request(
    request: &QuotaRequest,
    model: Option<&NeonModel>,
    features: Option<&FeatureSet>,
) -> Result<QuotaResponse> {
    let scores = match (&request.scores, &request.scene) {
        (Some(raw), _) => PredictionScores::from_raw(raw.s_need, raw.s_way)?,
        (None, Some(scene)) => {
            let (model, features) = model.zip(features).ok_or_else(|| {
                Error::Validation(
                    "request carries a scene but no checkpoint/features are loaded".into(),
                )
            })?;
            scene.validate()?;
            let encoded = encode_scene(scene, &features.schema, &features.tables)?;
            model.predict(&encoded)?
        }
        (None, None) => {
            return Err(Error::Validation(
                "quota request needs either 'scores' or 'scene'".into(),
            ))
        }
    };

    let dist = |v: &Option<[f64; NEED_COUNT]>| -> Result<DistributionVector> {
        match v {
            Some(values) => DistributionVector::new(*values),
            None => Ok(DistributionVector::uniform()),
        }
    };
    let inputs = QuotaInputs {
        model_scores: scores.clone(),
        preranking_proportions: dist(&request.prerank)?,
        supply_distribution: dist(&request.supply)?,
        order_distribution: dist(&request.order)?,
        weights: request.weights.unwrap_or_default(),
        floor: request.floor.unwrap_or(DEFAULT_QUOTA_FLOOR),
    };
    let homepage = homepage_quotas(&inputs)?;
    let gyl = match request.boost {
        Some(boost) => Some(guess_you_like_quotas(&homepage, &scores, boost)?.0),
        None => None,
    };
    Ok(QuotaResponse {
        quotas: homepage.0,
        argmax_category: popup_category(&scores),
        gyl_quotas: gyl,
    })
}
