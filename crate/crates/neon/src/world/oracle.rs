//! The Bayes-optimal ranking oracle: the best any model can do in
//! expectation, computed from the world's true conditional distributions.

use crate::data::{LabeledScene, NeedCategory, NEED_COUNT};
use crate::error::Result;
use crate::eval::MAX_RANKING_ERROR;
use crate::world::model::WorldModel;

/// Ranks by the true per-user logits for a scene's (group, cell).
pub fn oracle_ranking(world: &WorldModel, scene: &LabeledScene) -> Result<Vec<NeedCategory>> {
    let user = world.user_index(&scene.scene.profile.user_id)?;
    let cell = world.cell_of_context(&scene.scene.context)?;
    let logits = world.user_logits(user, cell);
    let mut order: Vec<usize> = (0..NEED_COUNT).collect();
    order.sort_by(|&a, &b| {
        logits[b]
            .partial_cmp(&logits[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(order
        .into_iter()
        .map(|c| NeedCategory::from_code(c).unwrap())
        .collect())
}

/// Sort accuracy achieved by ranking each scene with the true conditional
/// distribution. Errors on scenes foreign to this world.
pub fn bayes_optimal_sa(world: &WorldModel, scenes: &[LabeledScene]) -> Result<f64> {
    if scenes.is_empty() {
        return Err(crate::error::Error::EmptyInput(
            "oracle evaluation over zero scenes".into(),
        ));
    }
    let mut sum = 0.0;
    for scene in scenes {
        let ranking = oracle_ranking(world, scene)?;
        let pos = ranking
            .iter()
            .position(|&n| n == scene.need_label)
            .expect("ranking is a permutation");
        sum += 1.0 - pos as f64 / MAX_RANKING_ERROR as f64;
    }
    Ok(sum / scenes.len() as f64)
}
