//! Seed-deterministic train/eval splitting with way-filtered views.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{LabeledScene, NeedsMeetingWay};
use crate::error::{Error, Result};

/// A disjoint train/eval partition of labeled scenes. The eval indices are
/// additionally split by ground-truth needs-meeting way.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<LabeledScene>,
    pub eval: Vec<LabeledScene>,
}

impl DatasetSplit {
    /// Eval scenes whose true way is via-delivery.
    pub fn eval_via_delivery(&self) -> impl Iterator<Item = &LabeledScene> {
        self.eval
            .iter()
            .filter(|s| s.way_label() == NeedsMeetingWay::ViaDelivery)
    }

    /// Eval scenes whose true way is in-store.
    pub fn eval_in_store(&self) -> impl Iterator<Item = &LabeledScene> {
        self.eval
            .iter()
            .filter(|s| s.way_label() == NeedsMeetingWay::InStore)
    }
}

/// Splits scenes into train/eval by a seed-deterministic permutation.
/// `fraction` is the train share.
pub fn split_dataset(
    scenes: Vec<LabeledScene>,
    fraction: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    if !(0.0 < fraction && fraction < 1.0) {
        return Err(Error::Validation(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if scenes.len() < 2 {
        return Err(Error::Validation(format!(
            "cannot split {} scene(s)",
            scenes.len()
        )));
    }

    let mut order: Vec<usize> = (0..scenes.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_train = ((scenes.len() as f64 * fraction).round() as usize)
        .clamp(1, scenes.len() - 1);

    let mut take: Vec<Option<LabeledScene>> = scenes.into_iter().map(Some).collect();
    let train = order[..n_train]
        .iter()
        .map(|&i| take[i].take().expect("each index used once"))
        .collect();
    let eval = order[n_train..]
        .iter()
        .map(|&i| take[i].take().expect("each index used once"))
        .collect();
    Ok(DatasetSplit { train, eval })
}
