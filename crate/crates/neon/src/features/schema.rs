//! Feature schema: categorical vocabularies and standardization constants,
//! fitted on the training split only.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::data::PurchaseRecord;
use crate::error::{Error, Result};

/// Reserved vocabulary index for out-of-vocabulary ids.
pub const OOV_INDEX: usize = 0;

/// Mean/standard deviation of one real-valued feature on the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    fn fit(values: impl Iterator<Item = f64> + Clone) -> Standardizer {
        let (mut n, mut sum) = (0usize, 0.0);
        for v in values.clone() {
            n += 1;
            sum += v;
        }
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        let mut ss = 0.0;
        for v in values {
            ss += (v - mean) * (v - mean);
        }
        let var = if n == 0 { 0.0 } else { ss / n as f64 };
        let std = var.sqrt();
        Standardizer {
            mean,
            // Constant features standardize to zero rather than dividing by zero.
            std: if std > 0.0 { std } else { 1.0 },
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }
}

/// An id → dense-index vocabulary with index 0 reserved for unseen ids.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Vocabulary {
    map: BTreeMap<u32, usize>,
}

impl Vocabulary {
    fn fit(ids: impl Iterator<Item = u32>) -> Vocabulary {
        let mut distinct: Vec<u32> = ids.collect();
        distinct.sort_unstable();
        distinct.dedup();
        let map = distinct
            .into_iter()
            .enumerate()
            .map(|(i, id)| (id, i + 1)) // 0 is OOV
            .collect();
        Vocabulary { map }
    }

    /// Dense index for an id; unseen ids map to [`OOV_INDEX`].
    pub fn index(&self, id: u32) -> usize {
        self.map.get(&id).copied().unwrap_or(OOV_INDEX)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.map.contains_key(&id)
    }

    /// Table size: distinct ids plus the OOV slot.
    pub fn len(&self) -> usize {
        self.map.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// The fitted feature schema. Encoding against a schema is pure; the only
/// mutable state is an out-of-vocabulary diagnostics counter.
#[derive(Debug, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub poi_vocab: Vocabulary,
    pub aoi_vocab: Vocabulary,
    pub city_vocab: Vocabulary,
    pub temperature: Standardizer,
    pub humidity: Standardizer,
    pub wind: Standardizer,
    /// OOV lookups observed since construction (diagnostics only; not part of
    /// the persisted document).
    #[serde(skip)]
    oov_count: AtomicU64,
}

impl Clone for FeatureSchema {
    fn clone(&self) -> Self {
        FeatureSchema {
            poi_vocab: self.poi_vocab.clone(),
            aoi_vocab: self.aoi_vocab.clone(),
            city_vocab: self.city_vocab.clone(),
            temperature: self.temperature,
            humidity: self.humidity,
            wind: self.wind,
            oov_count: AtomicU64::new(0),
        }
    }
}

impl FeatureSchema {
    /// Fits vocabularies and standardizers on training-split records.
    pub fn fit(train_records: &[PurchaseRecord]) -> Result<FeatureSchema> {
        if train_records.is_empty() {
            return Err(Error::EmptyInput("schema fit requires a non-empty corpus".into()));
        }
        Ok(FeatureSchema {
            poi_vocab: Vocabulary::fit(train_records.iter().map(|r| r.context.poi_id)),
            aoi_vocab: Vocabulary::fit(train_records.iter().map(|r| r.context.aoi_id)),
            city_vocab: Vocabulary::fit(train_records.iter().map(|r| r.context.city_id)),
            temperature: Standardizer::fit(train_records.iter().map(|r| r.context.temperature_c)),
            humidity: Standardizer::fit(train_records.iter().map(|r| r.context.humidity_pct)),
            wind: Standardizer::fit(train_records.iter().map(|r| r.context.wind_kmh)),
            oov_count: AtomicU64::new(0),
        })
    }

    pub(crate) fn lookup(&self, vocab: &Vocabulary, id: u32) -> usize {
        let idx = vocab.index(id);
        if idx == OOV_INDEX {
            self.oov_count.fetch_add(1, Ordering::Relaxed);
        }
        idx
    }

    /// Number of out-of-vocabulary lookups since this schema was constructed.
    pub fn oov_lookups(&self) -> u64 {
        self.oov_count.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_reserves_index_zero() {
        let v = Vocabulary::fit([10u32, 5, 10, 99].into_iter());
        assert_eq!(v.len(), 4); // 3 distinct + OOV
        assert_eq!(v.index(5), 1);
        assert_eq!(v.index(10), 2);
        assert_eq!(v.index(99), 3);
        assert_eq!(v.index(1234), OOV_INDEX);
    }

    #[test]
    fn standardizer_centers_training_mean_to_zero() {
        let s = Standardizer::fit([1.0, 2.0, 3.0].iter().copied());
        assert!((s.apply(2.0)).abs() < 1e-15);
        assert!(s.apply(3.0) > 0.0);
    }

    #[test]
    fn constant_feature_does_not_divide_by_zero() {
        let s = Standardizer::fit([7.0, 7.0].iter().copied());
        assert_eq!(s.apply(7.0), 0.0);
        assert!(s.apply(8.0).is_finite());
    }
}
