//! Encoders turning scenes into the model's user and context feature vectors.

use std::collections::BTreeSet;

use crate::data::{
    NeedCategory, SpatioTemporalContext, TimePeriod, TravelState, UserScene, WeatherType,
    NEED_COUNT,
};
use crate::error::Result;
use crate::features::schema::FeatureSchema;

/// How many most-recent purchases feed the recent-behavior multi-hot sets.
pub const RECENT_K: usize = 10;

/// How many most-visited POIs/AOIs are kept per user.
pub const TOP_PLACES: usize = 50;

/// Sparse user features: categorical profile slots, recent-behavior multi-hot
/// sets, the per-need purchase-share vector, and the user's most visited
/// places.
///
/// The corpus records purchases only, so the recent "clicked" set collapses
/// to the recent purchased needs, mirroring the ordered set.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseUserFeatures {
    pub age_index: usize,
    pub gender_index: usize,
    pub city_index: usize,
    pub recent_clicked_needs: BTreeSet<NeedCategory>,
    pub recent_ordered_needs: BTreeSet<NeedCategory>,
    /// Purchase fraction per need over the full history; all zeros when the
    /// history is empty.
    pub historical_share: [f64; NEED_COUNT],
    /// Vocabulary indices of the user's most visited POIs, at most
    /// [`TOP_PLACES`], most-visited first.
    pub top_pois: Vec<usize>,
    pub top_aois: Vec<usize>,
}

/// Dense context features plus the embedding ids resolved later by the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextFeatureVector {
    /// Fixed layout, see [`ContextFeatureVector::DENSE_LEN`] and the offsets
    /// below.
    pub dense: Vec<f64>,
    pub poi_index: usize,
    pub aoi_index: usize,
    pub city_index: usize,
}

impl ContextFeatureVector {
    pub const HOUR_OFFSET: usize = 0; // 24 one-hot slots
    pub const DAY_OFFSET: usize = 24; // 7 one-hot slots
    pub const HOLIDAY_OFFSET: usize = 31; // 1 flag
    pub const PERIOD_OFFSET: usize = 32; // 7 one-hot slots
    pub const WEATHER_REAL_OFFSET: usize = 39; // 3 standardized reals
    pub const WEATHER_TYPE_OFFSET: usize = 42; // 4 one-hot slots
    pub const TRAVEL_OFFSET: usize = 46; // 3 one-hot slots
    pub const DENSE_LEN: usize = 49;
}

/// Encodes a scene's user side. Deterministic; the historical share is
/// computed from the scene history only.
pub fn encode_user(scene: &UserScene, schema: &FeatureSchema) -> SparseUserFeatures {
    let profile = &scene.profile;

    let mut recent: Vec<NeedCategory> = scene
        .history
        .iter()
        .rev()
        .take(RECENT_K)
        .map(|r| r.need)
        .collect();
    recent.reverse();
    let recent_set: BTreeSet<NeedCategory> = recent.into_iter().collect();

    let mut historical_share = [0.0; NEED_COUNT];
    if !scene.history.is_empty() {
        for r in &scene.history {
            historical_share[r.need.code()] += 1.0;
        }
        let n = scene.history.len() as f64;
        for s in &mut historical_share {
            *s /= n;
        }
    }

    let top_pois = top_visited(scene.history.iter().map(|r| r.context.poi_id), |id| {
        schema.lookup(&schema.poi_vocab, id)
    });
    let top_aois = top_visited(scene.history.iter().map(|r| r.context.aoi_id), |id| {
        schema.lookup(&schema.aoi_vocab, id)
    });

    SparseUserFeatures {
        age_index: profile.age_band.code(),
        gender_index: profile.gender.code(),
        city_index: schema.lookup(&schema.city_vocab, profile.resident_city_id),
        recent_clicked_needs: recent_set.clone(),
        recent_ordered_needs: recent_set,
        historical_share,
        top_pois,
        top_aois,
    }
}

fn top_visited(ids: impl Iterator<Item = u32>, mut lookup: impl FnMut(u32) -> usize) -> Vec<usize> {
    let mut counts: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
    for id in ids {
        *counts.entry(id).or_insert(0) += 1;
    }
    let mut ranked: Vec<(u32, usize)> = counts.into_iter().collect();
    // Most visited first; ties broken by ascending id for determinism.
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(TOP_PLACES)
        .map(|(id, _)| lookup(id))
        .collect()
}

/// Encodes a context into the fixed dense layout. Errors when the context's
/// internal consistency invariants fail.
pub fn encode_context(
    ctx: &SpatioTemporalContext,
    schema: &FeatureSchema,
) -> Result<ContextFeatureVector> {
    ctx.validate()?;

    let mut dense = vec![0.0; ContextFeatureVector::DENSE_LEN];
    dense[ContextFeatureVector::HOUR_OFFSET + ctx.hour as usize] = 1.0;
    dense[ContextFeatureVector::DAY_OFFSET + ctx.day_of_week as usize] = 1.0;
    dense[ContextFeatureVector::HOLIDAY_OFFSET] = if ctx.is_holiday { 1.0 } else { 0.0 };
    dense[ContextFeatureVector::PERIOD_OFFSET + ctx.time_period.code()] = 1.0;
    dense[ContextFeatureVector::WEATHER_REAL_OFFSET] = schema.temperature.apply(ctx.temperature_c);
    dense[ContextFeatureVector::WEATHER_REAL_OFFSET + 1] = schema.humidity.apply(ctx.humidity_pct);
    dense[ContextFeatureVector::WEATHER_REAL_OFFSET + 2] = schema.wind.apply(ctx.wind_kmh);
    dense[ContextFeatureVector::WEATHER_TYPE_OFFSET + ctx.weather_type.code()] = 1.0;
    dense[ContextFeatureVector::TRAVEL_OFFSET + ctx.travel_state.code()] = 1.0;

    Ok(ContextFeatureVector {
        dense,
        poi_index: schema.lookup(&schema.poi_vocab, ctx.poi_id),
        aoi_index: schema.lookup(&schema.aoi_vocab, ctx.aoi_id),
        city_index: schema.lookup(&schema.city_vocab, ctx.city_id),
    })
}

// Silence unused warnings for enum-size constants referenced in the layout docs.
const _: () = {
    assert!(ContextFeatureVector::DENSE_LEN == 24 + 7 + 1 + TimePeriod::ALL.len() + 3 + WeatherType::ALL.len() + TravelState::ALL.len());
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AgeBand, Gender, PurchaseRecord, UserProfile};

    fn ctx_at(ts: i64) -> SpatioTemporalContext {
        let hour = crate::data::hour_of_timestamp(ts);
        SpatioTemporalContext {
            timestamp: ts,
            hour,
            day_of_week: crate::data::day_of_week_of_timestamp(ts),
            is_holiday: false,
            time_period: TimePeriod::from_hour(hour),
            poi_id: 1,
            aoi_id: 1,
            city_id: 1,
            weather_type: WeatherType::Sunny,
            temperature_c: 20.0,
            humidity_pct: 50.0,
            wind_kmh: 3.0,
            travel_state: TravelState::BasedInResidentCity,
        }
    }

    fn record(ts: i64, need: NeedCategory) -> PurchaseRecord {
        PurchaseRecord {
            user_id: "u1".into(),
            context: ctx_at(ts),
            need,
        }
    }

    fn scene_with_history(history: Vec<PurchaseRecord>) -> UserScene {
        UserScene {
            profile: UserProfile {
                user_id: "u1".into(),
                age_band: AgeBand::Age36To50,
                gender: Gender::Male,
                resident_city_id: 1,
            },
            context: ctx_at(1_000_000),
            history,
        }
    }

    fn schema_for(records: &[PurchaseRecord]) -> FeatureSchema {
        FeatureSchema::fit(records).unwrap()
    }

    #[test]
    fn empty_history_gives_zero_shares_and_empty_sets() {
        let base = vec![record(1, NeedCategory::Beauty)];
        let schema = schema_for(&base);
        let f = encode_user(&scene_with_history(vec![]), &schema);
        assert!(f.historical_share.iter().all(|&s| s == 0.0));
        assert!(f.recent_clicked_needs.is_empty());
        assert!(f.recent_ordered_needs.is_empty());
        assert!(f.top_pois.is_empty());
    }

    #[test]
    fn shares_are_direct_fractions() {
        let history = vec![
            record(1, NeedCategory::OrderingFoodDelivery),
            record(2, NeedCategory::OrderingFoodDelivery),
            record(3, NeedCategory::OrderingFoodDelivery),
            record(4, NeedCategory::BookingHotel),
        ];
        let schema = schema_for(&history);
        let f = encode_user(&scene_with_history(history), &schema);
        assert_eq!(f.historical_share[NeedCategory::OrderingFoodDelivery.code()], 0.75);
        assert_eq!(f.historical_share[NeedCategory::BookingHotel.code()], 0.25);
        assert_eq!(f.historical_share.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn thousand_record_shares_match_counting_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let history: Vec<PurchaseRecord> = (0..1000)
            .map(|i| {
                let need = NeedCategory::from_code(rng.gen_range(0..NEED_COUNT)).unwrap();
                record(i as i64 + 1, need)
            })
            .collect();
        let schema = schema_for(&history);

        // Independent brute-force count.
        let mut counts = [0usize; NEED_COUNT];
        for r in &history {
            counts[r.need.code()] += 1;
        }

        let f = encode_user(&scene_with_history(history), &schema);
        for (code, &count) in counts.iter().enumerate() {
            assert_eq!(f.historical_share[code], count as f64 / 1000.0);
        }
    }

    #[test]
    fn encoding_is_pure() {
        let history = vec![record(1, NeedCategory::Tourism)];
        let schema = schema_for(&history);
        let scene = scene_with_history(history);
        let a = encode_user(&scene, &schema);
        let b = encode_user(&scene, &schema);
        assert_eq!(a, b);
        let ca = encode_context(&scene.context, &schema).unwrap();
        let cb = encode_context(&scene.context, &schema).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn hour_23_sets_late_period_slot() {
        let base = vec![record(1, NeedCategory::Beauty)];
        let schema = schema_for(&base);
        let ctx = ctx_at(23 * 3600);
        let v = encode_context(&ctx, &schema).unwrap();
        let period_slot = ContextFeatureVector::PERIOD_OFFSET + TimePeriod::H20To24.code();
        assert_eq!(v.dense[period_slot], 1.0);
        let period_block =
            &v.dense[ContextFeatureVector::PERIOD_OFFSET..ContextFeatureVector::PERIOD_OFFSET + 7];
        assert_eq!(period_block.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn weather_change_only_touches_weather_block() {
        let base = vec![record(1, NeedCategory::Beauty)];
        let schema = schema_for(&base);
        let a = ctx_at(10 * 3600);
        let b = SpatioTemporalContext {
            weather_type: WeatherType::Cloudy,
            ..a.clone()
        };
        let va = encode_context(&a, &schema).unwrap();
        let vb = encode_context(&b, &schema).unwrap();
        for i in 0..ContextFeatureVector::DENSE_LEN {
            let in_weather_block = (ContextFeatureVector::WEATHER_TYPE_OFFSET
                ..ContextFeatureVector::WEATHER_TYPE_OFFSET + 4)
                .contains(&i);
            if in_weather_block {
                continue;
            }
            assert_eq!(va.dense[i], vb.dense[i], "slot {i} changed");
        }
        assert_ne!(
            va.dense[ContextFeatureVector::WEATHER_TYPE_OFFSET..ContextFeatureVector::WEATHER_TYPE_OFFSET + 4],
            vb.dense[ContextFeatureVector::WEATHER_TYPE_OFFSET..ContextFeatureVector::WEATHER_TYPE_OFFSET + 4]
        );
    }

    #[test]
    fn training_mean_temperature_standardizes_to_zero() {
        let records = vec![
            PurchaseRecord {
                context: SpatioTemporalContext { temperature_c: 10.0, ..ctx_at(3600) },
                ..record(3600, NeedCategory::Beauty)
            },
            PurchaseRecord {
                context: SpatioTemporalContext { temperature_c: 30.0, ..ctx_at(7200) },
                ..record(7200, NeedCategory::Beauty)
            },
        ];
        let schema = schema_for(&records);
        let ctx = SpatioTemporalContext { temperature_c: 20.0, ..ctx_at(3600) };
        let v = encode_context(&ctx, &schema).unwrap();
        assert_eq!(v.dense[ContextFeatureVector::WEATHER_REAL_OFFSET], 0.0);
    }

    #[test]
    fn inconsistent_context_is_a_validation_error() {
        let base = vec![record(1, NeedCategory::Beauty)];
        let schema = schema_for(&base);
        let mut ctx = ctx_at(14 * 3600);
        ctx.time_period = TimePeriod::H0To4;
        assert!(encode_context(&ctx, &schema).is_err());
    }

    #[test]
    fn oov_ids_map_to_reserved_index_and_are_counted() {
        let base = vec![record(1, NeedCategory::Beauty)];
        let schema = schema_for(&base);
        let mut ctx = ctx_at(3600);
        ctx.poi_id = 999_999;
        let v = encode_context(&ctx, &schema).unwrap();
        assert_eq!(v.poi_index, crate::features::schema::OOV_INDEX);
        assert!(schema.oov_lookups() > 0);
    }
}
