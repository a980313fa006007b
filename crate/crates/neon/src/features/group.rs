//! Corpus-level group behavior tables and the per-scene group feature vector.
//!
//! All tables are built from the training split only. Every stored row is a
//! 10-simplex of purchase shares; a global fallback row covers unseen keys.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::{
    NeedCategory, PurchaseRecord, SpatioTemporalContext, UserProfile, UserScene, NEED_COUNT,
};
use crate::error::{Error, Result};
use crate::features::rules::{mine_rules, AssociationRule};
use crate::simplex::{normalize, validate_simplex, SIMPLEX_TOL};

/// Configuration for table building.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupTableConfig {
    /// Append the resident city to the group key (finer segmentation).
    pub group_by_city: bool,
    pub min_support: f64,
    pub min_confidence: f64,
}

impl Default for GroupTableConfig {
    fn default() -> Self {
        GroupTableConfig {
            group_by_city: false,
            min_support: 0.05,
            min_confidence: 0.3,
        }
    }
}

/// Aggregated group-behavior statistics plus mined correlation rules.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFeatureTables {
    pub config: GroupTableConfig,
    /// group key → purchase-share simplex.
    pub group_aggregated: BTreeMap<String, Vec<f64>>,
    /// (time period, holiday flag) key → popularity simplex.
    pub time_popularity: BTreeMap<String, Vec<f64>>,
    /// (group, context cell) key → share simplex. The context cell is
    /// (time period, holiday, weather type, travel state).
    pub group_context: BTreeMap<String, Vec<f64>>,
    /// Global purchase distribution; the fallback row for every unseen key.
    pub fallback: Vec<f64>,
    pub rules: Vec<AssociationRule>,
}

fn group_key(profile: &UserProfile, by_city: bool) -> String {
    if by_city {
        format!("g{}:c{}", profile.group_id(), profile.resident_city_id)
    } else {
        format!("g{}", profile.group_id())
    }
}

fn time_key(ctx: &SpatioTemporalContext) -> String {
    format!("p{}:h{}", ctx.time_period.code(), u8::from(ctx.is_holiday))
}

fn context_cell_key(ctx: &SpatioTemporalContext) -> String {
    format!(
        "p{}:h{}:w{}:t{}",
        ctx.time_period.code(),
        u8::from(ctx.is_holiday),
        ctx.weather_type.code(),
        ctx.travel_state.code()
    )
}

fn group_context_key(profile: &UserProfile, ctx: &SpatioTemporalContext, by_city: bool) -> String {
    format!("{}|{}", group_key(profile, by_city), context_cell_key(ctx))
}

struct CountTable(HashMap<String, [f64; NEED_COUNT]>);

impl CountTable {
    fn new() -> Self {
        CountTable(HashMap::new())
    }

    fn add(&mut self, key: String, need: NeedCategory) {
        self.0.entry(key).or_insert([0.0; NEED_COUNT])[need.code()] += 1.0;
    }

    fn into_simplices(self, what: &str) -> Result<BTreeMap<String, Vec<f64>>> {
        let mut out = BTreeMap::new();
        for (key, mut counts) in self.0 {
            normalize(&mut counts, what)?;
            out.insert(key, counts.to_vec());
        }
        Ok(out)
    }
}

/// Builds all group tables from a (training) record corpus.
///
/// Errors on an empty corpus or when a record's user has no profile.
pub fn build_group_tables(
    corpus: &[PurchaseRecord],
    profiles: &[UserProfile],
    config: &GroupTableConfig,
) -> Result<GroupFeatureTables> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("group tables require a non-empty corpus".into()));
    }
    let by_user: HashMap<&str, &UserProfile> =
        profiles.iter().map(|p| (p.user_id.as_str(), p)).collect();

    let mut agg = CountTable::new();
    let mut time = CountTable::new();
    let mut gctx = CountTable::new();
    let mut global = [0.0; NEED_COUNT];

    for r in corpus {
        let profile = *by_user.get(r.user_id.as_str()).ok_or_else(|| {
            Error::Validation(format!("record references unknown user '{}'", r.user_id))
        })?;
        agg.add(group_key(profile, config.group_by_city), r.need);
        time.add(time_key(&r.context), r.need);
        gctx.add(group_context_key(profile, &r.context, config.group_by_city), r.need);
        global[r.need.code()] += 1.0;
    }
    normalize(&mut global, "global fallback")?;

    let tables = GroupFeatureTables {
        config: config.clone(),
        group_aggregated: agg.into_simplices("group aggregated row")?,
        time_popularity: time.into_simplices("time popularity row")?,
        group_context: gctx.into_simplices("group context row")?,
        fallback: global.to_vec(),
        rules: mine_rules(corpus, config.min_support, config.min_confidence)?,
    };
    tables.validate()?;
    Ok(tables)
}

impl GroupFeatureTables {
    /// Checks that every stored row is a valid simplex.
    pub fn validate(&self) -> Result<()> {
        validate_simplex(&self.fallback, SIMPLEX_TOL, "fallback row")?;
        for (name, table) in [
            ("group_aggregated", &self.group_aggregated),
            ("time_popularity", &self.time_popularity),
            ("group_context", &self.group_context),
        ] {
            for (key, row) in table {
                if row.len() != NEED_COUNT {
                    return Err(Error::Validation(format!(
                        "{name} row '{key}' has {} entries",
                        row.len()
                    )));
                }
                validate_simplex(row, SIMPLEX_TOL, &format!("{name}['{key}']"))?;
            }
        }
        Ok(())
    }

    fn lookup<'a>(&'a self, table: &'a BTreeMap<String, Vec<f64>>, key: &str) -> &'a [f64] {
        table.get(key).map(Vec::as_slice).unwrap_or(&self.fallback)
    }

    pub fn group_row(&self, profile: &UserProfile) -> &[f64] {
        self.lookup(&self.group_aggregated, &group_key(profile, self.config.group_by_city))
    }

    pub fn time_row(&self, ctx: &SpatioTemporalContext) -> &[f64] {
        self.lookup(&self.time_popularity, &time_key(ctx))
    }

    pub fn group_context_row(&self, profile: &UserProfile, ctx: &SpatioTemporalContext) -> &[f64] {
        self.lookup(
            &self.group_context,
            &group_context_key(profile, ctx, self.config.group_by_city),
        )
    }
}

/// The dense group feature vector: four 10-entry blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFeatureVector(pub Vec<f64>);

impl GroupFeatureVector {
    pub const LEN: usize = 4 * NEED_COUNT;

    pub const GROUP_BLOCK: usize = 0;
    pub const TIME_BLOCK: usize = NEED_COUNT;
    pub const CONTEXT_BLOCK: usize = 2 * NEED_COUNT;
    pub const RULE_BLOCK: usize = 3 * NEED_COUNT;

    pub fn rule_block(&self) -> &[f64] {
        &self.0[Self::RULE_BLOCK..Self::RULE_BLOCK + NEED_COUNT]
    }
}

/// Applies the mined rules to a historical-share vector: for every rule whose
/// antecedent share is positive, `confidence · share` is added to the
/// consequent slot, then the result is renormalized to a simplex.
fn augment_with_rules(share: &[f64; NEED_COUNT], rules: &[AssociationRule]) -> [f64; NEED_COUNT] {
    let mut out = *share;
    for rule in rules {
        let a = share[rule.antecedent.code()];
        if a > 0.0 {
            out[rule.consequent.code()] += rule.confidence * a;
        }
    }
    let sum: f64 = out.iter().sum();
    if sum > 0.0 {
        for v in &mut out {
            *v /= sum;
        }
    }
    out
}

/// Assembles the per-scene group feature vector from the tables. Unseen keys
/// fall back to the global distribution, as does the rule-augmented block
/// when the scene has no history.
pub fn assemble_group_vector(scene: &UserScene, tables: &GroupFeatureTables) -> GroupFeatureVector {
    let mut v = Vec::with_capacity(GroupFeatureVector::LEN);
    v.extend_from_slice(tables.group_row(&scene.profile));
    v.extend_from_slice(tables.time_row(&scene.context));
    v.extend_from_slice(tables.group_context_row(&scene.profile, &scene.context));

    if scene.history.is_empty() {
        v.extend_from_slice(&tables.fallback);
    } else {
        let mut share = [0.0; NEED_COUNT];
        for r in &scene.history {
            share[r.need.code()] += 1.0;
        }
        let n = scene.history.len() as f64;
        for s in &mut share {
            *s /= n;
        }
        v.extend_from_slice(&augment_with_rules(&share, &tables.rules));
    }
    GroupFeatureVector(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AgeBand, Gender, TimePeriod, TravelState, WeatherType};

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

    fn profile(id: &str, age: AgeBand, gender: Gender) -> UserProfile {
        UserProfile {
            user_id: id.into(),
            age_band: age,
            gender,
            resident_city_id: 1,
        }
    }

    fn record(user: &str, ts: i64, need: NeedCategory) -> PurchaseRecord {
        PurchaseRecord {
            user_id: user.into(),
            context: ctx_at(ts),
            need,
        }
    }

    #[test]
    fn single_need_group_gets_one_hot_row() {
        let profiles = vec![
            profile("u1", AgeBand::Under18, Gender::Female),
            profile("u2", AgeBand::Over50, Gender::Male),
        ];
        let corpus = vec![
            record("u1", 100, NeedCategory::Beauty),
            record("u1", 200, NeedCategory::Beauty),
            record("u2", 300, NeedCategory::Tourism),
        ];
        let tables =
            build_group_tables(&corpus, &profiles, &GroupTableConfig::default()).unwrap();
        let row = tables.group_row(&profiles[0]);
        assert_eq!(row[NeedCategory::Beauty.code()], 1.0);
        assert_eq!(row.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn uniform_corpus_rows_near_uniform_within_binomial_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let profiles = vec![profile("u1", AgeBand::Age26To35, Gender::Female)];
        let n = 20_000;
        let corpus: Vec<PurchaseRecord> = (0..n)
            .map(|i| {
                let need = NeedCategory::from_code(rng.gen_range(0..NEED_COUNT)).unwrap();
                record("u1", i as i64, need)
            })
            .collect();
        let tables =
            build_group_tables(&corpus, &profiles, &GroupTableConfig::default()).unwrap();
        let bound = 3.0 * (0.09f64 / n as f64).sqrt();
        for &share in tables.group_row(&profiles[0]) {
            assert!((share - 0.1).abs() <= bound, "share {share} outside 3σ bound {bound}");
        }
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(build_group_tables(&[], &[], &GroupTableConfig::default()).is_err());
    }

    #[test]
    fn lunch_heavy_corpus_peaks_time_popularity_at_food_delivery() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let profiles = vec![profile("u1", AgeBand::Age18To25, Gender::Male)];
        let mut corpus = Vec::new();
        for i in 0..2000 {
            let lunch = rng.gen_bool(0.5);
            let hour = if lunch { 11 } else { 20 };
            let ts = i * 86_400 + hour * 3600;
            let need = if lunch && rng.gen_bool(0.7) {
                NeedCategory::OrderingFoodDelivery
            } else {
                NeedCategory::from_code(rng.gen_range(0..NEED_COUNT)).unwrap()
            };
            corpus.push(record("u1", ts, need));
        }
        let tables =
            build_group_tables(&corpus, &profiles, &GroupTableConfig::default()).unwrap();
        let lunch_ctx = ctx_at(11 * 3600);
        let row = tables.time_row(&lunch_ctx);
        let top = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(top, NeedCategory::OrderingFoodDelivery.code());
    }

    #[test]
    fn unseen_user_and_empty_history_fall_back_everywhere() {
        let profiles = vec![profile("u1", AgeBand::Under18, Gender::Female)];
        let corpus = vec![
            record("u1", 100, NeedCategory::Beauty),
            record("u1", 200, NeedCategory::Tourism),
        ];
        let tables =
            build_group_tables(&corpus, &profiles, &GroupTableConfig::default()).unwrap();

        // A profile from a group never seen in the corpus, with no history.
        let stranger = profile("u9", AgeBand::Over50, Gender::Male);
        let scene = UserScene {
            profile: stranger,
            context: ctx_at(13 * 3600 + 86_400 * 3),
            history: vec![],
        };
        let v = assemble_group_vector(&scene, &tables);
        for block in 0..4 {
            let b = &v.0[block * NEED_COUNT..(block + 1) * NEED_COUNT];
            assert_eq!(b, tables.fallback.as_slice(), "block {block} must be the fallback row");
        }
    }

    #[test]
    fn no_rules_leaves_rule_block_equal_to_share() {
        let profiles = vec![profile("u1", AgeBand::Under18, Gender::Female)];
        let corpus = vec![record("u1", 100, NeedCategory::Beauty)];
        let mut tables =
            build_group_tables(&corpus, &profiles, &GroupTableConfig::default()).unwrap();
        tables.rules.clear();

        let scene = UserScene {
            profile: profiles[0].clone(),
            context: ctx_at(1_000_000),
            history: vec![
                record("u1", 100, NeedCategory::Beauty),
                record("u1", 200, NeedCategory::Beauty),
                record("u1", 300, NeedCategory::Tourism),
            ],
        };
        let v = assemble_group_vector(&scene, &tables);
        let rule_block = v.rule_block();
        assert!((rule_block[NeedCategory::Beauty.code()] - 2.0 / 3.0).abs() < 1e-15);
        assert!((rule_block[NeedCategory::Tourism.code()] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_rule_augmentation_matches_hand_computation() {
        // share(HairDressing) = 1, one rule HairDressing→Beauty at confidence
        // 0.5: augmented ∝ [1.0, 0.5] → [2/3, 1/3].
        let mut share = [0.0; NEED_COUNT];
        share[NeedCategory::HairDressing.code()] = 1.0;
        let rules = vec![AssociationRule {
            antecedent: NeedCategory::HairDressing,
            consequent: NeedCategory::Beauty,
            support: 0.5,
            confidence: 0.5,
            lift: 1.5,
        }];
        let out = augment_with_rules(&share, &rules);
        assert!((out[NeedCategory::HairDressing.code()] - 2.0 / 3.0).abs() < 1e-15);
        assert!((out[NeedCategory::Beauty.code()] - 1.0 / 3.0).abs() < 1e-15);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tables_survive_serde_roundtrip() {
        let profiles = vec![profile("u1", AgeBand::Under18, Gender::Female)];
        let corpus = vec![
            record("u1", 100, NeedCategory::Beauty),
            record("u1", 200, NeedCategory::Tourism),
        ];
        let tables =
            build_group_tables(&corpus, &profiles, &GroupTableConfig::default()).unwrap();
        let json = serde_json::to_string(&tables).unwrap();
        let back: GroupFeatureTables = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back.fallback, tables.fallback);
        assert_eq!(back.group_aggregated, tables.group_aggregated);
    }
}
