//! Association-rule mining over per-user need baskets.
//!
//! One user's basket is the set of distinct needs they purchased. A rule
//! `antecedent → consequent` is kept when both its support and its confidence
//! clear the configured thresholds.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::{NeedCategory, PurchaseRecord, NEED_COUNT};
use crate::error::{Error, Result};

/// A mined pairwise co-occurrence rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    pub antecedent: NeedCategory,
    pub consequent: NeedCategory,
    /// Fraction of baskets containing both needs.
    pub support: f64,
    /// support / P(antecedent).
    pub confidence: f64,
    /// confidence / P(consequent); 1 means independence.
    pub lift: f64,
}

/// Mines all ordered need pairs whose support and confidence clear the
/// thresholds. Counts are exact; the result is sorted by lift descending with
/// ties broken by (antecedent, consequent) code.
pub fn mine_rules(
    corpus: &[PurchaseRecord],
    min_support: f64,
    min_confidence: f64,
) -> Result<Vec<AssociationRule>> {
    for (name, v) in [("min_support", min_support), ("min_confidence", min_confidence)] {
        if !(0.0..1.0).contains(&v) || v <= 0.0 {
            return Err(Error::Validation(format!(
                "{name} must lie in (0, 1), got {v}"
            )));
        }
    }

    let mut baskets: HashMap<&str, BTreeSet<NeedCategory>> = HashMap::new();
    for r in corpus {
        baskets.entry(r.user_id.as_str()).or_default().insert(r.need);
    }
    let n_baskets = baskets.len();
    if n_baskets == 0 {
        return Ok(Vec::new());
    }

    let mut single = [0usize; NEED_COUNT];
    let mut pair = [[0usize; NEED_COUNT]; NEED_COUNT];
    for basket in baskets.values() {
        for &a in basket {
            single[a.code()] += 1;
            for &b in basket {
                if a != b {
                    pair[a.code()][b.code()] += 1;
                }
            }
        }
    }

    let n = n_baskets as f64;
    let mut rules = Vec::new();
    for a in NeedCategory::ALL {
        for c in NeedCategory::ALL {
            if a == c || pair[a.code()][c.code()] == 0 {
                continue;
            }
            let support = pair[a.code()][c.code()] as f64 / n;
            let confidence = pair[a.code()][c.code()] as f64 / single[a.code()] as f64;
            let p_consequent = single[c.code()] as f64 / n;
            let lift = confidence / p_consequent;
            if support >= min_support && confidence >= min_confidence {
                rules.push(AssociationRule {
                    antecedent: a,
                    consequent: c,
                    support,
                    confidence,
                    lift,
                });
            }
        }
    }

    rules.sort_by(|x, y| {
        y.lift
            .partial_cmp(&x.lift)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.antecedent.code().cmp(&y.antecedent.code()))
            .then(x.consequent.code().cmp(&y.consequent.code()))
    });
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SpatioTemporalContext, TimePeriod, TravelState, WeatherType};

    fn record(user: &str, need: NeedCategory) -> PurchaseRecord {
        PurchaseRecord {
            user_id: user.into(),
            context: SpatioTemporalContext {
                timestamp: 3600,
                hour: 1,
                day_of_week: 3,
                is_holiday: false,
                time_period: TimePeriod::H0To4,
                poi_id: 1,
                aoi_id: 1,
                city_id: 1,
                weather_type: WeatherType::Sunny,
                temperature_c: 20.0,
                humidity_pct: 50.0,
                wind_kmh: 3.0,
                travel_state: TravelState::BasedInResidentCity,
            },
            need,
        }
    }

    #[test]
    fn perfect_co_occurrence_reaches_confidence_one() {
        // Every hair-dressing buyer also buys beauty services.
        let mut corpus = Vec::new();
        for u in 0..10 {
            corpus.push(record(&format!("u{u}"), NeedCategory::HairDressing));
            corpus.push(record(&format!("u{u}"), NeedCategory::Beauty));
        }
        for u in 10..20 {
            corpus.push(record(&format!("u{u}"), NeedCategory::Tourism));
        }
        let rules = mine_rules(&corpus, 0.05, 0.3).unwrap();
        let rule = rules
            .iter()
            .find(|r| {
                r.antecedent == NeedCategory::HairDressing && r.consequent == NeedCategory::Beauty
            })
            .expect("rule must be mined");
        assert_eq!(rule.confidence, 1.0);
        assert_eq!(rule.support, 0.5);
        assert_eq!(rule.lift, 2.0);
    }

    #[test]
    fn three_user_toy_corpus_by_hand() {
        // Baskets {AB, AB, AC}: support(A→B) = 2/3, confidence = 2/3.
        let a = NeedCategory::OrderingFoodDelivery;
        let b = NeedCategory::Beauty;
        let c = NeedCategory::Tourism;
        let corpus = vec![
            record("u1", a),
            record("u1", b),
            record("u2", a),
            record("u2", b),
            record("u3", a),
            record("u3", c),
        ];
        let rules = mine_rules(&corpus, 0.01, 0.01).unwrap();
        let rule = rules
            .iter()
            .find(|r| r.antecedent == a && r.consequent == b)
            .unwrap();
        assert!((rule.support - 2.0 / 3.0).abs() < 1e-15);
        assert!((rule.confidence - 2.0 / 3.0).abs() < 1e-15);
        assert!(rule.confidence >= rule.support);
    }

    #[test]
    fn independent_uniform_baskets_yield_no_high_confidence_rules() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut corpus = Vec::new();
        // Each need enters a user's basket independently with the same
        // probability, so membership events are independent and all lifts
        // concentrate at 1.
        for u in 0..2000 {
            for code in 0..NEED_COUNT {
                if rng.gen_bool(0.3) {
                    corpus.push(record(&format!("u{u}"), NeedCategory::from_code(code).unwrap()));
                }
            }
        }
        let rules = mine_rules(&corpus, 0.001, 0.8).unwrap();
        assert!(rules.is_empty(), "independent baskets produced {rules:?}");
        // Lifts hover around 1 for the (unthresholded) pairs.
        let all = mine_rules(&corpus, 0.01, 0.001).unwrap();
        assert!(!all.is_empty());
        for r in &all {
            assert!(
                (r.lift - 1.0).abs() < 0.25,
                "lift {} too far from independence",
                r.lift
            );
        }
    }

    #[test]
    fn matches_brute_force_pair_counting_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut corpus = Vec::new();
        for u in 0..120 {
            let k = rng.gen_range(1..5);
            for _ in 0..k {
                let need = NeedCategory::from_code(rng.gen_range(0..NEED_COUNT)).unwrap();
                corpus.push(record(&format!("u{u}"), need));
            }
        }
        assert!(corpus.len() <= 1000);

        // Brute-force oracle: enumerate users, then all ordered pairs.
        let mut baskets: HashMap<String, BTreeSet<NeedCategory>> = HashMap::new();
        for r in &corpus {
            baskets.entry(r.user_id.clone()).or_default().insert(r.need);
        }
        let n = baskets.len() as f64;
        let count_with = |pred: &dyn Fn(&BTreeSet<NeedCategory>) -> bool| {
            baskets.values().filter(|b| pred(b)).count() as f64
        };

        let (min_s, min_c) = (0.02, 0.2);
        let rules = mine_rules(&corpus, min_s, min_c).unwrap();
        for a in NeedCategory::ALL {
            for c in NeedCategory::ALL {
                if a == c {
                    continue;
                }
                let both = count_with(&|b| b.contains(&a) && b.contains(&c));
                let only_a = count_with(&|b| b.contains(&a));
                let only_c = count_with(&|b| b.contains(&c));
                if both == 0.0 {
                    continue;
                }
                let support = both / n;
                let confidence = both / only_a;
                let expected = support >= min_s && confidence >= min_c;
                let found = rules.iter().find(|r| r.antecedent == a && r.consequent == c);
                assert_eq!(found.is_some(), expected, "pair {a:?}->{c:?}");
                if let Some(rule) = found {
                    assert_eq!(rule.support, support);
                    assert_eq!(rule.confidence, confidence);
                    assert_eq!(rule.lift, confidence / (only_c / n));
                }
            }
        }
    }

    #[test]
    fn sorted_by_lift_descending() {
        let a = NeedCategory::HairDressing;
        let b = NeedCategory::Beauty;
        let corpus = vec![
            record("u1", a),
            record("u1", b),
            record("u2", a),
            record("u2", b),
            record("u3", b),
            record("u4", NeedCategory::Tourism),
            record("u4", b),
        ];
        let rules = mine_rules(&corpus, 0.01, 0.01).unwrap();
        for w in rules.windows(2) {
            assert!(w[0].lift >= w[1].lift);
        }
    }

    #[test]
    fn threshold_bounds_are_enforced() {
        assert!(mine_rules(&[], 0.0, 0.5).is_err());
        assert!(mine_rules(&[], 0.5, 1.0).is_err());
    }
}
