//! Purchase records, user scenes, and labeled scenes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::context::SpatioTemporalContext;
use crate::data::needs::{NeedCategory, NeedsMeetingWay};
use crate::data::profile::UserProfile;
use crate::error::{Error, Result};

/// One consumption event: a user met need `need` in context `context`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurchaseRecord {
    /// Reference into the profile store.
    #[serde(rename = "profile_ref")]
    pub user_id: String,
    pub context: SpatioTemporalContext,
    pub need: NeedCategory,
}

/// A user in a spatiotemporal context, together with their strictly-earlier
/// purchase history — the unit of prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserScene {
    pub profile: UserProfile,
    pub context: SpatioTemporalContext,
    /// Past records of this user, ascending by timestamp, all strictly
    /// earlier than `context.timestamp`.
    #[serde(default)]
    pub history: Vec<PurchaseRecord>,
}

impl UserScene {
    /// Checks history ordering and the no-future-leakage invariant.
    pub fn validate(&self) -> Result<()> {
        self.context.validate()?;
        let mut prev = i64::MIN;
        for r in &self.history {
            if r.context.timestamp < prev {
                return Err(Error::Validation(
                    "scene history not sorted ascending by timestamp".into(),
                ));
            }
            if r.context.timestamp >= self.context.timestamp {
                return Err(Error::Validation(format!(
                    "scene history leaks the future: record at {} vs scene at {}",
                    r.context.timestamp, self.context.timestamp
                )));
            }
            prev = r.context.timestamp;
        }
        Ok(())
    }
}

/// A scene with its ground truth: the need that arose, and the way it is met
/// (always derived from the need, never stored independently).
#[derive(Debug, Clone)]
pub struct LabeledScene {
    pub scene: UserScene,
    pub need_label: NeedCategory,
    way_label: NeedsMeetingWay,
}

impl LabeledScene {
    pub fn new(scene: UserScene, need_label: NeedCategory) -> Self {
        LabeledScene {
            scene,
            need_label,
            way_label: need_label.way(),
        }
    }

    pub fn way_label(&self) -> NeedsMeetingWay {
        self.way_label
    }
}

/// Builds one labeled scene per record: the scene's history is the user's
/// strictly-earlier records from the whole corpus, and the label is the
/// record's need.
///
/// Errors when a record's user is missing from the profile store.
pub fn build_labeled_scenes(
    records: &[PurchaseRecord],
    profiles: &[UserProfile],
) -> Result<Vec<LabeledScene>> {
    let by_user: HashMap<&str, &UserProfile> =
        profiles.iter().map(|p| (p.user_id.as_str(), p)).collect();

    // Per-user indices in timestamp order (ties broken by corpus position so
    // the construction is deterministic).
    let mut user_records: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        user_records.entry(r.user_id.as_str()).or_default().push(i);
    }
    for idxs in user_records.values_mut() {
        idxs.sort_by_key(|&i| (records[i].context.timestamp, i));
    }

    let mut scenes = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        let profile = *by_user.get(record.user_id.as_str()).ok_or_else(|| {
            Error::Validation(format!(
                "record {} references unknown user '{}'",
                i, record.user_id
            ))
        })?;
        let history: Vec<PurchaseRecord> = user_records[record.user_id.as_str()]
            .iter()
            .map(|&j| &records[j])
            .filter(|r| r.context.timestamp < record.context.timestamp)
            .cloned()
            .collect();
        scenes.push(LabeledScene::new(
            UserScene {
                profile: profile.clone(),
                context: record.context.clone(),
                history,
            },
            record.need,
        ));
    }
    Ok(scenes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::context::{TimePeriod, TravelState, WeatherType};
    use crate::data::profile::{AgeBand, Gender};

    pub(crate) fn ctx_at(ts: i64) -> SpatioTemporalContext {
        let hour = crate::data::context::hour_of_timestamp(ts);
        SpatioTemporalContext {
            timestamp: ts,
            hour,
            day_of_week: crate::data::context::day_of_week_of_timestamp(ts),
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

    fn profile(id: &str) -> UserProfile {
        UserProfile {
            user_id: id.into(),
            age_band: AgeBand::Age26To35,
            gender: Gender::Female,
            resident_city_id: 1,
        }
    }

    #[test]
    fn way_label_always_derived_from_need() {
        let scene = UserScene {
            profile: profile("u1"),
            context: ctx_at(1000),
            history: vec![],
        };
        for need in NeedCategory::ALL {
            let labeled = LabeledScene::new(scene.clone(), need);
            assert_eq!(labeled.way_label(), need.way());
        }
    }

    #[test]
    fn scenes_take_only_strictly_earlier_history() {
        let records = vec![
            PurchaseRecord {
                user_id: "u1".into(),
                context: ctx_at(100),
                need: NeedCategory::Beauty,
            },
            PurchaseRecord {
                user_id: "u1".into(),
                context: ctx_at(200),
                need: NeedCategory::Tourism,
            },
            PurchaseRecord {
                user_id: "u1".into(),
                context: ctx_at(300),
                need: NeedCategory::BuyingMedicine,
            },
        ];
        let scenes = build_labeled_scenes(&records, &[profile("u1")]).unwrap();
        assert_eq!(scenes[0].scene.history.len(), 0);
        assert_eq!(scenes[1].scene.history.len(), 1);
        assert_eq!(scenes[2].scene.history.len(), 2);
        for s in &scenes {
            s.scene.validate().unwrap();
        }
    }

    #[test]
    fn unknown_user_is_rejected() {
        let records = vec![PurchaseRecord {
            user_id: "ghost".into(),
            context: ctx_at(100),
            need: NeedCategory::Beauty,
        }];
        assert!(build_labeled_scenes(&records, &[profile("u1")]).is_err());
    }

    #[test]
    fn record_wire_format_uses_profile_ref() {
        let r = PurchaseRecord {
            user_id: "u7".into(),
            context: ctx_at(100),
            need: NeedCategory::Beauty,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"profile_ref\":\"u7\""), "{json}");
        let back: PurchaseRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
