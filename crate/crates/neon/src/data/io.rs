//! JSON-lines readers and writers for record and profile corpora.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::data::profile::UserProfile;
use crate::data::records::PurchaseRecord;
use crate::error::{Error, Result};

fn read_jsonl<T: DeserializeOwned>(path: &Path, what: &str) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| {
        Error::Validation(format!("cannot open {what} file {}: {e}", path.display()))
    })?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: T = serde_json::from_str(&line).map_err(|e| {
            Error::Validation(format!(
                "{what} line {}: invalid JSON record: {e}",
                lineno + 1
            ))
        })?;
        out.push(item);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a purchase-record corpus (one record per line), validating each
/// context's internal consistency.
pub fn read_records(path: &Path) -> Result<Vec<PurchaseRecord>> {
    let records: Vec<PurchaseRecord> = read_jsonl(path, "corpus")?;
    for (i, r) in records.iter().enumerate() {
        r.context
            .validate()
            .map_err(|e| Error::Validation(format!("corpus record {}: {e}", i + 1)))?;
    }
    Ok(records)
}

pub fn write_records(path: &Path, records: &[PurchaseRecord]) -> Result<()> {
    write_jsonl(path, records)
}

/// Reads a profile store (one profile per line), rejecting duplicate ids.
pub fn read_profiles(path: &Path) -> Result<Vec<UserProfile>> {
    let profiles: Vec<UserProfile> = read_jsonl(path, "profiles")?;
    let mut seen = std::collections::HashSet::new();
    for p in &profiles {
        if !seen.insert(p.user_id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate profile for user '{}'",
                p.user_id
            )));
        }
    }
    Ok(profiles)
}

pub fn write_profiles(path: &Path, profiles: &[UserProfile]) -> Result<()> {
    write_jsonl(path, profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::context::{TimePeriod, TravelState, WeatherType};
    use crate::data::needs::NeedCategory;
    use crate::data::profile::{AgeBand, Gender};
    use crate::data::SpatioTemporalContext;

    #[test]
    fn corpus_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let records = vec![PurchaseRecord {
            user_id: "u1".into(),
            context: SpatioTemporalContext {
                timestamp: 11 * 3600,
                hour: 11,
                day_of_week: 3,
                is_holiday: true,
                time_period: TimePeriod::H11To12,
                poi_id: 42,
                aoi_id: 7,
                city_id: 2,
                weather_type: WeatherType::Rainy,
                temperature_c: 17.25,
                humidity_pct: 88.0,
                wind_kmh: 12.5,
                travel_state: TravelState::OnTravel,
            },
            need: NeedCategory::OrderingFoodDelivery,
        }];
        write_records(&path, &records).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn duplicate_profiles_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.jsonl");
        let p = UserProfile {
            user_id: "u1".into(),
            age_band: AgeBand::Under18,
            gender: Gender::Male,
            resident_city_id: 0,
        };
        write_profiles(&path, &[p.clone(), p]).unwrap();
        assert!(read_profiles(&path).is_err());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"not\": \"a profile\"}\n").unwrap();
        let err = read_profiles(&path).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }
}
