//! User profiles and the profile-cross group segmentation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgeBand {
    #[serde(rename = "<18")]
    Under18,
    #[serde(rename = "18-25")]
    Age18To25,
    #[serde(rename = "26-35")]
    Age26To35,
    #[serde(rename = "36-50")]
    Age36To50,
    #[serde(rename = ">50")]
    Over50,
}

pub const AGE_BAND_COUNT: usize = 5;

impl AgeBand {
    pub const ALL: [AgeBand; AGE_BAND_COUNT] = [
        AgeBand::Under18,
        AgeBand::Age18To25,
        AgeBand::Age26To35,
        AgeBand::Age36To50,
        AgeBand::Over50,
    ];

    pub fn code(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

pub const GENDER_COUNT: usize = 2;

impl Gender {
    pub const ALL: [Gender; GENDER_COUNT] = [Gender::Female, Gender::Male];

    pub fn code(self) -> usize {
        self as usize
    }
}

/// A user profile: demographic attributes plus the resident city.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub age_band: AgeBand,
    pub gender: Gender,
    pub resident_city_id: u32,
}

/// Number of age-band × gender cross groups.
pub const GROUP_COUNT: usize = AGE_BAND_COUNT * GENDER_COUNT;

impl UserProfile {
    /// Group id under the age-band × gender cross segmentation, 0..10.
    pub fn group_id(&self) -> usize {
        self.age_band.code() * GENDER_COUNT + self.gender.code()
    }
}

/// The (age band, gender) pair for a cross-group id.
pub fn group_signature(group_id: usize) -> (AgeBand, Gender) {
    (
        AgeBand::ALL[group_id / GENDER_COUNT],
        Gender::ALL[group_id % GENDER_COUNT],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_ids_cover_all_crosses() {
        let mut seen = [false; GROUP_COUNT];
        for age in AgeBand::ALL {
            for gender in Gender::ALL {
                let p = UserProfile {
                    user_id: "u".into(),
                    age_band: age,
                    gender,
                    resident_city_id: 0,
                };
                seen[p.group_id()] = true;
                let (a, g) = group_signature(p.group_id());
                assert_eq!((a, g), (age, gender));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn age_band_wire_names() {
        assert_eq!(serde_json::to_string(&AgeBand::Under18).unwrap(), "\"<18\"");
        assert_eq!(serde_json::to_string(&AgeBand::Age26To35).unwrap(), "\"26-35\"");
        let band: AgeBand = serde_json::from_str("\">50\"").unwrap();
        assert_eq!(band, AgeBand::Over50);
    }
}
