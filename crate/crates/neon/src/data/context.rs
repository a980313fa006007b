//! Spatiotemporal context: when, where, and under what conditions a need
//! arises.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seven time-of-day buckets used for popularity tables and reporting.
/// Boundaries are inclusive hour ranges; together they cover all 24 hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TimePeriod {
    #[serde(rename = "0-4")]
    H0To4,
    #[serde(rename = "5-8")]
    H5To8,
    #[serde(rename = "9-10")]
    H9To10,
    #[serde(rename = "11-12")]
    H11To12,
    #[serde(rename = "13-16")]
    H13To16,
    #[serde(rename = "17-19")]
    H17To19,
    #[serde(rename = "20-24")]
    H20To24,
}

pub const TIME_PERIOD_COUNT: usize = 7;

impl TimePeriod {
    pub const ALL: [TimePeriod; TIME_PERIOD_COUNT] = [
        TimePeriod::H0To4,
        TimePeriod::H5To8,
        TimePeriod::H9To10,
        TimePeriod::H11To12,
        TimePeriod::H13To16,
        TimePeriod::H17To19,
        TimePeriod::H20To24,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    /// Bucket for an hour of day (0–23).
    pub fn from_hour(hour: u8) -> TimePeriod {
        match hour {
            0..=4 => TimePeriod::H0To4,
            5..=8 => TimePeriod::H5To8,
            9..=10 => TimePeriod::H9To10,
            11..=12 => TimePeriod::H11To12,
            13..=16 => TimePeriod::H13To16,
            17..=19 => TimePeriod::H17To19,
            _ => TimePeriod::H20To24,
        }
    }

    /// Inclusive hour range covered by this bucket.
    pub fn hour_range(self) -> (u8, u8) {
        match self {
            TimePeriod::H0To4 => (0, 4),
            TimePeriod::H5To8 => (5, 8),
            TimePeriod::H9To10 => (9, 10),
            TimePeriod::H11To12 => (11, 12),
            TimePeriod::H13To16 => (13, 16),
            TimePeriod::H17To19 => (17, 19),
            TimePeriod::H20To24 => (20, 23),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeatherType {
    Sunny,
    Rainy,
    Snowy,
    Cloudy,
}

pub const WEATHER_TYPE_COUNT: usize = 4;

impl WeatherType {
    pub const ALL: [WeatherType; WEATHER_TYPE_COUNT] = [
        WeatherType::Sunny,
        WeatherType::Rainy,
        WeatherType::Snowy,
        WeatherType::Cloudy,
    ];

    pub fn code(self) -> usize {
        self as usize
    }
}

/// Whether the user is home, about to leave home, or traveling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TravelState {
    BasedInResidentCity,
    AboutToTravel,
    OnTravel,
}

pub const TRAVEL_STATE_COUNT: usize = 3;

impl TravelState {
    pub const ALL: [TravelState; TRAVEL_STATE_COUNT] = [
        TravelState::BasedInResidentCity,
        TravelState::AboutToTravel,
        TravelState::OnTravel,
    ];

    pub fn code(self) -> usize {
        self as usize
    }
}

/// One spatiotemporal context: a timestamp with its derived time fields, a
/// location (POI/AOI/city ids), weather, and the user's travel state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatioTemporalContext {
    /// Epoch seconds (UTC).
    pub timestamp: i64,
    /// Hour of day, 0–23. Must agree with `timestamp`.
    pub hour: u8,
    /// Day of week, 0 = Monday … 6 = Sunday. Must agree with `timestamp`.
    pub day_of_week: u8,
    pub is_holiday: bool,
    /// Must agree with `hour` per the bucket boundaries.
    pub time_period: TimePeriod,
    pub poi_id: u32,
    pub aoi_id: u32,
    pub city_id: u32,
    pub weather_type: WeatherType,
    pub temperature_c: f64,
    pub humidity_pct: f64,
    pub wind_kmh: f64,
    pub travel_state: TravelState,
}

/// Hour of day (UTC) for an epoch-seconds timestamp.
pub fn hour_of_timestamp(timestamp: i64) -> u8 {
    (timestamp.rem_euclid(86_400) / 3_600) as u8
}

/// Day of week (0 = Monday) for an epoch-seconds timestamp. 1970-01-01 was a
/// Thursday.
pub fn day_of_week_of_timestamp(timestamp: i64) -> u8 {
    ((timestamp.div_euclid(86_400) + 3).rem_euclid(7)) as u8
}

impl SpatioTemporalContext {
    /// Checks the internal consistency invariants: hour vs timestamp, time
    /// period vs hour, day-of-week vs timestamp, humidity range, finite reals.
    pub fn validate(&self) -> Result<()> {
        if self.hour > 23 {
            return Err(Error::Validation(format!("hour {} out of range", self.hour)));
        }
        let derived = hour_of_timestamp(self.timestamp);
        if derived != self.hour {
            return Err(Error::Validation(format!(
                "hour {} inconsistent with timestamp {} (derives hour {})",
                self.hour, self.timestamp, derived
            )));
        }
        let dow = day_of_week_of_timestamp(self.timestamp);
        if dow != self.day_of_week {
            return Err(Error::Validation(format!(
                "day_of_week {} inconsistent with timestamp {} (derives {})",
                self.day_of_week, self.timestamp, dow
            )));
        }
        if TimePeriod::from_hour(self.hour) != self.time_period {
            return Err(Error::Validation(format!(
                "time_period {:?} inconsistent with hour {}",
                self.time_period, self.hour
            )));
        }
        if !(0.0..=100.0).contains(&self.humidity_pct) {
            return Err(Error::Validation(format!(
                "humidity {} outside [0, 100]",
                self.humidity_pct
            )));
        }
        for (name, v) in [
            ("temperature_c", self.temperature_c),
            ("humidity_pct", self.humidity_pct),
            ("wind_kmh", self.wind_kmh),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}
