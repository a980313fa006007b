//! Domain data: the needs taxonomy, user profiles, spatiotemporal contexts,
//! purchase records, and their JSON-lines persistence.

mod context;
mod io;
mod needs;
mod profile;
mod records;

pub use context::{
    day_of_week_of_timestamp, hour_of_timestamp, SpatioTemporalContext, TimePeriod, TravelState,
    WeatherType, TIME_PERIOD_COUNT, TRAVEL_STATE_COUNT, WEATHER_TYPE_COUNT,
};
pub use io::{read_profiles, read_records, write_profiles, write_records};
pub use needs::{NeedCategory, NeedsMeetingWay, NEED_COUNT, WAY_COUNT};
pub use profile::{group_signature, AgeBand, Gender, UserProfile, AGE_BAND_COUNT, GENDER_COUNT, GROUP_COUNT};
pub use records::{build_labeled_scenes, LabeledScene, PurchaseRecord, UserScene};
