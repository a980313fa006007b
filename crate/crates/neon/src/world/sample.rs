//! Record sampling from a built world.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{
    day_of_week_of_timestamp, NeedCategory, PurchaseRecord, SpatioTemporalContext, TimePeriod,
    TravelState, UserProfile, WeatherType,
};
use crate::error::Result;
use crate::nn::softmax;
use crate::world::model::{WorldModel, LOCATION_TYPE_COUNT};

/// Days since the epoch of the synthetic calendar's first day (a Saturday).
const CALENDAR_START_DAY: i64 = 18_993;
const CALENDAR_DAYS: i64 = 365;

/// Synthetic holiday calendar: day-of-year offsets (0-based).
const HOLIDAYS: [i64; 23] = [
    0, 1, 2, 30, 31, 32, 33, 34, 35, 36, 93, 94, 120, 121, 122, 155, 156, 157, 273, 274, 275, 276,
    277,
];

fn is_holiday_day(day_of_year: i64) -> bool {
    HOLIDAYS.contains(&day_of_year)
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return i;
        }
        draw -= w;
    }
    weights.len() - 1
}

fn sample_timestamp(rng: &mut ChaCha8Rng, period: TimePeriod, holiday: bool) -> i64 {
    // Rejection-sample a date matching the holiday flag, then an hour within
    // the period.
    let day_of_year = loop {
        let d = rng.gen_range(0..CALENDAR_DAYS);
        if is_holiday_day(d) == holiday {
            break d;
        }
    };
    let (lo, hi) = period.hour_range();
    let hour = rng.gen_range(lo..=hi) as i64;
    let minute = rng.gen_range(0..60i64);
    let second = rng.gen_range(0..60i64);
    (CALENDAR_START_DAY + day_of_year) * 86_400 + hour * 3_600 + minute * 60 + second
}

fn sample_weather_reals(rng: &mut ChaCha8Rng, weather: WeatherType) -> (f64, f64, f64) {
    let (t_mu, h_mu, w_mu) = match weather {
        WeatherType::Sunny => (24.0, 45.0, 8.0),
        WeatherType::Rainy => (16.0, 85.0, 15.0),
        WeatherType::Snowy => (-3.0, 75.0, 12.0),
        WeatherType::Cloudy => (18.0, 60.0, 10.0),
    };
    let n = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    let temperature = t_mu + 5.0 * n(rng);
    let humidity = (h_mu + 10.0 * n(rng)).clamp(0.0, 100.0);
    let wind = (w_mu + 5.0 * n(rng)).abs();
    (temperature, humidity, wind)
}

/// Draws `n` i.i.d. records: user from the population, cell from the stored
/// marginals, need from the true (group, cell) distribution plus the user's
/// tilt. Timestamps agree with the sampled time period and holiday flag;
/// POIs respect the cell's location type and the user's travel state.
pub fn sample_records(world: &WorldModel, n: usize, seed: u64) -> Result<Vec<PurchaseRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);

    // POI lookup by (city, location type); the world guarantees coverage.
    let cities = world.config.city_count;
    let mut by_city_type: Vec<Vec<Vec<u32>>> =
        vec![vec![Vec::new(); LOCATION_TYPE_COUNT]; cities + 1];
    for p in 0..world.config.poi_count {
        let city = world.poi_city[p] as usize;
        by_city_type[city][world.poi_type[p] as usize].push(p as u32 + 1);
    }

    for _ in 0..n {
        let user = rng.gen_range(0..world.config.user_count);
        let cell = pick_weighted(&mut rng, &world.cell_marginals);

        // Decode the cell back into its dimensions.
        let mut rest = cell;
        let travel = TravelState::ALL[rest % 3];
        rest /= 3;
        let weather = WeatherType::ALL[rest % 4];
        rest /= 4;
        let ltype = rest % LOCATION_TYPE_COUNT;
        rest /= LOCATION_TYPE_COUNT;
        let holiday = rest % 2 == 1;
        rest /= 2;
        let period = TimePeriod::ALL[rest];

        let logits = world.user_logits(user, crate::world::model::CellIndex(cell));
        let probs = softmax(&logits)?;
        let need_code = pick_weighted(&mut rng, &probs);

        // Location: resident city unless traveling.
        let resident = world.user_cities[user] as usize;
        let city = if matches!(travel, TravelState::OnTravel) && cities > 1 {
            let mut c = rng.gen_range(1..=cities);
            if c == resident {
                c = c % cities + 1;
            }
            c
        } else {
            resident
        };
        let pois = &by_city_type[city][ltype];
        let poi_id = pois[rng.gen_range(0..pois.len())];
        let poi_index = (poi_id - 1) as usize;

        let timestamp = sample_timestamp(&mut rng, period, holiday);
        let hour = crate::data::hour_of_timestamp(timestamp);
        let (temperature_c, humidity_pct, wind_kmh) = sample_weather_reals(&mut rng, weather);

        let context = SpatioTemporalContext {
            timestamp,
            hour,
            day_of_week: day_of_week_of_timestamp(timestamp),
            is_holiday: holiday,
            time_period: period,
            poi_id,
            aoi_id: world.poi_aoi[poi_index],
            city_id: city as u32,
            weather_type: weather,
            temperature_c,
            humidity_pct,
            wind_kmh,
            travel_state: travel,
        };
        debug_assert!(context.validate().is_ok());

        records.push(PurchaseRecord {
            user_id: world.user_id(user),
            context,
            need: NeedCategory::from_code(need_code).expect("code < 10"),
        });
    }
    Ok(records)
}

/// The world's full profile store.
pub fn all_profiles(world: &WorldModel) -> Vec<UserProfile> {
    (0..world.config.user_count).map(|i| world.profile(i)).collect()
}
