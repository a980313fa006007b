//! World construction: per-(group, cell) need distributions with plantable
//! context patterns.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{
    group_signature, NeedCategory, SpatioTemporalContext, TimePeriod, TravelState, UserProfile,
    WeatherType, NEED_COUNT, TIME_PERIOD_COUNT, TRAVEL_STATE_COUNT, WEATHER_TYPE_COUNT,
};
use crate::error::{Error, Result};
use crate::nn::softmax;
use crate::world::config::WorldConfig;

/// Location flavors attached to POIs.
pub const LOCATION_TYPE_COUNT: usize = 3;
pub const LOC_RESIDENTIAL: usize = 0;
pub const LOC_WORKPLACE: usize = 1;
pub const LOC_COMMERCIAL: usize = 2;

/// Total number of context cells.
pub const CELL_COUNT: usize =
    TIME_PERIOD_COUNT * 2 * LOCATION_TYPE_COUNT * WEATHER_TYPE_COUNT * TRAVEL_STATE_COUNT;

/// Index of one context cell in the flattened grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellIndex(pub usize);

pub(crate) fn cell_index(
    period: TimePeriod,
    holiday: bool,
    location_type: usize,
    weather: WeatherType,
    travel: TravelState,
) -> CellIndex {
    let mut idx = period.code();
    idx = idx * 2 + usize::from(holiday);
    idx = idx * LOCATION_TYPE_COUNT + location_type;
    idx = idx * WEATHER_TYPE_COUNT + weather.code();
    idx = idx * TRAVEL_STATE_COUNT + travel.code();
    CellIndex(idx)
}

// Logit scales. Together with the strengths in [0, 1] they set how peaked
// the planted distributions are.
const GROUP_LOGIT_SCALE: f64 = 2.5;
const CONTEXT_NOISE_SCALE: f64 = 0.8;
const PLANTED_SCALE: f64 = 1.0;
const WAY_SHIFT_SCALE: f64 = 1.1;
const TILT_SCALE: f64 = 1.0;
const INTERACTION_SCALE: f64 = 1.0;

/// The five dimensions of one flattened cell index.
struct CellDims {
    period: TimePeriod,
    holiday: bool,
    #[allow(dead_code)]
    location_type: usize,
    weather: WeatherType,
    travel: TravelState,
}

fn decode_cell(cell: usize) -> CellDims {
    let mut rest = cell;
    let travel = TravelState::ALL[rest % TRAVEL_STATE_COUNT];
    rest /= TRAVEL_STATE_COUNT;
    let weather = WeatherType::ALL[rest % WEATHER_TYPE_COUNT];
    rest /= WEATHER_TYPE_COUNT;
    let location_type = rest % LOCATION_TYPE_COUNT;
    rest /= LOCATION_TYPE_COUNT;
    let holiday = rest % 2 == 1;
    rest /= 2;
    CellDims {
        period: TimePeriod::ALL[rest],
        holiday,
        location_type,
        weather,
        travel,
    }
}

/// Ground truth of a synthetic world.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldModel {
    pub config: WorldConfig,
    /// Base preference logits per group.
    pub group_logits: Vec<[f64; NEED_COUNT]>,
    /// Context logits per cell (includes the way-correlation shift).
    pub cell_logits: Vec<[f64; NEED_COUNT]>,
    /// Precomputed softmax(group + cell) per group, row-major by group.
    pub distributions: Vec<Vec<[f64; NEED_COUNT]>>,
    /// user index → group id.
    pub user_groups: Vec<usize>,
    /// user index → resident city id (1-based).
    pub user_cities: Vec<u32>,
    /// user index → idiosyncratic logit tilt (all zeros at tilt strength 0).
    pub user_tilts: Vec<[f64; NEED_COUNT]>,
    /// poi index (0-based; poi_id = index + 1) → (city id, aoi id, location type).
    pub poi_city: Vec<u32>,
    pub poi_aoi: Vec<u32>,
    pub poi_type: Vec<u8>,
    /// Sampling probability per cell.
    pub cell_marginals: Vec<f64>,
    /// Fraction of users per group.
    pub group_weights: Vec<f64>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Fixed context patterns: plausible boosts planted into specific dimension
/// levels so context carries recoverable signal (lunch hours favor food
/// delivery, travel favors hotels, and so on).
fn planted_period(period: TimePeriod, v: &mut [f64; NEED_COUNT]) {
    use NeedCategory::*;
    match period {
        TimePeriod::H0To4 => {
            v[BookingHotel.code()] += 1.6;
            v[Entertainment.code()] += 0.8;
        }
        TimePeriod::H5To8 => {
            v[GroceryShoppingOnline.code()] += 1.0;
            v[EatingInRestaurant.code()] += 0.6;
        }
        TimePeriod::H9To10 => {
            v[BuyingMedicine.code()] += 0.8;
            v[SpecialtyShoppingOnline.code()] += 0.6;
        }
        TimePeriod::H11To12 => {
            v[OrderingFoodDelivery.code()] += 3.0;
            v[EatingInRestaurant.code()] += 1.4;
        }
        TimePeriod::H13To16 => {
            v[SpecialtyShoppingOnline.code()] += 0.9;
            v[Beauty.code()] += 0.7;
        }
        TimePeriod::H17To19 => {
            v[EatingInRestaurant.code()] += 1.6;
            v[HairDressing.code()] += 0.7;
        }
        TimePeriod::H20To24 => {
            v[Entertainment.code()] += 1.6;
            v[OrderingFoodDelivery.code()] += 0.8;
        }
    }
}

fn planted_weather(weather: WeatherType, v: &mut [f64; NEED_COUNT]) {
    use NeedCategory::*;
    match weather {
        WeatherType::Sunny => {
            v[Tourism.code()] += 1.0;
            v[EatingInRestaurant.code()] += 0.4;
        }
        WeatherType::Rainy => {
            v[OrderingFoodDelivery.code()] += 1.5;
            v[GroceryShoppingOnline.code()] += 0.8;
        }
        WeatherType::Snowy => {
            v[GroceryShoppingOnline.code()] += 1.4;
            v[BuyingMedicine.code()] += 0.7;
        }
        WeatherType::Cloudy => {
            v[Entertainment.code()] += 0.5;
        }
    }
}

fn planted_travel(travel: TravelState, v: &mut [f64; NEED_COUNT]) {
    use NeedCategory::*;
    match travel {
        TravelState::BasedInResidentCity => {}
        TravelState::AboutToTravel => {
            v[BookingHotel.code()] += 1.8;
            v[SpecialtyShoppingOnline.code()] += 0.5;
        }
        TravelState::OnTravel => {
            v[BookingHotel.code()] += 2.2;
            v[Tourism.code()] += 1.8;
            v[EatingInRestaurant.code()] += 0.8;
        }
    }
}

fn planted_location(location_type: usize, v: &mut [f64; NEED_COUNT]) {
    use NeedCategory::*;
    match location_type {
        LOC_RESIDENTIAL => {
            v[GroceryShoppingOnline.code()] += 1.0;
            v[OrderingFoodDelivery.code()] += 0.6;
        }
        LOC_WORKPLACE => {
            v[OrderingFoodDelivery.code()] += 1.6;
            v[BuyingMedicine.code()] += 0.3;
        }
        _ => {
            v[EatingInRestaurant.code()] += 1.0;
            v[Beauty.code()] += 0.7;
            v[HairDressing.code()] += 0.5;
            v[Entertainment.code()] += 0.6;
        }
    }
}

fn planted_holiday(holiday: bool, v: &mut [f64; NEED_COUNT]) {
    use NeedCategory::*;
    if holiday {
        v[Tourism.code()] += 1.0;
        v[Entertainment.code()] += 0.8;
        v[EatingInRestaurant.code()] += 0.5;
    }
}

/// How strongly a cell tips toward via-delivery (+) or in-store (−).
fn way_bias(
    period: TimePeriod,
    holiday: bool,
    location_type: usize,
    weather: WeatherType,
    travel: TravelState,
) -> f64 {
    let mut bias: f64 = match location_type {
        LOC_WORKPLACE => 0.9,
        LOC_COMMERCIAL => -0.9,
        _ => 0.3,
    };
    bias += match weather {
        WeatherType::Rainy => 0.6,
        WeatherType::Snowy => 0.8,
        WeatherType::Sunny => -0.4,
        WeatherType::Cloudy => 0.0,
    };
    bias += match period {
        TimePeriod::H11To12 => 0.4,
        TimePeriod::H17To19 | TimePeriod::H20To24 => -0.3,
        _ => 0.0,
    };
    if travel == TravelState::OnTravel {
        bias -= 0.7;
    }
    if holiday {
        bias -= 0.3;
    }
    bias.clamp(-1.6, 1.6)
}

/// Per-dimension marginal sampling weights.
pub(crate) const PERIOD_WEIGHTS: [f64; TIME_PERIOD_COUNT] =
    [0.05, 0.10, 0.10, 0.17, 0.18, 0.20, 0.20];
pub(crate) const HOLIDAY_WEIGHTS: [f64; 2] = [0.72, 0.28];
pub(crate) const LOCATION_WEIGHTS: [f64; LOCATION_TYPE_COUNT] = [0.40, 0.30, 0.30];
pub(crate) const WEATHER_WEIGHTS: [f64; WEATHER_TYPE_COUNT] = [0.45, 0.25, 0.05, 0.25];
pub(crate) const TRAVEL_WEIGHTS: [f64; TRAVEL_STATE_COUNT] = [0.86, 0.06, 0.08];

/// Builds the deterministic world ground truth for a configuration.
pub fn build_world(config: &WorldConfig) -> Result<WorldModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Group base preferences.
    let mut group_logits = Vec::with_capacity(config.group_count);
    for _ in 0..config.group_count {
        let mut v = [0.0; NEED_COUNT];
        for x in &mut v {
            *x = config.base_concentration * GROUP_LOGIT_SCALE * normal(&mut rng);
        }
        group_logits.push(v);
    }

    // Per-dimension context effects: planted pattern + seeded noise.
    let effect =
        |plant: &dyn Fn(&mut [f64; NEED_COUNT]), rng: &mut ChaCha8Rng| -> [f64; NEED_COUNT] {
            let mut v = [0.0; NEED_COUNT];
            plant(&mut v);
            for x in v.iter_mut() {
                *x = *x * PLANTED_SCALE + CONTEXT_NOISE_SCALE * normal(rng);
            }
            v
        };
    let period_effects: Vec<[f64; NEED_COUNT]> = TimePeriod::ALL
        .iter()
        .map(|&p| effect(&|v| planted_period(p, v), &mut rng))
        .collect();
    let holiday_effects: Vec<[f64; NEED_COUNT]> = [false, true]
        .iter()
        .map(|&h| effect(&|v| planted_holiday(h, v), &mut rng))
        .collect();
    let location_effects: Vec<[f64; NEED_COUNT]> = (0..LOCATION_TYPE_COUNT)
        .map(|l| effect(&|v| planted_location(l, v), &mut rng))
        .collect();
    let weather_effects: Vec<[f64; NEED_COUNT]> = WeatherType::ALL
        .iter()
        .map(|&w| effect(&|v| planted_weather(w, v), &mut rng))
        .collect();
    let travel_effects: Vec<[f64; NEED_COUNT]> = TravelState::ALL
        .iter()
        .map(|&t| effect(&|v| planted_travel(t, v), &mut rng))
        .collect();

    // Assemble cells.
    let mut cell_logits = vec![[0.0; NEED_COUNT]; CELL_COUNT];
    let mut cell_marginals = vec![0.0; CELL_COUNT];
    for period in TimePeriod::ALL {
        for holiday in [false, true] {
            for ltype in 0..LOCATION_TYPE_COUNT {
                for weather in WeatherType::ALL {
                    for travel in TravelState::ALL {
                        let idx = cell_index(period, holiday, ltype, weather, travel).0;
                        let mut v = [0.0; NEED_COUNT];
                        for i in 0..NEED_COUNT {
                            v[i] = period_effects[period.code()][i]
                                + holiday_effects[usize::from(holiday)][i]
                                + location_effects[ltype][i]
                                + weather_effects[weather.code()][i]
                                + travel_effects[travel.code()][i];
                            v[i] *= config.context_effect_strength;
                        }
                        let bias = way_bias(period, holiday, ltype, weather, travel);
                        for need in NeedCategory::ALL {
                            let sign = match need.way() {
                                crate::data::NeedsMeetingWay::ViaDelivery => 0.5,
                                crate::data::NeedsMeetingWay::InStore => -0.5,
                            };
                            v[need.code()] += config.way_correlation_strength
                                * WAY_SHIFT_SCALE
                                * bias
                                * sign;
                        }
                        cell_logits[idx] = v;
                        cell_marginals[idx] = PERIOD_WEIGHTS[period.code()]
                            * HOLIDAY_WEIGHTS[usize::from(holiday)]
                            * LOCATION_WEIGHTS[ltype]
                            * WEATHER_WEIGHTS[weather.code()]
                            * TRAVEL_WEIGHTS[travel.code()];
                    }
                }
            }
        }
    }

    // Group-specific context responses: different groups react differently
    // to the same time period, holiday, weather, or travel state. Without
    // these interaction terms the world would be purely additive and the
    // group behavior tables would carry no information beyond the profile
    // embeddings. Location is left out so the interactions stay visible to
    // the coarse (period, holiday, weather, travel) table cell.
    let draw_levels = |levels: usize, rng: &mut ChaCha8Rng| -> Vec<[f64; NEED_COUNT]> {
        (0..levels)
            .map(|_| {
                let mut v = [0.0; NEED_COUNT];
                for x in &mut v {
                    *x = INTERACTION_SCALE * normal(rng);
                }
                v
            })
            .collect()
    };
    let mut ixn_period = Vec::with_capacity(config.group_count);
    let mut ixn_holiday = Vec::with_capacity(config.group_count);
    let mut ixn_weather = Vec::with_capacity(config.group_count);
    let mut ixn_travel = Vec::with_capacity(config.group_count);
    for _ in 0..config.group_count {
        ixn_period.push(draw_levels(TIME_PERIOD_COUNT, &mut rng));
        ixn_holiday.push(draw_levels(2, &mut rng));
        ixn_weather.push(draw_levels(WEATHER_TYPE_COUNT, &mut rng));
        ixn_travel.push(draw_levels(TRAVEL_STATE_COUNT, &mut rng));
    }

    // Precompute the per-(group, cell) distributions.
    let mut distributions = Vec::with_capacity(config.group_count);
    for g in 0..config.group_count {
        let mut rows = Vec::with_capacity(CELL_COUNT);
        for cell in 0..CELL_COUNT {
            let dims = decode_cell(cell);
            let mut logits = [0.0; NEED_COUNT];
            for i in 0..NEED_COUNT {
                let interaction = ixn_period[g][dims.period.code()][i]
                    + ixn_holiday[g][usize::from(dims.holiday)][i]
                    + ixn_weather[g][dims.weather.code()][i]
                    + ixn_travel[g][dims.travel.code()][i];
                logits[i] = group_logits[g][i]
                    + cell_logits[cell][i]
                    + config.context_effect_strength * interaction;
            }
            let p = softmax(&logits)?;
            let mut row = [0.0; NEED_COUNT];
            row.copy_from_slice(&p);
            rows.push(row);
        }
        distributions.push(rows);
    }

    // Users.
    let mut user_groups = Vec::with_capacity(config.user_count);
    let mut user_cities = Vec::with_capacity(config.user_count);
    let mut user_tilts = Vec::with_capacity(config.user_count);
    let mut group_counts = vec![0usize; config.group_count];
    for i in 0..config.user_count {
        let g = i % config.group_count;
        group_counts[g] += 1;
        user_groups.push(g);
        user_cities.push(rng.gen_range(1..=config.city_count as u32));
        let mut tilt = [0.0; NEED_COUNT];
        if config.user_tilt_strength > 0.0 {
            for x in &mut tilt {
                *x = config.user_tilt_strength * TILT_SCALE * normal(&mut rng);
            }
        }
        user_tilts.push(tilt);
    }
    let group_weights = group_counts
        .iter()
        .map(|&c| c as f64 / config.user_count as f64)
        .collect();

    // POIs: round-robin over cities and location types so every (city, type)
    // pair is populated.
    let per_city_aois = (config.aoi_count / config.city_count).max(1);
    let mut poi_city = Vec::with_capacity(config.poi_count);
    let mut poi_aoi = Vec::with_capacity(config.poi_count);
    let mut poi_type = Vec::with_capacity(config.poi_count);
    for p in 0..config.poi_count {
        let city = p % config.city_count;
        let ltype = (p / config.city_count) % LOCATION_TYPE_COUNT;
        let aoi = city * per_city_aois + (p / (config.city_count * LOCATION_TYPE_COUNT)) % per_city_aois;
        poi_city.push(city as u32 + 1);
        poi_aoi.push(aoi as u32 + 1);
        poi_type.push(ltype as u8);
    }

    Ok(WorldModel {
        config: config.clone(),
        group_logits,
        cell_logits,
        distributions,
        user_groups,
        user_cities,
        user_tilts,
        poi_city,
        poi_aoi,
        poi_type,
        cell_marginals,
        group_weights,
    })
}

impl WorldModel {
    pub fn user_id(&self, index: usize) -> String {
        format!("u{index:06}")
    }

    pub fn user_index(&self, user_id: &str) -> Result<usize> {
        let digits = user_id
            .strip_prefix('u')
            .ok_or_else(|| Error::ForeignScene(format!("unknown user id '{user_id}'")))?;
        let idx: usize = digits
            .parse()
            .map_err(|_| Error::ForeignScene(format!("unknown user id '{user_id}'")))?;
        if idx >= self.config.user_count {
            return Err(Error::ForeignScene(format!(
                "user index {idx} outside this world's population"
            )));
        }
        Ok(idx)
    }

    pub fn profile(&self, index: usize) -> UserProfile {
        let (age_band, gender) = group_signature(self.user_groups[index]);
        UserProfile {
            user_id: self.user_id(index),
            age_band,
            gender,
            resident_city_id: self.user_cities[index],
        }
    }

    /// Location type of a POI id. Errors for ids this world never issued.
    pub fn location_type_of_poi(&self, poi_id: u32) -> Result<usize> {
        let idx = poi_id
            .checked_sub(1)
            .map(|i| i as usize)
            .filter(|&i| i < self.config.poi_count)
            .ok_or_else(|| Error::ForeignScene(format!("unknown poi id {poi_id}")))?;
        Ok(self.poi_type[idx] as usize)
    }

    /// The cell a context falls into.
    pub fn cell_of_context(&self, ctx: &SpatioTemporalContext) -> Result<CellIndex> {
        let ltype = self.location_type_of_poi(ctx.poi_id)?;
        Ok(cell_index(
            ctx.time_period,
            ctx.is_holiday,
            ltype,
            ctx.weather_type,
            ctx.travel_state,
        ))
    }

    /// True P(need | group, cell).
    pub fn distribution(&self, group: usize, cell: CellIndex) -> &[f64; NEED_COUNT] {
        &self.distributions[group][cell.0]
    }

    /// True per-user logits for a cell: the log of the stored (group, cell)
    /// distribution (which folds in group, context, and their interaction)
    /// plus the personal tilt. Softmax and ranking are shift-invariant, so
    /// the log-probability form is interchangeable with the raw logits.
    pub fn user_logits(&self, user: usize, cell: CellIndex) -> [f64; NEED_COUNT] {
        let g = self.user_groups[user];
        let mut v = [0.0; NEED_COUNT];
        for i in 0..NEED_COUNT {
            v[i] = self.distributions[g][cell.0][i].ln() + self.user_tilts[user][i];
        }
        v
    }

    /// Group-marginalized top-1 need of a cell.
    pub fn marginal_top1(&self, cell: CellIndex) -> NeedCategory {
        let mut mix = [0.0; NEED_COUNT];
        for (g, w) in self.group_weights.iter().enumerate() {
            for i in 0..NEED_COUNT {
                mix[i] += w * self.distributions[g][cell.0][i];
            }
        }
        let top = mix
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        NeedCategory::from_code(top).unwrap()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<WorldModel> {
        let text = std::fs::read_to_string(path)?;
        let world: WorldModel = serde_json::from_str(&text)?;
        world.config.validate()?;
        Ok(world)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_context_strength_collapses_cells_to_group_base() {
        let config = WorldConfig {
            user_count: 10,
            record_count: 10,
            context_effect_strength: 0.0,
            way_correlation_strength: 0.0,
            ..WorldConfig::default()
        };
        let world = build_world(&config).unwrap();
        let base = world.distribution(0, CellIndex(0)).to_vec();
        for cell in 0..CELL_COUNT {
            let d = world.distribution(0, CellIndex(cell));
            for (a, b) in d.iter().zip(&base) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_strength_lunch_cell_prefers_food_delivery() {
        // No group preference, full context strength: the planted lunch boost
        // dominates the workplace lunch cell.
        let config = WorldConfig {
            base_concentration: 0.0,
            context_effect_strength: 1.0,
            way_correlation_strength: 0.0,
            ..WorldConfig::default()
        };
        let world = build_world(&config).unwrap();
        let cell = cell_index(
            TimePeriod::H11To12,
            false,
            LOC_WORKPLACE,
            WeatherType::Rainy,
            TravelState::BasedInResidentCity,
        );
        let d = world.distribution(0, cell);
        let top = d
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(top, NeedCategory::OrderingFoodDelivery.code());
    }

    #[test]
    fn same_config_and_seed_build_identical_worlds() {
        let config = WorldConfig {
            user_count: 50,
            record_count: 100,
            ..WorldConfig::default()
        };
        let a = build_world(&config).unwrap();
        let b = build_world(&config).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn distributions_are_simplices() {
        let world = build_world(&WorldConfig {
            user_count: 10,
            record_count: 10,
            ..WorldConfig::default()
        })
        .unwrap();
        for g in 0..world.config.group_count {
            for cell in 0..CELL_COUNT {
                let d = world.distribution(g, CellIndex(cell));
                crate::simplex::validate_simplex(d, 1e-9, "world distribution").unwrap();
            }
        }
        let total: f64 = world.cell_marginals.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn way_correlation_shifts_block_mass() {
        let base = WorldConfig {
            user_count: 10,
            record_count: 10,
            base_concentration: 0.0,
            context_effect_strength: 0.0,
            way_correlation_strength: 0.0,
            ..WorldConfig::default()
        };
        let strong = WorldConfig {
            way_correlation_strength: 1.0,
            ..base.clone()
        };
        let w0 = build_world(&base).unwrap();
        let w1 = build_world(&strong).unwrap();
        // A strongly delivery-biased cell: workplace, snowy, lunch.
        let cell = cell_index(
            TimePeriod::H11To12,
            false,
            LOC_WORKPLACE,
            WeatherType::Snowy,
            TravelState::BasedInResidentCity,
        );
        let via_mass = |d: &[f64; NEED_COUNT]| -> f64 {
            NeedCategory::ALL
                .iter()
                .filter(|n| n.way() == crate::data::NeedsMeetingWay::ViaDelivery)
                .map(|n| d[n.code()])
                .sum()
        };
        assert!(via_mass(w1.distribution(0, cell)) > via_mass(w0.distribution(0, cell)));
    }

    #[test]
    fn poi_tables_cover_every_city_and_type() {
        let world = build_world(&WorldConfig {
            user_count: 10,
            record_count: 10,
            ..WorldConfig::default()
        })
        .unwrap();
        for city in 1..=world.config.city_count as u32 {
            for ltype in 0..LOCATION_TYPE_COUNT {
                let found = (0..world.config.poi_count)
                    .any(|p| world.poi_city[p] == city && world.poi_type[p] as usize == ltype);
                assert!(found, "city {city} lacks a type-{ltype} POI");
            }
        }
    }
}
