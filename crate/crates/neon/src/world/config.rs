//! World generator configuration.

use serde::{Deserialize, Serialize};

use crate::data::GROUP_COUNT;
use crate::error::{Error, Result};

/// Shape and strength parameters of a synthetic world.
///
/// The context-cell grid is fixed at time period × holiday flag × location
/// type × weather type × travel state (7 × 2 × 3 × 4 × 3 cells).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub user_count: usize,
    pub record_count: usize,
    /// Number of behavior groups (at most 10); group `g` is assigned the
    /// (age band, gender) profile signature with cross code `g`.
    pub group_count: usize,
    pub poi_count: usize,
    pub aoi_count: usize,
    pub city_count: usize,
    /// How peaked the per-group base preferences are, in [0, 1].
    pub base_concentration: f64,
    /// How strongly the context cell shifts the need distribution, in [0, 1].
    pub context_effect_strength: f64,
    /// How strongly cells shift mass between the via-delivery and in-store
    /// need blocks, in [0, 1].
    pub way_correlation_strength: f64,
    /// Per-user idiosyncratic preference strength, in [0, 1]. Nonzero tilt
    /// makes individual histories informative beyond (group, cell), so the
    /// group-cell oracle is only guaranteed dominant at 0.
    pub user_tilt_strength: f64,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            user_count: 5_000,
            record_count: 50_000,
            group_count: 6,
            poi_count: 300,
            aoi_count: 60,
            city_count: 5,
            base_concentration: 0.8,
            context_effect_strength: 0.9,
            way_correlation_strength: 0.7,
            user_tilt_strength: 0.0,
            seed: 0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("user_count", self.user_count),
            ("record_count", self.record_count),
            ("group_count", self.group_count),
            ("poi_count", self.poi_count),
            ("aoi_count", self.aoi_count),
            ("city_count", self.city_count),
        ] {
            if v == 0 {
                return Err(Error::Validation(format!("{name} must be positive")));
            }
        }
        if self.group_count > GROUP_COUNT {
            return Err(Error::Validation(format!(
                "group_count must be <= {GROUP_COUNT} (distinct profile signatures), got {}",
                self.group_count
            )));
        }
        if self.poi_count < self.city_count * 3 {
            return Err(Error::Validation(format!(
                "poi_count {} too small: every city needs a POI of each of the 3 location types",
                self.poi_count
            )));
        }
        if self.aoi_count < self.city_count {
            return Err(Error::Validation(format!(
                "aoi_count {} must be at least city_count {}",
                self.aoi_count, self.city_count
            )));
        }
        for (name, v) in [
            ("base_concentration", self.base_concentration),
            ("context_effect_strength", self.context_effect_strength),
            ("way_correlation_strength", self.way_correlation_strength),
            ("user_tilt_strength", self.user_tilt_strength),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<WorldConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Validation(format!("cannot read world config {}: {e}", path.display()))
        })?;
        let cfg: WorldConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("invalid world config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
