//! Feature mining: user features, spatiotemporal context features, and
//! corpus-level group behavior features.

mod encode;
mod group;
mod rules;
mod schema;

pub use encode::{
    encode_context, encode_user, ContextFeatureVector, SparseUserFeatures, RECENT_K, TOP_PLACES,
};
pub use group::{
    assemble_group_vector, build_group_tables, GroupFeatureTables, GroupFeatureVector,
    GroupTableConfig,
};
pub use rules::{mine_rules, AssociationRule};
pub use schema::{FeatureSchema, Standardizer, Vocabulary, OOV_INDEX};

use serde::{Deserialize, Serialize};

use crate::data::UserScene;
use crate::error::{Error, Result};

/// A scene encoded into the three model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedScene {
    pub user: SparseUserFeatures,
    pub context: ContextFeatureVector,
    pub group: GroupFeatureVector,
}

/// Runs all three encoders against a scene.
pub fn encode_scene(
    scene: &UserScene,
    schema: &FeatureSchema,
    tables: &GroupFeatureTables,
) -> Result<EncodedScene> {
    Ok(EncodedScene {
        user: encode_user(scene, schema),
        context: encode_context(&scene.context, schema)?,
        group: assemble_group_vector(scene, tables),
    })
}

/// Current version of the persisted feature document.
pub const FEATURE_FORMAT_VERSION: u32 = 1;

/// The persisted feature artifact: schema plus tables, one JSON document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSet {
    pub format_version: u32,
    pub schema: FeatureSchema,
    pub tables: GroupFeatureTables,
}

impl FeatureSet {
    pub fn new(schema: FeatureSchema, tables: GroupFeatureTables) -> Self {
        FeatureSet {
            format_version: FEATURE_FORMAT_VERSION,
            schema,
            tables,
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<FeatureSet> {
        let text = std::fs::read_to_string(path)?;
        let set: FeatureSet = serde_json::from_str(&text)?;
        if set.format_version != FEATURE_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: set.format_version,
                supported: FEATURE_FORMAT_VERSION,
            });
        }
        set.tables.validate()?;
        Ok(set)
    }
}
