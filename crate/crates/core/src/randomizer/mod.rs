//! Seeded sampling of complete scene descriptions for the dataset presets.

mod config;
mod perlin;
mod preset;
mod sampler;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    ArmConfig, CountRange, DistractorConfig, Interval, LightConfig, MixingConfig, PerlinConfig,
    RandomizationConfig,
};
pub use perlin::{perlin, PerlinNoise, PerlinParams};
pub use preset::{DatasetPreset, PresetFeatures};
pub use sampler::{
    list_background_images, sample_distractors, sample_joint_angles, sample_scene, BackgroundKind,
    BackgroundSpec, Distractor, SceneDescription, SceneProvenance, SceneSampler, SceneSummary,
    SPOTLIGHT_COUNT,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("preset F needs a background image directory: {0}")]
    MissingBackgrounds(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
