use std::path::{Path, PathBuf};

use anyhow::Context;
use handforge::dataset::Split;
use handforge::{DatasetPreset, RandomizationConfig};
use serde::Deserialize;

use crate::usage;

/// Contents of `--config`. Every section is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub randomization: RandomizationConfig,
    pub generate: GenerateSection,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub annotate: AnnotateSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub preset: Option<DatasetPreset>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub lr: Option<f64>,
    pub lr_grid: Option<Vec<f64>>,
    pub patience: Option<usize>,
    pub max_epochs: Option<usize>,
    pub pixels_per_image: Option<usize>,
    pub seed: Option<u64>,
    pub batch_size: Option<usize>,
    pub momentum: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub split: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateSection {
    pub host: Option<String>,
    pub port: Option<u16>,
    pub ui: Option<PathBuf>,
}

impl FileConfig {
    /// Relative paths in the randomization section resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let r = &mut cfg.randomization;
        for p in [&mut r.backgrounds_dir, &mut r.hand_mesh].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(ui) = cfg.annotate.ui.as_mut().filter(|p| p.is_relative()) {
            *ui = base.join(&*ui);
        }
        cfg.randomization.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }
}

/// Explicit flag, else config value, else default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// `None` selects every record.
pub fn parse_split(s: &str) -> anyhow::Result<Option<Split>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    s.parse::<Split>().map(Some).map_err(|e| usage(e.to_string()))
}

pub fn parse_preset(s: &str) -> Result<DatasetPreset, String> {
    s.parse()
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
