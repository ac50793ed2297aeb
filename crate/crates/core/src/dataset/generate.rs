use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{split_dataset, Annotation, DatasetError, DatasetManifest, Provenance, Record, Split};
use crate::randomizer::{DatasetPreset, RandomizationConfig, SceneSampler};
use crate::render::{mask_from_instance, Renderer};
use crate::scene::PartLabel;

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub preset: DatasetPreset,
    pub count: usize,
    pub seed: u64,
    /// Worker threads; output does not depend on it.
    pub jobs: usize,
    pub train_fraction: f64,
    /// Defaults to `set_<letter>`.
    pub name: Option<String>,
}

impl GenerateOptions {
    pub fn new(preset: DatasetPreset, count: usize, seed: u64) -> Self {
        GenerateOptions {
            preset,
            count,
            seed,
            jobs: 1,
            train_fraction: 0.8,
            name: None,
        }
    }
}

/// Zero-padded index used for ids and file names.
pub fn image_id(index: usize) -> String {
    format!("{index:06}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Sample, render and write `count` images with their annotations, then
/// split them and write `annotations.json`.
pub fn generate_dataset(
    config: &RandomizationConfig,
    opts: &GenerateOptions,
    out_dir: &Path,
) -> Result<DatasetManifest, DatasetError> {
    if opts.count == 0 {
        return Err(DatasetError::InvalidArgument("count must be at least 1".into()));
    }
    if opts.jobs == 0 {
        return Err(DatasetError::InvalidArgument("jobs must be at least 1".into()));
    }
    let sampler = SceneSampler::new(config, opts.preset, opts.seed)?;
    let renderer = Renderer::from_config(config)?;
    let images = out_dir.join("images");
    std::fs::create_dir_all(&images).map_err(io_err(&images))?;

    let make = |index: usize| -> Result<Record, DatasetError> {
        let scene = sampler.sample(index as u64);
        let out = renderer.render(&scene)?;
        let id = image_id(index);
        let rel = PathBuf::from("images").join(format!("{id}.png"));
        let path = out_dir.join(&rel);
        out.image.to_image().save(&path).map_err(|e| DatasetError::Image {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let mask = mask_from_instance(&out.instance, PartLabel::Hand);
        Ok(Record {
            annotation: Annotation::from_mask(&id, &mask),
            id,
            image_path: rel,
            width: out.image.width,
            height: out.image.height,
            split: Split::Train,
            scene: Some(scene.summary()),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| DatasetError::InvalidArgument(e.to_string()))?;
    let records = pool.install(|| (0..opts.count).into_par_iter().map(make).collect::<Result<Vec<_>, _>>())?;

    let mut manifest = DatasetManifest::new(
        opts.name.clone().unwrap_or_else(|| format!("set_{}", opts.preset.letter().to_ascii_lowercase())),
        Provenance::Synthetic(opts.preset),
        out_dir,
    );
    manifest.seed = Some(opts.seed);
    manifest.records = records;
    let manifest = split_dataset(manifest, opts.train_fraction, opts.seed)?;
    manifest.write()?;
    Ok(manifest)
}
