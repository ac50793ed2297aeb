use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use handforge::dataset::{generate_dataset, DatasetManifest, GenerateOptions, Split};
use handforge::randomizer::BackgroundKind;
use handforge::DatasetPreset;

use crate::config::{default_jobs, parse_preset, pick, FileConfig};
use crate::usage;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Dataset preset, A..F.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<DatasetPreset>,
    /// Number of images [default: 1000].
    #[arg(long)]
    pub count: Option<usize>,
    /// Dataset seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; must be empty or absent unless --force is given.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; the output does not depend on it [default: available cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Fraction of images assigned to the training split [default: 0.8].
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Write into a non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

pub fn options(a: &GenerateArgs, cfg: &FileConfig) -> anyhow::Result<GenerateOptions> {
    let g = &cfg.generate;
    let preset = a
        .preset
        .or(g.preset)
        .ok_or_else(|| usage("--preset is required (A..F)"))?;
    let mut opts = GenerateOptions::new(preset, pick(a.count, g.count, 1000), pick(a.seed, g.seed, 0));
    opts.jobs = pick(a.jobs, g.jobs, default_jobs());
    opts.train_fraction = pick(a.train_fraction, g.train_fraction, 0.8);
    if opts.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    if opts.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if !(0.0..=1.0).contains(&opts.train_fraction) {
        return Err(usage("--train-fraction must lie in [0, 1]"));
    }
    Ok(opts)
}

fn ensure_empty(dir: &Path, force: bool) -> anyhow::Result<()> {
    if force || !dir.exists() {
        return Ok(());
    }
    let mut entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    if entries.next().is_some() {
        return Err(usage(format!("{} is not empty (use --force to write into it)", dir.display())));
    }
    Ok(())
}

pub fn summary(manifest: &DatasetManifest) -> String {
    let (mut solid, mut perlin, mut real) = (0, 0, 0);
    for r in &manifest.records {
        match r.scene.as_ref().map(|s| s.background) {
            Some(BackgroundKind::Solid) => solid += 1,
            Some(BackgroundKind::Perlin) => perlin += 1,
            Some(BackgroundKind::Real) => real += 1,
            None => {}
        }
    }
    format!(
        "{} images ({} train, {} val); backgrounds: {solid} solid, {perlin} perlin, {real} real",
        manifest.records.len(),
        manifest.count(Split::Train),
        manifest.count(Split::Val),
    )
}

pub fn run(a: GenerateArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    let opts = options(&a, cfg)?;
    ensure_empty(&a.out, a.force)?;
    let manifest = generate_dataset(&cfg.randomization, &opts, &a.out)?;
    println!("preset {} seed {} -> {}", opts.preset, opts.seed, a.out.display());
    println!("{}", summary(&manifest));
    Ok(())
}
