use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use handforge::render::mask_from_instance;
use handforge::{DatasetPreset, PartLabel, Renderer, SceneSampler};

use crate::config::{parse_preset, pick, FileConfig};
use crate::usage;

pub const FILES: [&str; 3] = ["rgb.png", "mask.png", "overlay.png"];
const OVERLAY: [f32; 3] = [255.0, 0.0, 255.0];
const OVERLAY_ALPHA: f32 = 0.5;

#[derive(Debug, Args)]
pub struct PreviewArgs {
    /// Dataset preset, A..F.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<DatasetPreset>,
    /// Dataset seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scene index within the dataset [default: 0].
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    /// Output directory for rgb.png, mask.png and overlay.png [default: preview].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: PreviewArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    let preset = a.preset.or(cfg.generate.preset).ok_or_else(|| usage("--preset is required (A..F)"))?;
    let seed = pick(a.seed, cfg.generate.seed, 0);
    let sampler = SceneSampler::new(&cfg.randomization, preset, seed)?;
    let scene = sampler.sample(a.index);
    let out = Renderer::from_config(&cfg.randomization)?.render(&scene)?;
    let mask = mask_from_instance(&out.instance, PartLabel::Hand);

    let rgb = out.image.to_image();
    let mut overlay = rgb.clone();
    for (x, y, px) in overlay.enumerate_pixels_mut() {
        if mask.get(x, y) {
            for c in 0..3 {
                px[c] = (px[c] as f32 * (1.0 - OVERLAY_ALPHA) + OVERLAY[c] * OVERLAY_ALPHA).round() as u8;
            }
        }
    }
    let dir = a.out.unwrap_or_else(|| PathBuf::from("preview"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let [rgb_name, mask_name, overlay_name] = FILES;
    rgb.save(dir.join(rgb_name))?;
    mask.to_image().save(dir.join(mask_name))?;
    overlay.save(dir.join(overlay_name))?;
    let s = scene.summary();
    println!(
        "preset {preset} seed {seed} index {}: {:?} background, arm {}, {} distractors, {} lights, {} hand pixels",
        a.index,
        s.background,
        s.attach_arm,
        s.distractors,
        s.lights,
        mask.count()
    );
    println!("wrote {} -> {}", FILES.join(", "), dir.display());
    Ok(())
}
