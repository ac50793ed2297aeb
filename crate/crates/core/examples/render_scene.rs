//! Sample scene `index` for every preset, render it and save the RGB image
//! and hand mask.
//!
//! cargo run -p handforge --example render_scene -- [index] [out_dir]

use std::path::PathBuf;

use handforge::render::{bbox_from_mask, mask_from_instance};
use handforge::{DatasetPreset, PartLabel, RandomizationConfig, Renderer, SceneSampler};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let index: u64 = args.next().as_deref().unwrap_or("0").parse()?;
    let out: PathBuf = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("handforge-render"));
    std::fs::create_dir_all(&out)?;

    // Preset F needs photographs; a flat gray one is enough here.
    let backgrounds = out.join("backgrounds");
    std::fs::create_dir_all(&backgrounds)?;
    image::RgbImage::from_pixel(64, 48, image::Rgb([120, 118, 110])).save(backgrounds.join("wall.png"))?;
    let config = RandomizationConfig { backgrounds_dir: Some(backgrounds), ..Default::default() };
    let renderer = Renderer::from_config(&config)?;

    for preset in DatasetPreset::ALL {
        let scene = SceneSampler::new(&config, preset, 42)?.sample(index);
        let frame = renderer.render(&scene)?;
        let mask = mask_from_instance(&frame.instance, PartLabel::Hand);
        let stem = format!("{}_{index}", preset.letter());
        frame.image.to_image().save(out.join(format!("{stem}_rgb.png")))?;
        mask.to_image().save(out.join(format!("{stem}_mask.png")))?;
        let s = scene.summary();
        println!(
            "{preset} ({}): {:?} background, arm {}, {} distractors, {} lights, {} hand px, bbox {:?}",
            preset.name(),
            s.background,
            s.attach_arm,
            s.distractors,
            s.lights,
            mask.count(),
            bbox_from_mask(&mask).map(|b| b.to_xywh()),
        );
    }
    println!("images in {}", out.display());
    Ok(())
}
