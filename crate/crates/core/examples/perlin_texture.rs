//! Write fractal Perlin noise textures with 1, 3 and 6 octaves.
//!
//! cargo run -p handforge --example perlin_texture -- [out_dir]

use std::path::PathBuf;

use handforge::randomizer::{PerlinNoise, PerlinParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let (w, h) = (256u32, 192u32);
    for octaves in [1, 3, 6] {
        let params = PerlinParams { seed: 5, octaves, frequency: 6.0, persistence: 0.5 };
        let noise = PerlinNoise::new(params.seed);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let img = image::GrayImage::from_fn(w, h, |x, y| {
            let v = noise.fractal((x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / w as f64, &params);
            lo = lo.min(v);
            hi = hi.max(v);
            image::Luma([((v * 0.5 + 0.5).clamp(0.0, 1.0) * 255.0).round() as u8])
        });
        let path = out.join(format!("perlin_{octaves}.png"));
        img.save(&path)?;
        println!("{octaves} octave(s): range [{lo:.3}, {hi:.3}] -> {}", path.display());
    }
    Ok(())
}
