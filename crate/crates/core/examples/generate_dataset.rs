//! Generate a small preset dataset and print its split counts.
//!
//! cargo run -p handforge --example generate_dataset -- [preset] [count] [out_dir]

use std::path::PathBuf;
use std::time::Instant;

use handforge::dataset::{generate_dataset, GenerateOptions, Split};
use handforge::{DatasetPreset, RandomizationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let preset: DatasetPreset = args.next().as_deref().unwrap_or("E").parse()?;
    let count: usize = args.next().as_deref().unwrap_or("20").parse()?;
    let out: PathBuf = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("handforge-example"));

    let mut opts = GenerateOptions::new(preset, count, 7);
    opts.jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let start = Instant::now();
    let manifest = generate_dataset(&RandomizationConfig::default(), &opts, &out)?;
    println!(
        "{} images of preset {preset} in {:.1?} -> {} (train {}, val {})",
        manifest.records.len(),
        start.elapsed(),
        out.display(),
        manifest.count(Split::Train),
        manifest.count(Split::Val),
    );
    Ok(())
}
