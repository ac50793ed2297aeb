//! Train the reference segmenter briefly, save a checkpoint, reload it and
//! continue with the weights frozen so only the bias moves.
//!
//! cargo run -p handforge --example freeze_and_resume

use handforge::dataset::{generate_dataset, GenerateOptions, Split};
use handforge::trainer::{
    fit, CheckpointFile, EarlyStopConfig, FreezeSpec, PixelSegmenter, PixelSet, SegmenterSettings, TrainableModel,
    WeightSource,
};
use handforge::{Camera, DatasetPreset, RandomizationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let config = RandomizationConfig { camera: Camera::default().with_size(160, 120), ..Default::default() };
    let manifest = generate_dataset(&config, &GenerateOptions::new(DatasetPreset::SolidBgArm, 40, 2), dir.path())?;
    let train = PixelSet::from_manifest(&manifest, Some(Split::Train), 512, 0)?;
    let val = PixelSet::from_manifest(&manifest, Some(Split::Val), 512, 1)?;

    let mut model = PixelSegmenter::new(SegmenterSettings::default(), 0);
    let stop = EarlyStopConfig { patience: 5, max_epochs: 20 };
    let first = fit(&mut model, &train, &val, 1e-3, &stop)?;
    println!("first run: best epoch {} val {:.5}", first.best.epoch, first.best.val_total());

    let path = dir.path().join("checkpoint.json");
    CheckpointFile::new(PixelSegmenter::NAME, first.best.clone()).save(&path)?;
    let loaded = CheckpointFile::load(&path)?;

    let mut resumed = PixelSegmenter::new(SegmenterSettings::default(), 99);
    resumed.initialize(WeightSource::Checkpoint(&loaded.checkpoint))?;
    assert_eq!(resumed.parameters(), first.best.parameters);
    resumed.freeze(&FreezeSpec::groups(["weights"]))?;
    let before = resumed.parameters();
    let second = fit(&mut resumed, &train, &val, 1e-3, &stop)?;
    let after = resumed.parameters();
    let moved = before.iter().zip(&after).filter(|(a, b)| a != b).count();
    println!(
        "frozen run: best epoch {} val {:.5}, {moved} of {} parameters changed",
        second.best.epoch,
        second.best.val_total(),
        after.len()
    );
    Ok(())
}
