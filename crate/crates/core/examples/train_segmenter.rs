//! Generate Set A, line-search the reference segmenter's learning rate and
//! report validation IoU.
//!
//! cargo run -p handforge --example train_segmenter -- [count]

use std::time::Instant;

use handforge::dataset::{generate_dataset, GenerateOptions, Split};
use handforge::eval::{evaluate_with, EvalError, ModelIdentity};
use handforge::trainer::{
    line_search_lr, LineSearchConfig, PixelSegmenter, PixelSet, SegmenterSettings, TrainableModel,
};
use handforge::{DatasetPreset, RandomizationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: usize = std::env::args().nth(1).as_deref().unwrap_or("200").parse()?;
    let dir = tempfile::tempdir()?;
    let t = Instant::now();
    let manifest = generate_dataset(
        &RandomizationConfig::default(),
        &GenerateOptions::new(DatasetPreset::SolidBgHand, count, 1),
        dir.path(),
    )?;
    println!("generated {count} images in {:.1?}", t.elapsed());

    let t = Instant::now();
    let train = PixelSet::from_manifest(&manifest, Some(Split::Train), 1024, 1)?;
    let val = PixelSet::from_manifest(&manifest, Some(Split::Val), 1024, 2)?;
    println!("sampled {} / {} pixels in {:.1?}", train.len(), val.len(), t.elapsed());

    let model_id = ModelIdentity {
        name: PixelSegmenter::NAME.into(),
        train_preset: Some(DatasetPreset::SolidBgHand),
    };
    let score = |m: &PixelSegmenter| {
        let report = evaluate_with(&manifest, Some(Split::Val), model_id.clone(), |r| {
            manifest.load_image(r).map(|img| m.predict(&img)).map_err(EvalError::from)
        })
        .map_err(|e| handforge::trainer::TrainError::Data(e.to_string()))?;
        Ok(report.mean.iou)
    };
    let t = Instant::now();
    let result = line_search_lr(
        |_| PixelSegmenter::new(SegmenterSettings::default(), 0),
        &LineSearchConfig::default(),
        &train,
        &val,
        score,
    )?;
    for r in &result.reports {
        println!(
            "lr {:>8}: best epoch {:>3} of {:>3}, val loss {:.4}, mean IoU {:.4}",
            r.lr, r.best_epoch, r.stopped_epoch, r.best_val_total, r.score
        );
    }
    println!("best lr {} in {:.1?}", result.best_lr, t.elapsed());
    Ok(())
}
