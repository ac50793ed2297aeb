//! Score predicted masks against ground truth and lay several reports out
//! as a train-set x eval-set grid.
//!
//! cargo run -p handforge --example mask_metrics

use std::collections::HashMap;

use handforge::dataset::{Annotation, DatasetManifest, Provenance, Record, Split};
use handforge::eval::{ablation_report, confusion, evaluate_dataset, metrics, ModelIdentity};
use handforge::{BinaryMask, DatasetPreset};

fn disk(cx: f64, cy: f64, r: f64) -> BinaryMask {
    BinaryMask::from_fn(64, 48, |x, y| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gt = disk(30.0, 24.0, 12.0);
    let pred = disk(34.0, 24.0, 10.0);
    let c = confusion(&pred, &gt)?;
    println!("{c:?} -> {:?}", metrics(c));

    let mut manifest = DatasetManifest::new("toy", Provenance::Real, ".");
    let mut preds = HashMap::new();
    for i in 0..4 {
        let id = format!("img{i}");
        let gt = disk(20.0 + 6.0 * i as f64, 24.0, 10.0);
        manifest.records.push(Record {
            id: id.clone(),
            image_path: format!("{id}.png").into(),
            width: 64,
            height: 48,
            split: Split::Test,
            scene: None,
            annotation: Annotation::from_mask(&id, &gt),
        });
        preds.insert(id, disk(24.0 + 6.0 * i as f64, 24.0, 9.0));
    }
    let mut reports = Vec::new();
    for preset in [DatasetPreset::RealBackgrounds, DatasetPreset::SolidBgHand] {
        let model = ModelIdentity { name: "disk".into(), train_preset: Some(preset) };
        reports.push(evaluate_dataset(&preds, &manifest, Some(Split::Test), model)?);
    }
    print!("{}", reports[0].to_text());
    print!("\n{}", ablation_report(&reports).to_text());
    Ok(())
}
