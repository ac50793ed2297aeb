use std::collections::HashMap;

use handforge::dataset::{Annotation, DatasetManifest, Provenance, Record, Split};
use handforge::eval::{
    ablation_report, confusion, evaluate_dataset, metrics, AblationTable, EvalError, Metrics,
    MetricReport, ModelIdentity, PixelConfusion, MEAN_ROW_ID,
};
use handforge::render::BinaryMask;
use handforge::DatasetPreset;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_mask(rng: &mut ChaCha8Rng, w: u32, h: u32) -> BinaryMask {
    let density: f64 = rng.gen_range(0.0..1.0);
    let empty = rng.gen_bool(0.05);
    BinaryMask::from_fn(w, h, |_, _| !empty && rng.gen_bool(density))
}

#[test]
fn metrics_match_pixel_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
        let (p, g) = (random_mask(&mut rng, w, h), random_mask(&mut rng, w, h));
        let (mut inter, mut uni, mut np, mut ng) = (0u64, 0u64, 0u64, 0u64);
        for y in 0..h {
            for x in 0..w {
                let (a, b) = (p.get(x, y), g.get(x, y));
                inter += (a && b) as u64;
                uni += (a || b) as u64;
                np += a as u64;
                ng += b as u64;
            }
        }
        let m = metrics(confusion(&p, &g).unwrap());
        let expect = |num: u64, den: u64| if uni == 0 { 1.0 } else if den == 0 { 0.0 } else { num as f64 / den as f64 };
        assert_eq!(m.iou, expect(inter, uni));
        assert_eq!(m.precision, expect(inter, np));
        assert_eq!(m.recall, expect(inter, ng));
        assert!(m.iou <= m.precision.min(m.recall));
        let swapped = confusion(&g, &p).unwrap();
        let c = confusion(&p, &g).unwrap();
        assert_eq!((swapped.tp, swapped.fp, swapped.fn_), (c.tp, c.fn_, c.fp));
    }
}

proptest! {
    #[test]
    fn iou_dominated_and_scale_invariant(tp in 0u64..1000, fp in 0u64..1000, fn_ in 0u64..1000, k in 1u64..50) {
        let c = PixelConfusion { tp, fp, fn_ };
        let m = metrics(c);
        prop_assert!(m.iou <= m.precision && m.iou <= m.recall);
        for v in [m.iou, m.precision, m.recall] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let s = metrics(PixelConfusion { tp: tp * k, fp: fp * k, fn_: fn_ * k });
        prop_assert!((s.iou - m.iou).abs() < 1e-12);
        prop_assert!((s.precision - m.precision).abs() < 1e-12);
        prop_assert!((s.recall - m.recall).abs() < 1e-12);
    }
}

fn manifest(masks: &[BinaryMask]) -> DatasetManifest {
    let mut m = DatasetManifest::new("set", Provenance::Real, "/x");
    for (i, mask) in masks.iter().enumerate() {
        let id = format!("{i:06}");
        m.records.push(Record {
            annotation: Annotation::from_mask(&id, mask),
            image_path: format!("{id}.png").into(),
            id,
            width: mask.width,
            height: mask.height,
            split: Split::Test,
            scene: None,
        });
    }
    m
}

fn model() -> ModelIdentity {
    ModelIdentity { name: "m".into(), train_preset: Some(DatasetPreset::SolidBgHand) }
}

#[test]
fn dataset_level_examples() {
    let g1 = BinaryMask::from_fn(5, 1, |x, _| x < 5);
    let g2 = BinaryMask::from_fn(5, 1, |x, _| x < 5);
    let m = manifest(&[g1.clone(), g2.clone()]);

    let perfect: HashMap<String, BinaryMask> = [("000000".into(), g1.clone()), ("000001".into(), g2.clone())].into();
    let r = evaluate_dataset(&perfect, &m, None, model()).unwrap();
    assert_eq!(r.mean, Metrics { iou: 1.0, precision: 1.0, recall: 1.0 });

    let empty: HashMap<String, BinaryMask> =
        [("000000".into(), BinaryMask::new(5, 1)), ("000001".into(), BinaryMask::new(5, 1))].into();
    assert_eq!(evaluate_dataset(&empty, &m, None, model()).unwrap().mean.recall, 0.0);

    // IoU 0.2 and 0.8
    let p1 = BinaryMask::from_fn(5, 1, |x, _| x < 1);
    let p2 = BinaryMask::from_fn(5, 1, |x, _| x < 4);
    let mixed: HashMap<String, BinaryMask> = [("000000".into(), p1), ("000001".into(), p2)].into();
    let r = evaluate_dataset(&mixed, &m, None, model()).unwrap();
    assert!((r.mean.iou - 0.5).abs() < 1e-12);

    let partial: HashMap<String, BinaryMask> = [("000000".into(), g1)].into();
    match evaluate_dataset(&partial, &m, None, model()) {
        Err(EvalError::MissingPrediction(id)) => assert_eq!(id, "000001"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(evaluate_dataset(&perfect, &m, Some(Split::Train), model()), Err(EvalError::Empty(_))));
}

fn report(dataset: &str, preset: Option<DatasetPreset>, iou: f64) -> MetricReport {
    MetricReport {
        dataset: dataset.into(),
        model: ModelIdentity { name: format!("model-{preset:?}"), train_preset: preset },
        images: vec![],
        mean: Metrics { iou, precision: iou.sqrt(), recall: 1.0 / 3.0 },
    }
}

#[test]
fn ablation_grid_order_and_roundtrip() {
    let single = ablation_report(&[report("low", Some(DatasetPreset::PerlinNoise), 0.4)]);
    assert_eq!(single.rows.len(), 1);

    let mut reports = Vec::new();
    for p in DatasetPreset::ALL.iter().rev() {
        for set in ["low_clutter", "medium_clutter", "high_clutter"] {
            reports.push(report(set, Some(*p), 0.1 * (*p as u8 as f64) + 0.0123456789));
        }
    }
    reports.push(report("low_clutter", None, 0.9));
    let table = ablation_report(&reports);
    let rows: Vec<&str> = table.rows.iter().map(|r| r.train.as_str()).collect();
    assert_eq!(rows[..6], ["A", "B", "C", "D", "E", "F"]);
    assert_eq!(table.rows.len(), 7);
    assert_eq!(table.eval_sets, ["low_clutter", "medium_clutter", "high_clutter"]);
    assert!(table.rows[6].cells[1].is_none());
    let back = AblationTable::from_csv(&table.to_csv()).unwrap();
    assert_eq!(back, table);
    assert!(table.to_text().lines().count() >= 8);
}

#[test]
fn report_csv_has_mean_rows() {
    let g = BinaryMask::from_fn(3, 3, |x, _| x == 1);
    let m = manifest(&[g.clone()]);
    let preds: HashMap<String, BinaryMask> = [("000000".into(), g)].into();
    let r = evaluate_dataset(&preds, &m, None, model()).unwrap();
    let csv = MetricReport::to_csv(&[r.clone(), r]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dataset,image_id,iou,precision,recall");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines.iter().filter(|l| l.contains(MEAN_ROW_ID)).count(), 2);
}
