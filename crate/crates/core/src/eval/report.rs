use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{confusion, metrics, EvalError, Metrics};
use crate::dataset::{DatasetManifest, Record, Split};
use crate::randomizer::DatasetPreset;
use crate::render::BinaryMask;

/// `image_id` of the per-dataset mean row in CSV output.
pub const MEAN_ROW_ID: &str = "__mean__";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelIdentity {
    pub name: String,
    pub train_preset: Option<DatasetPreset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub image_id: String,
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub model: ModelIdentity,
    /// Sorted by image id.
    pub images: Vec<ImageMetrics>,
    pub mean: Metrics,
}

fn selected<'a>(manifest: &'a DatasetManifest, split: Option<Split>) -> Vec<&'a Record> {
    let mut v: Vec<&Record> = manifest.records.iter().filter(|r| split.is_none_or(|s| r.split == s)).collect();
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

/// Score each selected record with a mask produced on demand. Records are
/// visited in image-id order.
pub fn evaluate_with(
    manifest: &DatasetManifest,
    split: Option<Split>,
    model: ModelIdentity,
    mut predict: impl FnMut(&Record) -> Result<BinaryMask, EvalError>,
) -> Result<MetricReport, EvalError> {
    let records = selected(manifest, split);
    if records.is_empty() {
        return Err(EvalError::Empty(format!(
            "{} has no records{}",
            manifest.name,
            split.map(|s| format!(" in split {s}")).unwrap_or_default()
        )));
    }
    let mut images = Vec::with_capacity(records.len());
    for r in records {
        let gt = r.annotation.decode_mask()?;
        let pred = predict(r)?;
        let m = metrics(confusion(&pred, &gt)?);
        images.push(ImageMetrics {
            image_id: r.id.clone(),
            iou: m.iou,
            precision: m.precision,
            recall: m.recall,
        });
    }
    let n = images.len() as f64;
    let mean = Metrics {
        iou: images.iter().map(|m| m.iou).sum::<f64>() / n,
        precision: images.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: images.iter().map(|m| m.recall).sum::<f64>() / n,
    };
    Ok(MetricReport {
        dataset: manifest.name.clone(),
        model,
        images,
        mean,
    })
}

/// Score precomputed masks keyed by image id.
pub fn evaluate_dataset(
    predictions: &HashMap<String, BinaryMask>,
    manifest: &DatasetManifest,
    split: Option<Split>,
    model: ModelIdentity,
) -> Result<MetricReport, EvalError> {
    evaluate_with(manifest, split, model, |r| {
        predictions
            .get(&r.id)
            .cloned()
            .ok_or_else(|| EvalError::MissingPrediction(r.id.clone()))
    })
}

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

impl MetricReport {
    /// Columns `dataset,image_id,iou,precision,recall`; the mean row uses
    /// [`MEAN_ROW_ID`] as its image id.
    pub fn to_csv(reports: &[MetricReport]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["dataset", "image_id", "iou", "precision", "recall"]).unwrap();
        for r in reports {
            for m in &r.images {
                w.write_record([&r.dataset, &m.image_id, &fmt_f(m.iou), &fmt_f(m.precision), &fmt_f(m.recall)])
                    .unwrap();
            }
            w.write_record([
                &r.dataset,
                MEAN_ROW_ID,
                &fmt_f(r.mean.iou),
                &fmt_f(r.mean.precision),
                &fmt_f(r.mean.recall),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let preset = self.model.train_preset.map(|p| format!(" (trained on {p})")).unwrap_or_default();
        writeln!(s, "model {}{preset} on {}: {} images", self.model.name, self.dataset, self.images.len()).unwrap();
        writeln!(s, "{:<12} {:>8} {:>9} {:>8}", "image", "iou", "precision", "recall").unwrap();
        for m in &self.images {
            writeln!(s, "{:<12} {:>8.4} {:>9.4} {:>8.4}", m.image_id, m.iou, m.precision, m.recall).unwrap();
        }
        writeln!(s, "{:<12} {:>8.4} {:>9.4} {:>8.4}", "mean", self.mean.iou, self.mean.precision, self.mean.recall)
            .unwrap();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub mean: Metrics,
    pub images: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// Training preset letter, or the model name when it has none.
    pub train: String,
    /// One cell per evaluation set, in [`AblationTable::eval_sets`] order.
    pub cells: Vec<Option<AblationCell>>,
}

/// Training preset x evaluation set grid of mean metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub eval_sets: Vec<String>,
    pub rows: Vec<AblationRow>,
}

/// Rows are ordered A to F, then models without a preset by name; columns
/// keep first-seen order. A later report for the same cell replaces an
/// earlier one.
pub fn ablation_report(reports: &[MetricReport]) -> AblationTable {
    let mut eval_sets: Vec<String> = Vec::new();
    for r in reports {
        if !eval_sets.contains(&r.dataset) {
            eval_sets.push(r.dataset.clone());
        }
    }
    let key = |m: &ModelIdentity| match m.train_preset {
        Some(p) => (0u8, p as u8, p.letter().to_string()),
        None => (1u8, 0, m.name.clone()),
    };
    let mut grid: BTreeMap<(u8, u8, String), Vec<Option<AblationCell>>> = BTreeMap::new();
    for r in reports {
        let row = grid.entry(key(&r.model)).or_insert_with(|| vec![None; eval_sets.len()]);
        let col = eval_sets.iter().position(|d| d == &r.dataset).unwrap();
        row[col] = Some(AblationCell {
            mean: r.mean,
            images: r.images.len(),
        });
    }
    AblationTable {
        eval_sets,
        rows: grid.into_iter().map(|((_, _, train), cells)| AblationRow { train, cells }).collect(),
    }
}

impl AblationTable {
    /// Long format: `train,eval_set,images,iou,precision,recall`, one line
    /// per filled cell.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["train", "eval_set", "images", "iou", "precision", "recall"]).unwrap();
        for row in &self.rows {
            for (set, cell) in self.eval_sets.iter().zip(&row.cells) {
                if let Some(c) = cell {
                    w.write_record([
                        &row.train,
                        set,
                        &c.images.to_string(),
                        &fmt_f(c.mean.iou),
                        &fmt_f(c.mean.precision),
                        &fmt_f(c.mean.recall),
                    ])
                    .unwrap();
                }
            }
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn from_csv(text: &str) -> Result<AblationTable, EvalError> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let mut eval_sets: Vec<String> = Vec::new();
        let mut rows: Vec<(String, Vec<(String, AblationCell)>)> = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| EvalError::Csv(e.to_string()))?;
            if rec.len() != 6 {
                return Err(EvalError::Csv(format!("expected 6 fields, got {}", rec.len())));
            }
            let num = |i: usize| rec[i].parse::<f64>().map_err(|e| EvalError::Csv(format!("{:?}: {e}", &rec[i])));
            let cell = AblationCell {
                images: rec[2].parse().map_err(|e| EvalError::Csv(format!("{:?}: {e}", &rec[2])))?,
                mean: Metrics {
                    iou: num(3)?,
                    precision: num(4)?,
                    recall: num(5)?,
                },
            };
            if !eval_sets.iter().any(|s| s == &rec[1]) {
                eval_sets.push(rec[1].to_string());
            }
            match rows.iter_mut().find(|(t, _)| t == &rec[0]) {
                Some((_, cells)) => cells.push((rec[1].to_string(), cell)),
                None => rows.push((rec[0].to_string(), vec![(rec[1].to_string(), cell)])),
            }
        }
        let rows = rows
            .into_iter()
            .map(|(train, cells)| AblationRow {
                cells: eval_sets
                    .iter()
                    .map(|s| cells.iter().find(|(d, _)| d == s).map(|(_, c)| c.clone()))
                    .collect(),
                train,
            })
            .collect();
        Ok(AblationTable { eval_sets, rows })
    }

    /// Grid of `iou/precision/recall` cells; `-` marks a missing cell.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        write!(s, "{:<8}", "train").unwrap();
        for set in &self.eval_sets {
            write!(s, " {:>22}", set).unwrap();
        }
        s.push('\n');
        for row in &self.rows {
            write!(s, "{:<8}", row.train).unwrap();
            for cell in &row.cells {
                let txt = match cell {
                    Some(c) => format!("{:.3}/{:.3}/{:.3}", c.mean.iou, c.mean.precision, c.mean.recall),
                    None => "-".into(),
                };
                write!(s, " {txt:>22}").unwrap();
            }
            s.push('\n');
        }
        s.push_str("cells: iou/precision/recall\n");
        s
    }
}
