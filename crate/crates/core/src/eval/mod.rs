//! Pixel metrics over binary masks and their aggregation into reports.

mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{
    ablation_report, evaluate_dataset, evaluate_with, AblationCell, AblationRow, AblationTable,
    ImageMetrics, MetricReport, ModelIdentity, MEAN_ROW_ID,
};

use crate::dataset::DatasetError;
use crate::render::BinaryMask;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("mask size mismatch: prediction {pred:?}, ground truth {gt:?}")]
    DimensionMismatch { pred: (u32, u32), gt: (u32, u32) },
    #[error("no prediction for image {0:?}")]
    MissingPrediction(String),
    #[error("nothing to evaluate: {0}")]
    Empty(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("csv: {0}")]
    Csv(String),
    #[error("prediction failed for image {id:?}: {message}")]
    Predict { id: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PixelConfusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<PixelConfusion, EvalError> {
    if !pred.same_size(gt) {
        return Err(EvalError::DimensionMismatch {
            pred: (pred.width, pred.height),
            gt: (gt.width, gt.height),
        });
    }
    let mut c = PixelConfusion::default();
    for (&p, &g) in pred.bits.iter().zip(&gt.bits) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            _ => {}
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
}

/// IoU, precision and recall. Both masks empty scores 1 on all three;
/// otherwise a zero denominator scores 0.
pub fn metrics(c: PixelConfusion) -> Metrics {
    if c.tp + c.fp + c.fn_ == 0 {
        return Metrics {
            iou: 1.0,
            precision: 1.0,
            recall: 1.0,
        };
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Metrics {
        iou: ratio(c.tp, c.tp + c.fp + c.fn_),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
    }
}

/// Pixel union of predicted instances; `None` when there are none.
pub fn merge_instances(instances: &[BinaryMask]) -> Option<BinaryMask> {
    let (first, rest) = instances.split_first()?;
    Some(rest.iter().fold(first.clone(), |acc, m| acc.union(m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(w: u32, set: &[(u32, u32)]) -> BinaryMask {
        let mut m = BinaryMask::new(w, w);
        for &(x, y) in set {
            m.set(x, y, true);
        }
        m
    }

    #[test]
    fn worked_examples() {
        let gt = mask(10, &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]);
        let pred = mask(10, &[(2, 0), (3, 0), (4, 0), (5, 0), (6, 0), (7, 0)]);
        let c = confusion(&pred, &gt).unwrap();
        assert_eq!(c, PixelConfusion { tp: 4, fp: 2, fn_: 2 });
        let m = metrics(c);
        assert_eq!(m.iou, 0.5);
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15 && (m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(metrics(PixelConfusion { tp: 50, fp: 0, fn_: 0 }), Metrics { iou: 1.0, precision: 1.0, recall: 1.0 });
        assert_eq!(metrics(PixelConfusion::default()), Metrics { iou: 1.0, precision: 1.0, recall: 1.0 });
        assert_eq!(metrics(PixelConfusion { tp: 0, fp: 0, fn_: 50 }), Metrics { iou: 0.0, precision: 0.0, recall: 0.0 });
        assert_eq!(metrics(PixelConfusion { tp: 0, fp: 3, fn_: 0 }).recall, 0.0);
        assert!(confusion(&BinaryMask::new(3, 3), &BinaryMask::new(3, 4)).is_err());
    }

    #[test]
    fn instances_merge_by_union() {
        let a = mask(4, &[(0, 0)]);
        let b = mask(4, &[(1, 1), (0, 0)]);
        assert_eq!(merge_instances(&[a, b]).unwrap().count(), 2);
        assert!(merge_instances(&[]).is_none());
    }
}
