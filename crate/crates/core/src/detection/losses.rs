use serde::{Deserialize, Serialize};

use super::{Delta, DetectionError};
use crate::render::BinaryMask;

/// Lower clamp applied to probabilities before taking logs.
pub const LOG_EPS: f64 = 1e-12;
pub const MASK_SIZE: usize = 28;

/// Class probabilities or a one-hot truth vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVector(pub Vec<f64>);

impl ClassVector {
    pub fn one_hot(classes: usize, class: usize) -> Self {
        let mut v = vec![0.0; classes];
        v[class] = 1.0;
        ClassVector(v)
    }

    /// Probabilities in [0, 1] summing to 1 within 1e-9.
    pub fn probabilities(p: Vec<f64>) -> Result<Self, DetectionError> {
        let sum: f64 = p.iter().sum();
        if p.is_empty() || p.iter().any(|v| !(0.0..=1.0).contains(v)) || (sum - 1.0).abs() > 1e-9 {
            return Err(DetectionError::Config(format!("{p:?} is not a probability vector")));
        }
        Ok(ClassVector(p))
    }
}

/// `-sum y_i ln(max(yhat_i, eps))`; terms with `y_i == 0` contribute nothing.
pub fn cross_entropy(y: &ClassVector, y_hat: &ClassVector) -> f64 {
    y.0.iter()
        .zip(&y_hat.0)
        .filter(|(&t, _)| t != 0.0)
        .map(|(&t, &p)| -t * p.clamp(LOG_EPS, 1.0).ln())
        .sum::<f64>()
        .max(0.0)
}

/// Elementwise smooth-L1 summed over the four components.
pub fn huber(z: &Delta, z_hat: &Delta) -> f64 {
    z.to_array()
        .iter()
        .zip(z_hat.to_array())
        .map(|(a, b)| {
            let d = (a - b).abs();
            if d < 1.0 {
                0.5 * d * d
            } else {
                d - 0.5
            }
        })
        .sum()
}

/// 28x28 per-class probabilities, class-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskLogits {
    pub classes: usize,
    pub data: Vec<f64>,
}

impl MaskLogits {
    pub fn new(classes: usize, data: Vec<f64>) -> Result<Self, DetectionError> {
        if data.len() != classes * MASK_SIZE * MASK_SIZE {
            return Err(DetectionError::DimensionMismatch(format!(
                "{} values for {classes} classes of {MASK_SIZE}x{MASK_SIZE}",
                data.len()
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(DetectionError::Config("mask probabilities must lie in [0, 1]".into()));
        }
        Ok(MaskLogits { classes, data })
    }

    pub fn channel(&self, class: usize) -> &[f64] {
        let n = MASK_SIZE * MASK_SIZE;
        &self.data[class * n..(class + 1) * n]
    }
}

/// Mean binary cross-entropy over the 784 cells of the foreground channel
/// (class 1) against `gt`.
pub fn mask_loss(pred: &MaskLogits, gt: &BinaryMask) -> Result<f64, DetectionError> {
    if gt.width as usize != MASK_SIZE || gt.height as usize != MASK_SIZE {
        return Err(DetectionError::DimensionMismatch(format!(
            "ground truth is {}x{}, expected {MASK_SIZE}x{MASK_SIZE}",
            gt.width, gt.height
        )));
    }
    if pred.classes < 2 {
        return Err(DetectionError::DimensionMismatch("mask needs a foreground channel".into()));
    }
    let fg = pred.channel(1);
    let sum: f64 = fg
        .iter()
        .zip(&gt.bits)
        .map(|(&p, &t)| {
            if t {
                -p.max(LOG_EPS).ln()
            } else {
                -(1.0 - p).max(LOG_EPS).ln()
            }
        })
        .sum();
    Ok(sum / fg.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub rpn_class_loss: f64,
    pub rpn_bbox_loss: f64,
    pub mrcnn_class_loss: f64,
    pub mrcnn_bbox_loss: f64,
    pub mrcnn_mask_loss: f64,
}

impl LossBreakdown {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.rpn_class_loss,
            self.rpn_bbox_loss,
            self.mrcnn_class_loss,
            self.mrcnn_bbox_loss,
            self.mrcnn_mask_loss,
        ]
    }
}

/// Unweighted sum of the five terms.
pub fn total_loss(b: &LossBreakdown) -> f64 {
    b.as_array().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_examples() {
        let y = ClassVector::one_hot(2, 1);
        let p = ClassVector::probabilities(vec![0.2, 0.8]).unwrap();
        assert!((cross_entropy(&y, &p) - 0.223144).abs() < 1e-6);
        let half = ClassVector(vec![0.5, 0.5]);
        assert!((cross_entropy(&y, &half) - 2f64.ln()).abs() < 1e-12);
        assert_eq!(cross_entropy(&ClassVector::one_hot(2, 0), &ClassVector(vec![1.0, 0.0])), 0.0);
        let wrong = cross_entropy(&ClassVector::one_hot(2, 0), &ClassVector(vec![0.0, 1.0]));
        assert!((wrong - (-LOG_EPS.ln())).abs() < 1e-9);
    }

    #[test]
    fn huber_examples() {
        let z = Delta::default();
        assert_eq!(huber(&Delta::new(0.5, 0.0, 0.0, 0.0), &z), 0.125);
        assert_eq!(huber(&Delta::new(2.0, 0.0, 0.0, 0.0), &z), 1.5);
        assert_eq!(huber(&Delta::new(1.0, 0.0, 0.0, 0.0), &z), 0.5);
        assert_eq!(huber(&Delta::new(-2.0, 0.5, 0.0, 0.0), &z), 1.625);
    }

    #[test]
    fn mask_loss_examples() {
        let gt = BinaryMask::from_fn(28, 28, |x, y| (x * y) % 3 == 0);
        let mut data = vec![0.0; 2 * 784];
        for (i, &b) in gt.bits.iter().enumerate() {
            data[784 + i] = if b { 1.0 } else { 0.0 };
            data[i] = 1.0 - data[784 + i];
        }
        let exact = MaskLogits::new(2, data).unwrap();
        assert_eq!(mask_loss(&exact, &gt).unwrap(), 0.0);
        let uniform = MaskLogits::new(2, vec![0.5; 2 * 784]).unwrap();
        assert!((mask_loss(&uniform, &gt).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(mask_loss(&uniform, &BinaryMask::new(27, 28)).is_err());
        assert!(MaskLogits::new(2, vec![0.5; 10]).is_err());
    }

    #[test]
    fn total_is_plain_sum() {
        assert_eq!(total_loss(&LossBreakdown::default()), 0.0);
        let ones = LossBreakdown {
            rpn_class_loss: 1.0,
            rpn_bbox_loss: 1.0,
            mrcnn_class_loss: 1.0,
            mrcnn_bbox_loss: 1.0,
            mrcnn_mask_loss: 1.0,
        };
        assert_eq!(total_loss(&ones), 5.0);
    }
}
