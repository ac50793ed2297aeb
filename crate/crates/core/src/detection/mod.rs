//! Region-proposal and head mathematics: anchors, box IoU, anchor labeling,
//! delta coding, ROI sampling and the detector losses.

mod anchors;
mod losses;

use thiserror::Error;

pub use anchors::{
    decode_deltas, encode_deltas, generate_anchors, iou_box, label_anchors, sample_rois, Anchor,
    AnchorLabel, Delta, Rect, RoiSamplingConfig, DEFAULT_RATIOS, DEFAULT_SCALES, NEG_THRESHOLD,
    POS_THRESHOLD,
};
pub use losses::{
    cross_entropy, huber, mask_loss, total_loss, ClassVector, LossBreakdown, MaskLogits, LOG_EPS,
    MASK_SIZE,
};

#[derive(Debug, Error, PartialEq)]
pub enum DetectionError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("no candidate regions to sample from")]
    NoCandidates,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
