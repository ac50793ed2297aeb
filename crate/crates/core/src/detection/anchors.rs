use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::DetectionError;
use crate::render::BBox;

pub const DEFAULT_SCALES: [f64; 5] = [32.0, 64.0, 128.0, 256.0, 512.0];
pub const DEFAULT_RATIOS: [f64; 3] = [0.5, 1.0, 2.0];
pub const POS_THRESHOLD: f64 = 0.7;
pub const NEG_THRESHOLD: f64 = 0.3;
const ANCHORS_PER_POSITION: usize = 15;

/// Axis-aligned box with continuous corners; `x2 - x1` is the width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Rect {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Rect { x1, y1, x2, y2 }
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect::new(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }
}

/// An inclusive pixel box covers `[x1, x2 + 1)`.
impl From<BBox> for Rect {
    fn from(b: BBox) -> Self {
        Rect::new(b.x1 as f64, b.y1 as f64, b.x2 as f64 + 1.0, b.y2 as f64 + 1.0)
    }
}

pub fn iou_box(a: &Rect, b: &Rect) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub rect: Rect,
    pub scale: f64,
    /// width / height
    pub ratio: f64,
}

/// Anchors ordered by row, column, scale, ratio. Anchor `(i, j, s, r)` is
/// centered at `((j + 0.5) * stride, (i + 0.5) * stride)` with area `s^2`.
pub fn generate_anchors(
    dims: (usize, usize),
    stride: f64,
    scales: &[f64],
    ratios: &[f64],
) -> Result<Vec<Anchor>, DetectionError> {
    let (h, w) = dims;
    if h == 0 || w == 0 {
        return Err(DetectionError::Config(format!("feature map {h}x{w} is empty")));
    }
    if scales.len() * ratios.len() != ANCHORS_PER_POSITION {
        return Err(DetectionError::Config(format!(
            "{} scales x {} ratios gives {} anchors per position, need {ANCHORS_PER_POSITION}",
            scales.len(),
            ratios.len(),
            scales.len() * ratios.len()
        )));
    }
    if !(stride > 0.0 && stride.is_finite()) {
        return Err(DetectionError::Config(format!("stride {stride} must be positive")));
    }
    if let Some(v) = scales.iter().chain(ratios).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(DetectionError::Config(format!("non-positive scale or ratio {v}")));
    }
    let mut out = Vec::with_capacity(h * w * ANCHORS_PER_POSITION);
    for i in 0..h {
        for j in 0..w {
            let (cx, cy) = ((j as f64 + 0.5) * stride, (i as f64 + 0.5) * stride);
            for &scale in scales {
                for &ratio in ratios {
                    let s = ratio.sqrt();
                    out.push(Anchor {
                        rect: Rect::from_center(cx, cy, scale * s, scale / s),
                        scale,
                        ratio,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnchorLabel {
    Positive,
    Negative,
    Neutral,
}

/// Threshold each anchor's best IoU over the ground truth: above `pos` is
/// Positive, below `neg` is Negative. The first highest-IoU anchor of every
/// gt box is then forced Positive when that IoU is nonzero. Without ground
/// truth every anchor is Negative.
pub fn label_anchors(anchors: &[Rect], gt: &[Rect], pos: f64, neg: f64) -> Result<Vec<AnchorLabel>, DetectionError> {
    if anchors.is_empty() {
        return Err(DetectionError::Config("no anchors to label".into()));
    }
    if !(0.0 <= neg && neg < pos && pos <= 1.0) {
        return Err(DetectionError::Config(format!("need 0 <= neg < pos <= 1, got neg={neg} pos={pos}")));
    }
    if gt.is_empty() {
        return Ok(vec![AnchorLabel::Negative; anchors.len()]);
    }
    let ious: Vec<Vec<f64>> = anchors.iter().map(|a| gt.iter().map(|g| iou_box(a, g)).collect()).collect();
    let mut labels: Vec<AnchorLabel> = ious
        .iter()
        .map(|row| {
            let best = row.iter().copied().fold(0.0, f64::max);
            if best > pos {
                AnchorLabel::Positive
            } else if best < neg {
                AnchorLabel::Negative
            } else {
                AnchorLabel::Neutral
            }
        })
        .collect();
    for g in 0..gt.len() {
        let mut best = (0.0, None);
        for (a, row) in ious.iter().enumerate() {
            if row[g] > best.0 {
                best = (row[g], Some(a));
            }
        }
        if let (_, Some(a)) = best {
            labels[a] = AnchorLabel::Positive;
        }
    }
    Ok(labels)
}

/// Center offsets relative to anchor size and log size ratios.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Delta {
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
    pub dh: f64,
}

impl Delta {
    pub fn new(dx: f64, dy: f64, dw: f64, dh: f64) -> Self {
        Delta { dx, dy, dw, dh }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.dx, self.dy, self.dw, self.dh]
    }
}

fn check_positive(r: &Rect, what: &str) -> Result<(), DetectionError> {
    if r.width() > 0.0 && r.height() > 0.0 && r.width().is_finite() && r.height().is_finite() {
        Ok(())
    } else {
        Err(DetectionError::InvalidBox(format!("{what} {r:?} has non-positive size")))
    }
}

pub fn encode_deltas(anchor: &Rect, gt: &Rect) -> Result<Delta, DetectionError> {
    check_positive(anchor, "anchor")?;
    check_positive(gt, "ground truth")?;
    let (ax, ay) = anchor.center();
    let (gx, gy) = gt.center();
    let (aw, ah) = (anchor.width(), anchor.height());
    Ok(Delta {
        dx: (gx - ax) / aw,
        dy: (gy - ay) / ah,
        dw: (gt.width() / aw).ln(),
        dh: (gt.height() / ah).ln(),
    })
}

pub fn decode_deltas(anchor: &Rect, d: &Delta) -> Result<Rect, DetectionError> {
    check_positive(anchor, "anchor")?;
    let (ax, ay) = anchor.center();
    let (aw, ah) = (anchor.width(), anchor.height());
    Ok(Rect::from_center(ax + d.dx * aw, ay + d.dy * ah, aw * d.dw.exp(), ah * d.dh.exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiSamplingConfig {
    /// Regions passed onward.
    pub n: usize,
    pub positive_fraction: f64,
}

impl Default for RoiSamplingConfig {
    fn default() -> Self {
        RoiSamplingConfig {
            n: 200,
            positive_fraction: 0.33,
        }
    }
}

impl RoiSamplingConfig {
    pub fn validate(&self) -> Result<(), DetectionError> {
        if self.n == 0 {
            return Err(DetectionError::Config("N must be at least 1".into()));
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return Err(DetectionError::Config(format!(
                "positive fraction {} not in (0, 1)",
                self.positive_fraction
            )));
        }
        Ok(())
    }

    pub fn max_positives(&self) -> usize {
        (self.n as f64 * self.positive_fraction).ceil() as usize
    }
}

/// Pick up to `ceil(N * fraction)` positives and fill the rest of the `N`
/// slots with negatives. One `u64` key is drawn per candidate (positives in
/// index order, then negatives) and the smallest keys win, so the result is
/// a uniform subset determined by the generator state. Returns the chosen
/// positive indices followed by the chosen negative indices.
pub fn sample_rois(labels: &[AnchorLabel], cfg: &RoiSamplingConfig, rng: &mut impl RngCore) -> Result<Vec<usize>, DetectionError> {
    cfg.validate()?;
    let of = |want: AnchorLabel| -> Vec<usize> {
        labels.iter().enumerate().filter(|(_, &l)| l == want).map(|(i, _)| i).collect()
    };
    let (pos, neg) = (of(AnchorLabel::Positive), of(AnchorLabel::Negative));
    if pos.is_empty() && neg.is_empty() {
        return Err(DetectionError::NoCandidates);
    }
    let mut keyed = |idx: Vec<usize>| -> Vec<(u64, usize)> {
        let mut v: Vec<(u64, usize)> = idx.into_iter().map(|i| (rng.next_u64(), i)).collect();
        v.sort_unstable();
        v
    };
    let pos = keyed(pos);
    let neg = keyed(neg);
    let k = pos.len().min(cfg.max_positives()).min(cfg.n);
    let m = neg.len().min(cfg.n - k);
    Ok(pos[..k].iter().chain(&neg[..m]).map(|&(_, i)| i).collect())
}
