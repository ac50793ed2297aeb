//! Region-proposal arithmetic on one feature map: the anchor grid, IoU
//! labeling, box deltas, ROI sampling and the five losses.
//!
//! cargo run -p handforge --example anchor_math

use handforge::detection::{
    cross_entropy, decode_deltas, encode_deltas, generate_anchors, huber, label_anchors, sample_rois, total_loss,
    AnchorLabel, ClassVector, LossBreakdown, Rect, RoiSamplingConfig, DEFAULT_RATIOS, DEFAULT_SCALES,
    NEG_THRESHOLD, POS_THRESHOLD,
};
use rand::SeedableRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 640x480 image, stride-16 feature map.
    let anchors = generate_anchors((30, 40), 16.0, &DEFAULT_SCALES, &DEFAULT_RATIOS)?;
    println!("{} anchors ({} per position)", anchors.len(), anchors.len() / (30 * 40));

    let hand = Rect::new(250.0, 180.0, 390.0, 300.0);
    let rects: Vec<Rect> = anchors.iter().map(|a| a.rect).collect();
    let labels = label_anchors(&rects, &[hand], POS_THRESHOLD, NEG_THRESHOLD)?;
    let count = |l| labels.iter().filter(|&&x| x == l).count();
    println!(
        "labels: {} positive, {} negative, {} neutral",
        count(AnchorLabel::Positive),
        count(AnchorLabel::Negative),
        count(AnchorLabel::Neutral)
    );

    let best = labels.iter().position(|&l| l == AnchorLabel::Positive).unwrap();
    let delta = encode_deltas(&rects[best], &hand)?;
    let back = decode_deltas(&rects[best], &delta)?;
    println!("anchor {:?}\n  delta {:?}\n  decoded {:?}", rects[best], delta, back);

    let cfg = RoiSamplingConfig { n: 64, positive_fraction: 0.25 };
    let rois = sample_rois(&labels, &cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0))?;
    let pos = rois.iter().filter(|&&i| labels[i] == AnchorLabel::Positive).count();
    println!("sampled {} rois, {pos} positive (cap {})", rois.len(), cfg.max_positives());

    let y = ClassVector::one_hot(2, 1);
    let losses = LossBreakdown {
        rpn_class_loss: cross_entropy(&y, &ClassVector(vec![0.2, 0.8])),
        rpn_bbox_loss: huber(&delta, &Default::default()),
        mrcnn_class_loss: cross_entropy(&y, &ClassVector(vec![0.5, 0.5])),
        mrcnn_bbox_loss: 0.0,
        mrcnn_mask_loss: 0.1,
    };
    println!("{losses:?}\ntotal {:.6}", total_loss(&losses));
    Ok(())
}
