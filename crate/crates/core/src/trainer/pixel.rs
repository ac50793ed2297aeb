use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FreezeSpec, TrainError, TrainableModel, WeightSource};
use crate::dataset::{DatasetManifest, Split};
use crate::detection::LossBreakdown;
use crate::render::BinaryMask;

/// r, g, b, x, y and local intensity spread, each mapped to [-1, 1].
pub const BASE_FEATURES: usize = 6;
const EXPANDED: usize = BASE_FEATURES + BASE_FEATURES * (BASE_FEATURES + 1) / 2;
/// Expanded weights followed by one bias.
pub const PARAMS: usize = EXPANDED + 1;
const BIAS: usize = EXPANDED;

/// Population standard deviation of mean-channel intensity over the 3x3
/// neighborhood of `(x, y)`, clipped to the image.
pub fn intensity_std3(intensity: &[f32], width: u32, height: u32, x: u32, y: u32) -> f64 {
    let (mut s, mut s2, mut n) = (0.0f64, 0.0f64, 0.0f64);
    for yy in y.saturating_sub(1)..=(y + 1).min(height - 1) {
        let row = yy as usize * width as usize;
        for xx in x.saturating_sub(1)..=(x + 1).min(width - 1) {
            let v = intensity[row + xx as usize] as f64;
            s += v;
            s2 += v * v;
            n += 1.0;
        }
    }
    let mean = s / n;
    (s2 / n - mean * mean).max(0.0).sqrt()
}

fn intensities(img: &image::RgbImage) -> Vec<f32> {
    img.pixels()
        .map(|p| (p[0] as f32 + p[1] as f32 + p[2] as f32) / (3.0 * 255.0))
        .collect()
}

fn pixel_base(img: &image::RgbImage, intensity: &[f32], x: u32, y: u32) -> [f32; BASE_FEATURES] {
    let (w, h) = img.dimensions();
    let p = img.get_pixel(x, y);
    let c = |v: f64| (2.0 * v - 1.0) as f32;
    [
        c(p[0] as f64 / 255.0),
        c(p[1] as f64 / 255.0),
        c(p[2] as f64 / 255.0),
        c((x as f64 + 0.5) / w as f64),
        c((y as f64 + 0.5) / h as f64),
        c((4.0 * intensity_std3(intensity, w, h, x, y)).min(1.0)),
    ]
}

/// Base features of every pixel, row-major.
pub fn base_features(img: &image::RgbImage) -> Vec<[f32; BASE_FEATURES]> {
    let intensity = intensities(img);
    let (w, h) = img.dimensions();
    let mut out = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            out.push(pixel_base(img, &intensity, x, y));
        }
    }
    out
}

/// Linear terms then all pairwise products `f_i * f_j` for `i <= j`.
pub fn expand_features(base: &[f32; BASE_FEATURES]) -> [f64; EXPANDED] {
    let mut out = [0.0; EXPANDED];
    let f = base.map(|v| v as f64);
    out[..BASE_FEATURES].copy_from_slice(&f);
    let mut k = BASE_FEATURES;
    for i in 0..BASE_FEATURES {
        for j in i..BASE_FEATURES {
            out[k] = f[i] * f[j];
            k += 1;
        }
    }
    out
}

#[inline]
fn logit(params: &[f64], phi: &[f64; EXPANDED]) -> f64 {
    let mut z = params[BIAS];
    for (w, x) in params[..EXPANDED].iter().zip(phi) {
        z += w * x;
    }
    z
}

/// `softplus(z) - y z`, the binary cross-entropy of `sigmoid(z)`.
#[inline]
fn bce_logit(z: f64, y: bool) -> f64 {
    let sp = z.max(0.0) + (-z.abs()).exp().ln_1p();
    if y {
        sp - z
    } else {
        sp
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Sampled pixels with labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PixelSet {
    pub features: Vec<[f32; BASE_FEATURES]>,
    pub labels: Vec<bool>,
}

impl PixelSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn extend(&mut self, other: PixelSet) {
        self.features.extend(other.features);
        self.labels.extend(other.labels);
    }

    /// `per_image` pixels drawn uniformly with replacement; the stream for
    /// image `index` depends only on `(seed, index)`.
    pub fn sample_image(img: &image::RgbImage, mask: &BinaryMask, per_image: usize, seed: u64, index: u64) -> PixelSet {
        let intensity = intensities(img);
        let (w, h) = img.dimensions();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut set = PixelSet::default();
        for _ in 0..per_image {
            let (x, y) = (rng.gen_range(0..w), rng.gen_range(0..h));
            set.features.push(pixel_base(img, &intensity, x, y));
            set.labels.push(mask.get(x, y));
        }
        set
    }

    /// Sample every record of `split` (all records when `None`).
    pub fn from_manifest(
        manifest: &DatasetManifest,
        split: Option<Split>,
        per_image: usize,
        seed: u64,
    ) -> Result<PixelSet, TrainError> {
        let mut records: Vec<_> = manifest
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| split.is_none_or(|s| r.split == s))
            .collect();
        records.sort_by(|a, b| a.1.id.cmp(&b.1.id));
        if records.is_empty() {
            return Err(TrainError::Data(format!("{} has no records for this split", manifest.name)));
        }
        let parts: Vec<PixelSet> = records
            .par_iter()
            .map(|(i, r)| {
                let img = manifest.load_image(r).map_err(|e| TrainError::Data(e.to_string()))?;
                let mask = r.annotation.decode_mask().map_err(|e| TrainError::Data(e.to_string()))?;
                if img.dimensions() != (mask.width, mask.height) {
                    return Err(TrainError::Data(format!("{}: image and mask sizes differ", r.id)));
                }
                Ok(PixelSet::sample_image(&img, &mask, per_image, seed, *i as u64))
            })
            .collect::<Result<_, TrainError>>()?;
        let mut out = PixelSet::default();
        for p in parts {
            out.extend(p);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmenterSettings {
    pub batch_size: usize,
    pub momentum: f64,
    /// Seeds the per-epoch sample order.
    pub shuffle_seed: u64,
    pub threshold: f64,
}

impl Default for SegmenterSettings {
    fn default() -> Self {
        SegmenterSettings {
            batch_size: 32,
            momentum: 0.9,
            shuffle_seed: 0,
            threshold: 0.5,
        }
    }
}

/// Logistic regression on quadratic expansions of per-pixel features,
/// trained with momentum SGD. Its only loss term is reported as
/// `mrcnn_mask_loss`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSegmenter {
    params: Vec<f64>,
    velocity: Vec<f64>,
    frozen: BTreeSet<String>,
    epochs_run: u64,
    pub settings: SegmenterSettings,
}

pub const GROUPS: [&str; 2] = ["weights", "bias"];

impl PixelSegmenter {
    pub fn new(settings: SegmenterSettings, seed: u64) -> Self {
        let mut m = PixelSegmenter {
            params: vec![0.0; PARAMS],
            velocity: vec![0.0; PARAMS],
            frozen: BTreeSet::new(),
            epochs_run: 0,
            settings,
        };
        m.initialize(WeightSource::Fresh { seed }).expect("fresh init cannot fail");
        m
    }

    pub const NAME: &'static str = "pixel-segmenter";

    pub fn frozen_groups(&self) -> &BTreeSet<String> {
        &self.frozen
    }

    fn is_frozen(&self, index: usize) -> bool {
        let group = if index == BIAS { "bias" } else { "weights" };
        self.frozen.contains(group)
    }

    /// Mean loss and its gradient with respect to `params` over a batch.
    pub fn loss_and_grad(params: &[f64], features: &[[f32; BASE_FEATURES]], labels: &[bool]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; PARAMS];
        let mut loss = 0.0;
        for (f, &y) in features.iter().zip(labels) {
            let phi = expand_features(f);
            let z = logit(params, &phi);
            loss += bce_logit(z, y);
            let r = sigmoid(z) - if y { 1.0 } else { 0.0 };
            for (g, x) in grad[..EXPANDED].iter_mut().zip(&phi) {
                *g += r * x;
            }
            grad[BIAS] += r;
        }
        let n = labels.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }

    /// Mean loss of `params` over a set.
    pub fn loss(params: &[f64], data: &PixelSet) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let sum: f64 = data
            .features
            .iter()
            .zip(&data.labels)
            .map(|(f, &y)| bce_logit(logit(params, &expand_features(f)), y))
            .sum();
        sum / data.len() as f64
    }

    /// Per-pixel foreground probability.
    pub fn probabilities(&self, img: &image::RgbImage) -> Vec<f64> {
        base_features(img)
            .iter()
            .map(|f| sigmoid(logit(&self.params, &expand_features(f))))
            .collect()
    }
}

impl Default for PixelSegmenter {
    fn default() -> Self {
        PixelSegmenter::new(SegmenterSettings::default(), 0)
    }
}

fn breakdown(mask_loss: f64) -> LossBreakdown {
    LossBreakdown {
        mrcnn_mask_loss: mask_loss,
        ..LossBreakdown::default()
    }
}

impl TrainableModel for PixelSegmenter {
    type Data = PixelSet;
    type Input = image::RgbImage;

    fn initialize(&mut self, source: WeightSource<'_>) -> Result<(), TrainError> {
        match source {
            WeightSource::Fresh { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for p in &mut self.params[..EXPANDED] {
                    *p = rng.gen_range(-0.01..0.01);
                }
                self.params[BIAS] = 0.0;
            }
            WeightSource::Checkpoint(c) => self.set_parameters(&c.parameters)?,
        }
        self.velocity.fill(0.0);
        self.epochs_run = 0;
        Ok(())
    }

    fn train_epoch(&mut self, data: &PixelSet, lr: f64) -> Result<LossBreakdown, TrainError> {
        if data.is_empty() {
            return Err(TrainError::Data("empty training set".into()));
        }
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(TrainError::Config(format!("learning rate {lr} must be finite and >= 0")));
        }
        let bs = self.settings.batch_size.max(1);
        let mut order: Vec<u32> = (0..data.len() as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.shuffle_seed);
        rng.set_stream(self.epochs_run);
        order.shuffle(&mut rng);
        self.epochs_run += 1;

        let frozen: Vec<bool> = (0..PARAMS).map(|i| self.is_frozen(i)).collect();
        let mu = self.settings.momentum;
        let mut total = 0.0;
        let mut feats = Vec::with_capacity(bs);
        let mut labels = Vec::with_capacity(bs);
        for chunk in order.chunks(bs) {
            feats.clear();
            labels.clear();
            for &i in chunk {
                feats.push(data.features[i as usize]);
                labels.push(data.labels[i as usize]);
            }
            let (loss, grad) = Self::loss_and_grad(&self.params, &feats, &labels);
            total += loss * chunk.len() as f64;
            for i in 0..PARAMS {
                if frozen[i] {
                    continue;
                }
                self.velocity[i] = mu * self.velocity[i] - lr * grad[i];
                self.params[i] += self.velocity[i];
            }
        }
        if !self.params.iter().all(|p| p.is_finite()) {
            return Err(TrainError::Model("parameters diverged".into()));
        }
        Ok(breakdown(total / data.len() as f64))
    }

    fn validation_loss(&self, data: &PixelSet) -> Result<LossBreakdown, TrainError> {
        if data.is_empty() {
            return Err(TrainError::Data("empty validation set".into()));
        }
        Ok(breakdown(Self::loss(&self.params, data)))
    }

    fn predict(&self, img: &image::RgbImage) -> BinaryMask {
        let (w, h) = img.dimensions();
        let t = self.settings.threshold;
        let probs = self.probabilities(img);
        BinaryMask {
            width: w,
            height: h,
            bits: probs.into_iter().map(|p| p > t).collect(),
        }
    }

    fn parameters(&self) -> Vec<f64> {
        self.params.clone()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<(), TrainError> {
        if params.len() != PARAMS {
            return Err(TrainError::Checkpoint(format!("expected {PARAMS} parameters, got {}", params.len())));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn freeze(&mut self, spec: &FreezeSpec) -> Result<(), TrainError> {
        if let Some(g) = spec.groups.iter().find(|g| !GROUPS.contains(&g.as_str())) {
            return Err(TrainError::UnknownGroup(g.clone()));
        }
        self.frozen.extend(spec.groups.iter().cloned());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_layout() {
        let phi = expand_features(&[1.0, 2.0, 3.0, 0.0, 0.0, -1.0]);
        assert_eq!(phi.len(), 27);
        assert_eq!(&phi[..6], &[1.0, 2.0, 3.0, 0.0, 0.0, -1.0]);
        assert_eq!(phi[6], 1.0);
        assert_eq!(phi[7], 2.0);
        assert_eq!(phi[26], 1.0);
    }

    #[test]
    fn stable_loss_extremes() {
        assert!((bce_logit(0.0, true) - 2f64.ln()).abs() < 1e-15);
        assert!(bce_logit(800.0, true) < 1e-300);
        assert!((bce_logit(-800.0, true) - 800.0).abs() < 1e-9);
        assert_eq!(sigmoid(-800.0), 0.0);
    }

    #[test]
    fn std_of_flat_and_checker() {
        let flat = vec![0.5f32; 9];
        assert_eq!(intensity_std3(&flat, 3, 3, 1, 1), 0.0);
        let checker: Vec<f32> = (0..9).map(|i| (i % 2) as f32).collect();
        let s = intensity_std3(&checker, 3, 3, 1, 1);
        let mean = 4.0 / 9.0;
        assert!((s - (mean - mean * mean as f64).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn unknown_group_rejected() {
        let mut m = PixelSegmenter::default();
        assert!(matches!(m.freeze(&FreezeSpec::groups(["backbone"])), Err(TrainError::UnknownGroup(_))));
    }
}
