use serde::{Deserialize, Serialize};

use super::RenderError;
use crate::scene::{PartLabel, Rgb};

/// Row-major 8-bit RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Framebuffer {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Framebuffer {
    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        let px = color.to_u8();
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&px);
        }
        Framebuffer { width, height, pixels }
    }

    pub fn from_image(img: &image::RgbImage) -> Self {
        Framebuffer {
            width: img.width(),
            height: img.height(),
            pixels: img.as_raw().clone(),
        }
    }

    pub fn to_image(&self) -> image::RgbImage {
        image::RgbImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("framebuffer length matches dimensions")
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, px: [u8; 3]) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 3].copy_from_slice(&px);
    }

    pub fn is_valid(&self) -> bool {
        self.pixels.len() == self.width as usize * self.height as usize * 3
    }
}

/// View depth of the frontmost surface per pixel; infinity where empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthBuffer {
    pub width: u32,
    pub height: u32,
    pub depth: Vec<f64>,
}

impl DepthBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        DepthBuffer {
            width,
            height,
            depth: vec![f64::INFINITY; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.depth[y as usize * self.width as usize + x as usize]
    }
}

/// Row-major part labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceBuffer {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<PartLabel>,
}

impl InstanceBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        InstanceBuffer {
            width,
            height,
            labels: vec![PartLabel::Background; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> PartLabel {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self, label: PartLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryMask { width, height, bits }
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_size(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Pixelwise OR. Panics on a size mismatch.
    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        assert!(self.same_size(other), "mask size mismatch");
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    /// Grayscale image, 255 for set bits.
    pub fn to_image(&self) -> image::GrayImage {
        let raw = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        image::GrayImage::from_raw(self.width, self.height, raw).expect("mask length matches dimensions")
    }

    /// Any nonzero luma counts as set.
    pub fn from_image(img: &image::GrayImage) -> Self {
        BinaryMask {
            width: img.width(),
            height: img.height(),
            bits: img.as_raw().iter().map(|&v| v > 0).collect(),
        }
    }
}

/// Inclusive pixel corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl BBox {
    pub fn width(&self) -> u32 {
        self.x2 - self.x1 + 1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1 + 1
    }

    /// `[x, y, w, h]` as stored in annotation files.
    pub fn to_xywh(&self) -> [u32; 4] {
        [self.x1, self.y1, self.width(), self.height()]
    }

    pub fn from_xywh([x, y, w, h]: [u32; 4]) -> Option<BBox> {
        if w == 0 || h == 0 {
            return None;
        }
        Some(BBox {
            x1: x,
            y1: y,
            x2: x + w - 1,
            y2: y + h - 1,
        })
    }
}

pub fn mask_from_instance(instance: &InstanceBuffer, target: PartLabel) -> BinaryMask {
    BinaryMask {
        width: instance.width,
        height: instance.height,
        bits: instance.labels.iter().map(|&l| l == target).collect(),
    }
}

/// Tight box over the set bits; `None` for an empty mask.
pub fn bbox_from_mask(mask: &BinaryMask) -> Option<BBox> {
    let mut bb: Option<BBox> = None;
    for y in 0..mask.height {
        for x in 0..mask.width {
            if !mask.get(x, y) {
                continue;
            }
            bb = Some(match bb {
                None => BBox { x1: x, y1: y, x2: x, y2: y },
                Some(b) => BBox {
                    x1: b.x1.min(x),
                    y1: b.y1.min(y),
                    x2: b.x2.max(x),
                    y2: b.y2.max(y),
                },
            });
        }
    }
    bb
}

/// Replace background-labeled pixels of `foreground` with `background`.
pub fn composite_over(
    foreground: &Framebuffer,
    instance: &InstanceBuffer,
    background: &Framebuffer,
) -> Result<Framebuffer, RenderError> {
    let dims = (foreground.width, foreground.height);
    if (instance.width, instance.height) != dims || (background.width, background.height) != dims {
        return Err(RenderError::DimensionMismatch {
            expected: dims,
            actual: (background.width, background.height),
        });
    }
    let mut out = foreground.clone();
    for (i, &label) in instance.labels.iter().enumerate() {
        if label == PartLabel::Background {
            out.pixels[3 * i..3 * i + 3].copy_from_slice(&background.pixels[3 * i..3 * i + 3]);
        }
    }
    Ok(out)
}
