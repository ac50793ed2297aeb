use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::render::BinaryMask;

/// Row-major run lengths, alternating zeros and ones, starting with zeros.
/// An all-ones mask starts with an empty zero run: `[0, n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub width: u32,
    pub height: u32,
    pub counts: Vec<u32>,
}

pub fn rle_encode(mask: &BinaryMask) -> RleMask {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for &b in &mask.bits {
        if b != current {
            counts.push(run);
            current = b;
            run = 0;
        }
        run += 1;
    }
    if run > 0 || counts.is_empty() {
        counts.push(run);
    }
    RleMask {
        width: mask.width,
        height: mask.height,
        counts,
    }
}

pub fn rle_decode(rle: &RleMask) -> Result<BinaryMask, DatasetError> {
    let n = rle.width as u64 * rle.height as u64;
    let sum: u64 = rle.counts.iter().map(|&c| c as u64).sum();
    if sum != n {
        return Err(DatasetError::Corrupt(format!(
            "RLE runs sum to {sum}, expected {n} for {}x{}",
            rle.width, rle.height
        )));
    }
    if let Some(i) = rle.counts.iter().enumerate().skip(1).position(|(_, &c)| c == 0) {
        return Err(DatasetError::Corrupt(format!("zero-length RLE run at position {}", i + 1)));
    }
    let mut bits = Vec::with_capacity(n as usize);
    for (i, &c) in rle.counts.iter().enumerate() {
        bits.extend(std::iter::repeat(i % 2 == 1).take(c as usize));
    }
    Ok(BinaryMask {
        width: rle.width,
        height: rle.height,
        bits,
    })
}

impl RleMask {
    /// Number of set pixels.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }
}
