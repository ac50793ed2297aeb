use super::DatasetError;
use crate::render::BinaryMask;

/// A closed ring of pixel coordinates; the last vertex connects to the first.
pub type Ring = Vec<[f64; 2]>;

pub fn validate_rings(rings: &[Ring], width: u32, height: u32) -> Result<(), DatasetError> {
    for (i, ring) in rings.iter().enumerate() {
        if ring.len() < 3 {
            return Err(DatasetError::InvalidPolygon {
                ring: i,
                message: format!("ring has {} vertices, need at least 3", ring.len()),
            });
        }
        for p in ring {
            let ok = p[0].is_finite()
                && p[1].is_finite()
                && (0.0..=width as f64).contains(&p[0])
                && (0.0..=height as f64).contains(&p[1]);
            if !ok {
                return Err(DatasetError::InvalidPolygon {
                    ring: i,
                    message: format!("vertex ({}, {}) outside {width}x{height}", p[0], p[1]),
                });
            }
        }
    }
    Ok(())
}

/// x where the edge a-b crosses the horizontal line `y`.
#[inline]
pub fn edge_crossing(a: [f64; 2], b: [f64; 2], y: f64) -> f64 {
    (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]
}

/// Fill all rings together with the even-odd rule; a pixel is set iff its
/// center lies inside.
pub fn polygon_to_mask(rings: &[Ring], width: u32, height: u32) -> Result<BinaryMask, DatasetError> {
    validate_rings(rings, width, height)?;
    let mut mask = BinaryMask::new(width, height);
    let mut xs = Vec::new();
    for py in 0..height {
        let cy = py as f64 + 0.5;
        xs.clear();
        for ring in rings {
            for i in 0..ring.len() {
                let a = ring[i];
                let b = ring[(i + 1) % ring.len()];
                if (a[1] > cy) != (b[1] > cy) {
                    xs.push(edge_crossing(a, b, cy));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        // Centers in [xs[2k], xs[2k+1]) have an odd number of crossings to their right.
        for span in xs.chunks_exact(2) {
            let (lo, hi) = (span[0], span[1]);
            let mut px = ((lo - 0.5).floor() - 1.0).max(0.0) as u32;
            while px < width && (px as f64 + 0.5) < lo {
                px += 1;
            }
            while px < width && (px as f64 + 0.5) < hi {
                mask.set(px, py, true);
                px += 1;
            }
        }
    }
    Ok(mask)
}
