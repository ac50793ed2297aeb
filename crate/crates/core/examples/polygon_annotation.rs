//! Rasterize a hand-drawn polygon, run-length encode it and show the
//! resulting annotation record.
//!
//! cargo run -p handforge --example polygon_annotation

use handforge::dataset::{polygon_to_mask, rle_decode, rle_encode, validate_rings, Annotation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Outline of a palm with a hole between thumb and index finger.
    let rings = vec![
        vec![[4.0, 4.0], [28.0, 3.5], [30.0, 20.0], [16.0, 28.0], [3.0, 22.0]],
        vec![[12.0, 10.0], [18.0, 10.0], [15.0, 15.0]],
    ];
    validate_rings(&rings, 32, 32)?;
    let mask = polygon_to_mask(&rings, 32, 32)?;
    for y in (0..32).step_by(2) {
        let row: String = (0..32).map(|x| if mask.get(x, y) { '#' } else { '.' }).collect();
        println!("{row}");
    }
    let rle = rle_encode(&mask);
    assert_eq!(rle_decode(&rle)?, mask);
    println!("area {} in {} runs", rle.area(), rle.counts.len());

    let mut ann = Annotation::from_mask("palm", &mask);
    ann.polygons = Some(rings);
    println!("bbox {:?}", ann.bbox.map(|b| b.to_xywh()));

    // A two-point ring is rejected with its index.
    let bad = vec![vec![[0.0, 0.0], [5.0, 5.0]]];
    println!("invalid: {}", polygon_to_mask(&bad, 32, 32).unwrap_err());
    Ok(())
}
