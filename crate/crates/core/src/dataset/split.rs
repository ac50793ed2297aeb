use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetError, DatasetManifest, Split};

/// Assign `floor(n * train_fraction)` records to train and the rest to val,
/// chosen by a seeded shuffle. Existing split labels are overwritten.
pub fn split_dataset(
    mut manifest: DatasetManifest,
    train_fraction: f64,
    seed: u64,
) -> Result<DatasetManifest, DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = manifest.records.len();
    // The epsilon keeps 0.8 * 1000 from landing just under 800.
    let train = ((n as f64) * train_fraction + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for r in &mut manifest.records {
        r.split = Split::Val;
    }
    for &i in &order[..train] {
        manifest.records[i].split = Split::Train;
    }
    Ok(manifest)
}
