//! On-disk datasets: `images/NNNNNN.png` plus one `annotations.json`.

mod generate;
mod manifest;
mod polygon;
mod rle;
mod split;

use std::path::PathBuf;

use thiserror::Error;

pub use generate::{generate_dataset, image_id, GenerateOptions};
pub use manifest::{
    Annotation, DatasetManifest, Provenance, Record, Split, ANNOTATIONS_FILE, CATEGORY, FORMAT_VERSION,
};
pub use polygon::{edge_crossing, polygon_to_mask, validate_rings, Ring};
pub use rle::{rle_decode, rle_encode, RleMask};
pub use split::split_dataset;

use crate::randomizer::ConfigError;
use crate::render::RenderError;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
    #[error("corrupt annotation: {0}")]
    Corrupt(String),
    #[error("image {id}: missing file {}", path.display())]
    MissingImage { id: String, path: PathBuf },
    #[error("invalid polygon (ring {ring}): {message}")]
    InvalidPolygon { ring: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Render(#[from] RenderError),
}
