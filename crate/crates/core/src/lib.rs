//! handforge: synthetic training data and evaluation tooling for egocentric
//! robot-hand segmentation.
//!
//! The crate is split along the data path:
//!
//! - [`scene`]: primitive meshes, the articulated hand/arm model, camera
//!   projection and OBJ import.
//! - [`randomizer`]: seeded sampling of whole scenes for the six cumulative
//!   dataset presets (A..F), including Perlin backgrounds.
//! - [`render`]: a deterministic z-buffered software rasterizer producing
//!   RGB, depth and part-label buffers, plus mask/bbox extraction.
//! - [`dataset`]: on-disk manifests, RLE masks, polygon rasterization,
//!   splitting and whole-dataset generation.
//! - [`detection`]: anchor grids, box IoU, anchor labeling, delta coding,
//!   ROI sampling and the five detector losses.
//! - [`eval`]: pixel confusion, IoU/precision/recall and report tables.
//! - [`trainer`]: the trainable-model contract, early stopping, learning-rate
//!   line search and a small per-pixel reference segmenter.

pub mod dataset;
pub mod detection;
pub mod eval;
pub mod randomizer;
pub mod render;
pub mod scene;
pub mod trainer;

pub use randomizer::{DatasetPreset, RandomizationConfig, SceneDescription, SceneSampler};
pub use render::{BBox, BinaryMask, Framebuffer, InstanceBuffer, Renderer};
pub use scene::{Camera, HandPose, JointLimits, PartLabel, Pose, Rgb, TriangleMesh, Vec3};
