//! Software rasterizer producing color, depth and part-label buffers.

mod buffers;
mod raster;

use std::path::PathBuf;

use thiserror::Error;

pub use buffers::{
    bbox_from_mask, composite_over, mask_from_instance, BBox, BinaryMask, DepthBuffer, Framebuffer,
    InstanceBuffer,
};
pub use raster::{shade_triangle, Rasterizer, AMBIENT};

use crate::randomizer::{BackgroundSpec, ConfigError, PerlinNoise, RandomizationConfig, SceneDescription};
use crate::scene::{build_primitive, Camera, HandModel, Rgb, SceneError, Tessellation, TriangleMesh};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid scene: {0}")]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("background {path}: {message}")]
    Background { path: PathBuf, message: String },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch { expected: (u32, u32), actual: (u32, u32) },
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub image: Framebuffer,
    pub depth: DepthBuffer,
    pub instance: InstanceBuffer,
}

/// Paint the background of a `camera`-sized frame.
pub fn paint_background(spec: &BackgroundSpec, camera: &Camera) -> Result<Framebuffer, RenderError> {
    let (w, h) = (camera.width, camera.height);
    match spec {
        BackgroundSpec::SolidColor { color } => Ok(Framebuffer::filled(w, h, *color)),
        BackgroundSpec::Perlin { params, low, high } => {
            let noise = PerlinNoise::new(params.seed);
            let mut fb = Framebuffer::filled(w, h, Rgb::BLACK);
            let scale = 1.0 / w as f64;
            for y in 0..h {
                for x in 0..w {
                    let n = noise.fractal((x as f64 + 0.5) * scale, (y as f64 + 0.5) * scale, params);
                    fb.set(x, y, low.lerp(*high, 0.5 * (n + 1.0)).to_u8());
                }
            }
            Ok(fb)
        }
        BackgroundSpec::RealImage { path } => {
            let img = image::open(path).map_err(|e| RenderError::Background {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let img = img
                .resize_exact(w, h, image::imageops::FilterType::Triangle)
                .to_rgb8();
            Ok(Framebuffer::from_image(&img))
        }
    }
}

/// World-space meshes of a scene in draw order: hand, arm, distractors.
pub fn scene_meshes(
    scene: &SceneDescription,
    model: &HandModel,
    tessellation: Tessellation,
) -> Result<Vec<TriangleMesh>, RenderError> {
    let mut meshes = model.build(&scene.hand, scene.attach_arm)?;
    for d in &scene.distractors {
        let mesh = build_primitive(&d.shape, tessellation)?;
        meshes.push(mesh.transformed(&d.pose.transform()));
    }
    Ok(meshes)
}

/// Rasterize `meshes` over a background frame.
pub fn render_meshes(
    meshes: &[TriangleMesh],
    camera: &Camera,
    lights: &[crate::scene::Spotlight],
    background: &Framebuffer,
) -> Result<RenderOutput, RenderError> {
    camera.validate()?;
    let (w, h) = (camera.width, camera.height);
    let mut image = Framebuffer::filled(w, h, Rgb::BLACK);
    let mut depth = DepthBuffer::new(w, h);
    let mut instance = InstanceBuffer::new(w, h);
    let mut r = Rasterizer::new(camera, &mut image, &mut depth, &mut instance);
    for mesh in meshes {
        r.draw_mesh(mesh, lights);
    }
    let image = composite_over(&image, &instance, background)?;
    Ok(RenderOutput { image, depth, instance })
}

/// Renders scene descriptions with a given hand model.
#[derive(Debug, Clone, Default)]
pub struct Renderer {
    pub model: HandModel,
    pub tessellation: Tessellation,
}

impl Renderer {
    pub fn new(model: HandModel, tessellation: Tessellation) -> Self {
        Renderer { model, tessellation }
    }

    pub fn from_config(config: &RandomizationConfig) -> Result<Self, ConfigError> {
        Ok(Renderer::new(config.hand_model()?, config.tessellation))
    }

    pub fn render(&self, scene: &SceneDescription) -> Result<RenderOutput, RenderError> {
        scene.camera.validate()?;
        let meshes = scene_meshes(scene, &self.model, self.tessellation)?;
        let background = paint_background(&scene.background, &scene.camera)?;
        render_meshes(&meshes, &scene.camera, &scene.lights, &background)
    }
}

/// Render with the default procedural hand.
pub fn render(scene: &SceneDescription) -> Result<RenderOutput, RenderError> {
    Renderer::default().render(scene)
}
