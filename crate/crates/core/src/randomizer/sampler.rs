use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConfigError, DatasetPreset, DistractorConfig, PerlinParams, RandomizationConfig};
use crate::scene::{
    Camera, HandPose, JointLimits, Mat3, Pose, Rgb, ShapeKind, ShapeSpec, Spotlight, Vec3,
};

/// Number of randomized spotlights in lighting presets.
pub const SPOTLIGHT_COUNT: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum BackgroundSpec {
    SolidColor { color: Rgb },
    /// Noise in `[-1, 1]` blends `low` (at -1) into `high` (at +1). The
    /// noise is evaluated at pixel coordinates scaled by
    /// `params.frequency / width`.
    Perlin { params: PerlinParams, low: Rgb, high: Rgb },
    /// Stretched to the frame.
    RealImage { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    Solid,
    Perlin,
    Real,
}

impl BackgroundSpec {
    pub fn kind(&self) -> BackgroundKind {
        match self {
            BackgroundSpec::SolidColor { .. } => BackgroundKind::Solid,
            BackgroundSpec::Perlin { .. } => BackgroundKind::Perlin,
            BackgroundSpec::RealImage { .. } => BackgroundKind::Real,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distractor {
    pub shape: ShapeSpec,
    pub pose: Pose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneProvenance {
    pub dataset_seed: u64,
    pub index: u64,
}

/// A fully randomized scene; rendering it is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub preset: DatasetPreset,
    pub hand: HandPose,
    pub attach_arm: bool,
    pub distractors: Vec<Distractor>,
    pub background: BackgroundSpec,
    pub lights: Vec<Spotlight>,
    pub camera: Camera,
    pub provenance: SceneProvenance,
}

/// Per-scene feature flags recorded in dataset manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub background: BackgroundKind,
    pub attach_arm: bool,
    pub distractors: usize,
    pub lights: usize,
}

impl SceneDescription {
    pub fn summary(&self) -> SceneSummary {
        SceneSummary {
            background: self.background.kind(),
            attach_arm: self.attach_arm,
            distractors: self.distractors.len(),
            lights: self.lights.len(),
        }
    }
}

/// Sorted image files (png, jpg, jpeg, bmp) directly inside `dir`.
pub fn list_background_images(dir: &Path) -> Result<Vec<PathBuf>, ConfigError> {
    let entries = std::fs::read_dir(dir).map_err(|source| ConfigError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|source| ConfigError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if path.is_file() && matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg" | "bmp")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Independent random components of a scene. Each gets its own generator so
/// that, for one (seed, index), the hand pose does not change when a preset
/// enables more features.
#[derive(Clone, Copy)]
enum Component {
    Hand = 1,
    Background = 2,
    Distractors = 3,
    Lights = 4,
}

fn substream(seed: u64, index: u64, component: Component) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = component as u8;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn random_color(rng: &mut impl Rng) -> Rgb {
    Rgb::new(rng.gen(), rng.gen(), rng.gen())
}

/// Each angle uniform within its bounds.
pub fn sample_joint_angles(limits: &JointLimits, rng: &mut impl Rng) -> [f64; 3] {
    [0, 1, 2].map(|i| uniform(rng, limits.lower[i], limits.upper[i]))
}

/// World point seen at image-plane fraction `(u, v)` of the half extents and
/// view depth `depth`.
fn frustum_point(camera: &Camera, u: f64, v: f64, depth: f64) -> Vec3 {
    let (w, h) = (camera.width as f64, camera.height as f64);
    camera.unproject(0.5 * w * (1.0 + u), 0.5 * h * (1.0 - v), depth)
}

/// Uniform direction within `cone_deg` of the unit vector `axis`.
fn direction_in_cone(rng: &mut impl Rng, axis: Vec3, cone_deg: f64) -> Vec3 {
    let cos_max = cone_deg.to_radians().cos();
    let cos_t = uniform(rng, cos_max.min(1.0), 1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    Mat3::align_z_to(axis).apply(Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t))
}

/// Shapes in the camera frustum, free to land in front of the hand.
pub fn sample_distractors(config: &DistractorConfig, camera: &Camera, rng: &mut impl Rng) -> Vec<Distractor> {
    let count = rng.gen_range(config.count.lo..=config.count.hi);
    let size = |rng: &mut ChaCha8Rng| uniform(rng, config.size.lo, config.size.hi);
    // A local generator keeps the closure types simple.
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    (0..count)
        .map(|_| {
            let rng = &mut local;
            let kind = match rng.gen_range(0..4) {
                0 => ShapeKind::Ellipsoid {
                    a: size(rng),
                    b: size(rng),
                    c: size(rng),
                },
                1 => ShapeKind::Parallelepiped {
                    x: 2.0 * size(rng),
                    y: 2.0 * size(rng),
                    z: 2.0 * size(rng),
                },
                2 => ShapeKind::EllipticCylinder {
                    a: size(rng),
                    b: size(rng),
                    height: 2.0 * size(rng),
                },
                _ => ShapeKind::Spherocylinder {
                    radius: size(rng),
                    length: 2.0 * size(rng),
                },
            };
            let color = random_color(rng);
            let u = uniform(rng, config.lateral.lo, config.lateral.hi);
            let v = uniform(rng, config.lateral.lo, config.lateral.hi);
            let depth = uniform(rng, config.depth.lo, config.depth.hi);
            let position = frustum_point(camera, u, v, depth);
            let mut angle = || 180.0 - rng.gen_range(0.0..360.0);
            let pose = Pose::new(position, angle(), angle(), angle());
            Distractor {
                shape: ShapeSpec::new(kind, color),
                pose,
            }
        })
        .collect()
}

/// Samples scenes for one (config, preset, seed). Scene `i` depends only on
/// those and `i`, so indices can be generated in any order or in parallel.
#[derive(Debug, Clone)]
pub struct SceneSampler {
    config: RandomizationConfig,
    preset: DatasetPreset,
    seed: u64,
    backgrounds: Vec<PathBuf>,
    hand_centroid: Vec3,
}

impl SceneSampler {
    pub fn new(config: &RandomizationConfig, preset: DatasetPreset, seed: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let backgrounds = if preset.features().real_backgrounds {
            let dir = config.backgrounds_dir.as_ref().ok_or_else(|| {
                ConfigError::MissingBackgrounds("no backgrounds_dir configured".into())
            })?;
            if !dir.is_dir() {
                return Err(ConfigError::MissingBackgrounds(format!("{} is not a directory", dir.display())));
            }
            let files = list_background_images(dir)?;
            if files.is_empty() {
                return Err(ConfigError::MissingBackgrounds(format!("{} contains no images", dir.display())));
            }
            files
        } else {
            Vec::new()
        };
        let hand_centroid = config.hand_model()?.hand_centroid();
        Ok(SceneSampler {
            config: config.clone(),
            preset,
            seed,
            backgrounds,
            hand_centroid,
        })
    }

    pub fn config(&self) -> &RandomizationConfig {
        &self.config
    }

    pub fn preset(&self) -> DatasetPreset {
        self.preset
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&self, index: u64) -> SceneDescription {
        let features = self.preset.features();
        let camera = self.config.camera;
        let mut hand_rng = substream(self.seed, index, Component::Hand);
        let (hand, target) = self.sample_hand_pose(&mut hand_rng);

        let mut bg_rng = substream(self.seed, index, Component::Background);
        let background = self.sample_background(&mut bg_rng);

        let distractors = if features.distractors {
            let mut rng = substream(self.seed, index, Component::Distractors);
            sample_distractors(&self.config.distractors, &camera, &mut rng)
        } else {
            Vec::new()
        };

        let lights = if features.spotlights {
            let mut rng = substream(self.seed, index, Component::Lights);
            (0..SPOTLIGHT_COUNT)
                .map(|_| self.sample_spotlight(&mut rng, target))
                .collect()
        } else {
            vec![Spotlight::headlight(&camera)]
        };

        SceneDescription {
            preset: self.preset,
            hand,
            attach_arm: features.arm,
            distractors,
            background,
            lights,
            camera,
            provenance: SceneProvenance {
                dataset_seed: self.seed,
                index,
            },
        }
    }

    /// Joint angles within limits and an arm pose that puts the hand
    /// centroid inside the configured view volume. Also returns that
    /// centroid in world space.
    pub fn sample_hand_pose(&self, rng: &mut impl Rng) -> (HandPose, Vec3) {
        let arm = &self.config.arm;
        let camera = &self.config.camera;
        let gamma = sample_joint_angles(&self.config.joint_limits, rng);
        let u = uniform(rng, arm.lateral.lo, arm.lateral.hi);
        let v = uniform(rng, arm.lateral.lo, arm.lateral.hi);
        let depth = uniform(rng, arm.depth.lo, arm.depth.hi);
        let target = frustum_point(camera, u, v, depth);

        let nominal = camera.pose.rotation().apply(arm.forearm_direction.normalized());
        let elbow_dir = direction_in_cone(rng, nominal, arm.forearm_cone);
        let roll = uniform(rng, arm.roll.lo, arm.roll.hi);
        // Wrist frame: +X points from the elbow to the hand.
        let x_axis = -elbow_dir;
        let base = Mat3::align_z_to(x_axis);
        let (y0, z0) = (base.apply(Vec3::X), base.apply(Vec3::Y));
        let (s, c) = roll.to_radians().sin_cos();
        let y_axis = y0 * c + z0 * s;
        let z_axis = x_axis.cross(y_axis);
        let [r, p, y] = Mat3::from_columns(x_axis, y_axis, z_axis).to_euler_xyz();
        let mut arm_pose = Pose::new(Vec3::ZERO, r, p, y);

        let hand_pose = HandPose { gamma, arm_pose };
        let offset = arm_pose.rotation().apply(hand_pose.hand_rotation().apply(self.hand_centroid));
        arm_pose.position = target - offset;
        (HandPose { gamma, arm_pose }, target)
    }

    fn sample_background(&self, rng: &mut ChaCha8Rng) -> BackgroundSpec {
        let features = self.preset.features();
        let mix = &self.config.mixing;
        // Draw every decision so the stream layout is preset-independent.
        let real_roll: f64 = rng.gen();
        let perlin_roll: f64 = rng.gen();
        let pick: usize = rng.gen();
        let solid = random_color(rng);
        let (low, high) = (random_color(rng), random_color(rng));
        let p = &self.config.perlin;
        let params = PerlinParams {
            seed: rng.gen(),
            octaves: rng.gen_range(p.octaves.lo..=p.octaves.hi),
            frequency: uniform(rng, p.base_frequency.lo, p.base_frequency.hi),
            persistence: uniform(rng, p.persistence.lo, p.persistence.hi),
        };
        if features.real_backgrounds && real_roll < mix.real {
            BackgroundSpec::RealImage {
                path: self.backgrounds[pick % self.backgrounds.len()].clone(),
            }
        } else if features.perlin && perlin_roll < mix.perlin {
            BackgroundSpec::Perlin { params, low, high }
        } else {
            BackgroundSpec::SolidColor { color: solid }
        }
    }

    fn sample_spotlight(&self, rng: &mut ChaCha8Rng, target: Vec3) -> Spotlight {
        let l = &self.config.lights;
        let up = self.config.camera.pose.rotation().apply(Vec3::Y);
        let elevation = uniform(rng, l.elevation.lo, l.elevation.hi).to_radians();
        let azimuth = rng.gen_range(0.0..std::f64::consts::TAU);
        let distance = uniform(rng, l.distance.lo, l.distance.hi);
        let frame = Mat3::align_z_to(up);
        let local = Vec3::new(
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        );
        let position = target + frame.apply(local) * distance;
        let jitter = Vec3::new(
            uniform(rng, -l.aim_jitter, l.aim_jitter),
            uniform(rng, -l.aim_jitter, l.aim_jitter),
            uniform(rng, -l.aim_jitter, l.aim_jitter),
        );
        let direction = (target + jitter - position).normalized();
        let cone_angle = uniform(rng, l.cone_angle.lo, l.cone_angle.hi);
        let intensity = uniform(rng, l.intensity.lo, l.intensity.hi);
        let color = Rgb::new(
            uniform(rng, l.tint.lo, l.tint.hi),
            uniform(rng, l.tint.lo, l.tint.hi),
            uniform(rng, l.tint.lo, l.tint.hi),
        );
        Spotlight {
            position,
            direction,
            cone_angle,
            intensity,
            color,
        }
    }
}

/// Sample scene `index` of the dataset `(config, preset, seed)`.
pub fn sample_scene(
    config: &RandomizationConfig,
    preset: DatasetPreset,
    seed: u64,
    index: u64,
) -> Result<SceneDescription, ConfigError> {
    Ok(SceneSampler::new(config, preset, seed)?.sample(index))
}
