//! Scene geometry: primitive meshes, the articulated hand and arm, cameras,
//! lights and OBJ import.

mod camera;
mod hand;
mod math;
mod mesh;
mod obj;
mod primitives;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use camera::{project, Camera, Projection, Spotlight};
pub use hand::{build_hand_arm, HandModel, DEFAULT_ARM_COLOR, DEFAULT_HAND_COLOR};
pub use math::{normalize_degrees, Mat3, Transform, Vec3};
pub use mesh::{PartLabel, TriangleMesh};
pub use obj::{parse_mesh_file, serialize_mesh};
pub use primitives::{build_primitive, ShapeKind, ShapeSpec, Tessellation};

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("invalid shape: {0}")]
    InvalidSpec(String),
    #[error("invalid tessellation: {0}")]
    InvalidTessellation(String),
    #[error("joint {axis} angle {value} outside [{lower}, {upper}]")]
    JointLimit {
        /// 1-based axis index (1 = pronation, 2 = abduction, 3 = flexion).
        axis: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("invalid joint limits: {0}")]
    InvalidLimits(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid light: {0}")]
    InvalidLight(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: vertex index {index} out of range (have {count})")]
    Index {
        line: usize,
        index: i64,
        count: usize,
    },
}

/// Linear RGB color with channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const WHITE: Rgb = Rgb::new(1.0, 1.0, 1.0);
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    pub const fn gray(v: f64) -> Self {
        Rgb::new(v, v, v)
    }

    pub fn is_valid(&self) -> bool {
        [self.r, self.g, self.b]
            .iter()
            .all(|c| c.is_finite() && (0.0..=1.0).contains(c))
    }

    pub fn lerp(self, o: Rgb, t: f64) -> Rgb {
        Rgb::new(
            self.r + (o.r - self.r) * t,
            self.g + (o.g - self.g) * t,
            self.b + (o.b - self.b) * t,
        )
    }

    /// Quantize to 8 bits per channel, clamping out-of-range values.
    pub fn to_u8(self) -> [u8; 3] {
        let q = |c: f64| (c.clamp(0.0, 1.0) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }
}

/// Position plus Euler orientation (roll, pitch, yaw) in degrees, applied as
/// intrinsic x -> y -> z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    /// `[roll, pitch, yaw]`, each in `(-180, 180]`.
    pub orientation: [f64; 3],
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: Vec3::ZERO,
        orientation: [0.0; 3],
    };

    pub fn new(position: Vec3, roll: f64, pitch: f64, yaw: f64) -> Self {
        Pose {
            position,
            orientation: [
                normalize_degrees(roll),
                normalize_degrees(pitch),
                normalize_degrees(yaw),
            ],
        }
    }

    pub fn rotation(&self) -> Mat3 {
        let [r, p, y] = self.orientation;
        Mat3::from_euler_xyz(r, p, y)
    }

    pub fn transform(&self) -> Transform {
        Transform::new(self.rotation(), self.position)
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::IDENTITY
    }
}

/// Per-axis bounds on the wrist angles (pronation, abduction, flexion), in
/// degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl JointLimits {
    pub fn new(lower: [f64; 3], upper: [f64; 3]) -> Result<Self, SceneError> {
        let limits = JointLimits { lower, upper };
        limits.validate()?;
        Ok(limits)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        for i in 0..3 {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(SceneError::InvalidLimits(format!(
                    "axis {}: lower {lo} > upper {hi}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// First axis whose angle lies outside its bounds.
    pub fn check(&self, gamma: [f64; 3]) -> Result<(), SceneError> {
        for (i, &value) in gamma.iter().enumerate() {
            let (lower, upper) = (self.lower[i], self.upper[i]);
            if !(lower..=upper).contains(&value) {
                return Err(SceneError::JointLimit {
                    axis: i + 1,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }
}

impl Default for JointLimits {
    fn default() -> Self {
        JointLimits {
            lower: [-90.0, -30.0, -45.0],
            upper: [90.0, 30.0, 45.0],
        }
    }
}

/// Hand orientation relative to the wrist frame plus the arm's world pose.
///
/// `gamma = [0, 0, 0]` leaves the hand aligned with the wrist frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandPose {
    /// Forearm pronation (about x), wrist abduction (about y), wrist
    /// flexion (about z), in degrees.
    pub gamma: [f64; 3],
    /// Pose of the wrist frame in world space.
    pub arm_pose: Pose,
}

impl HandPose {
    /// Hand rotation relative to the wrist frame.
    pub fn hand_rotation(&self) -> Mat3 {
        Mat3::from_euler_xyz(self.gamma[0], self.gamma[1], self.gamma[2])
    }
}
