use serde::{Deserialize, Serialize};

use super::{Pose, Rgb, SceneError, Transform, Vec3};

/// Pinhole camera. In its own frame the camera looks down `-Z` with `+Y` up
/// and `+X` to the right; `pose` places that frame in the world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub pose: Pose,
    pub width: u32,
    pub height: u32,
    /// Vertical field of view, degrees.
    pub fov_y: f64,
    pub near: f64,
    pub far: f64,
}

impl Default for Camera {
    fn default() -> Self {
        Camera {
            pose: Pose::IDENTITY,
            width: 640,
            height: 480,
            fov_y: 60.0,
            near: 0.05,
            far: 10.0,
        }
    }
}

/// Result of projecting a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Continuous pixel coordinates (origin at the top-left image corner,
    /// `y` down) and view depth along the optical axis.
    Pixel { x: f64, y: f64, depth: f64 },
    /// At or behind the near plane.
    BehindCamera,
}

impl Camera {
    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let err = |m: String| Err(SceneError::InvalidCamera(m));
        if self.width == 0 || self.height == 0 {
            return err(format!("image size {}x{}", self.width, self.height));
        }
        if !(self.near > 0.0 && self.near < self.far && self.far.is_finite()) {
            return err(format!("near {} / far {}", self.near, self.far));
        }
        if !(self.fov_y > 0.0 && self.fov_y < 180.0) {
            return err(format!("vertical fov {}", self.fov_y));
        }
        if !self.pose.position.is_finite() {
            return err("non-finite position".into());
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        0.5 * self.height as f64 / (0.5 * self.fov_y).to_radians().tan()
    }

    pub fn world_to_camera(&self) -> Transform {
        self.pose.transform().inverse()
    }

    /// Project a point already expressed in the camera frame.
    pub fn project_camera_space(&self, p: Vec3) -> Projection {
        let depth = -p.z;
        if depth <= self.near {
            return Projection::BehindCamera;
        }
        let f = self.focal();
        Projection::Pixel {
            x: 0.5 * self.width as f64 + f * p.x / depth,
            y: 0.5 * self.height as f64 - f * p.y / depth,
            depth,
        }
    }

    /// World-space point on the ray through pixel coordinates `(px, py)` at
    /// view depth `depth`.
    pub fn unproject(&self, px: f64, py: f64, depth: f64) -> Vec3 {
        let f = self.focal();
        let x = (px - 0.5 * self.width as f64) * depth / f;
        let y = (0.5 * self.height as f64 - py) * depth / f;
        self.pose.transform().point(Vec3::new(x, y, -depth))
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }
}

/// Pinhole projection of a world point.
pub fn project(point: Vec3, camera: &Camera) -> Projection {
    camera.project_camera_space(camera.world_to_camera().point(point))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spotlight {
    pub position: Vec3,
    /// Unit direction the cone points along.
    pub direction: Vec3,
    /// Half-angle of the cone, degrees, in `(0, 90]`.
    pub cone_angle: f64,
    pub intensity: f64,
    pub color: Rgb,
}

impl Spotlight {
    pub fn new(position: Vec3, direction: Vec3, cone_angle: f64, intensity: f64, color: Rgb) -> Result<Self, SceneError> {
        let light = Spotlight {
            position,
            direction: direction.normalized(),
            cone_angle,
            intensity,
            color,
        };
        light.validate()?;
        Ok(light)
    }

    /// A wide light at the camera, pointing along its optical axis.
    pub fn headlight(camera: &Camera) -> Spotlight {
        Spotlight {
            position: camera.pose.position,
            direction: camera.pose.rotation().apply(-Vec3::Z),
            cone_angle: 90.0,
            intensity: 0.85,
            color: Rgb::WHITE,
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !self.position.is_finite() || (self.direction.length() - 1.0).abs() > 1e-9 {
            return Err(SceneError::InvalidLight("direction must be a unit vector".into()));
        }
        if !(self.cone_angle > 0.0 && self.cone_angle <= 90.0) {
            return Err(SceneError::InvalidLight(format!("cone angle {}", self.cone_angle)));
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(SceneError::InvalidLight(format!("intensity {}", self.intensity)));
        }
        if !self.color.is_valid() {
            return Err(SceneError::InvalidLight(format!("color {:?}", self.color)));
        }
        Ok(())
    }

    /// Cone attenuation at `point`: cosine of the off-axis angle inside the
    /// cone, zero outside.
    pub fn cone_factor(&self, point: Vec3) -> f64 {
        let to_point = (point - self.position).normalized();
        let cos = to_point.dot(self.direction);
        if cos >= self.cone_angle.to_radians().cos() {
            cos.max(0.0)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unwrap(p: Projection) -> (f64, f64) {
        match p {
            Projection::Pixel { x, y, .. } => (x, y),
            Projection::BehindCamera => panic!("behind camera"),
        }
    }

    #[test]
    fn optical_axis_maps_to_center() {
        let cam = Camera::default();
        let (x, y) = unwrap(project(Vec3::new(0.0, 0.0, -3.0), &cam));
        assert_eq!((x, y), (320.0, 240.0));
    }

    #[test]
    fn half_fov_maps_to_image_edge() {
        let cam = Camera::default();
        let t = (cam.fov_y / 2.0).to_radians().tan();
        let (_, top) = unwrap(project(Vec3::new(0.0, 2.0 * t, -2.0), &cam));
        let (_, bottom) = unwrap(project(Vec3::new(0.0, -2.0 * t, -2.0), &cam));
        assert!(top.abs() < 1e-6);
        assert!((bottom - cam.height as f64).abs() < 1e-6);
    }

    #[test]
    fn behind_and_near_plane_points_are_flagged() {
        let cam = Camera::default();
        assert_eq!(project(Vec3::new(0.0, 0.0, 1.0), &cam), Projection::BehindCamera);
        assert_eq!(project(Vec3::new(0.0, 0.0, -cam.near), &cam), Projection::BehindCamera);
    }

    #[test]
    fn doubling_resolution_doubles_offsets() {
        let cam = Camera::default();
        let big = cam.with_size(cam.width * 2, cam.height * 2);
        let p = Vec3::new(0.13, -0.07, -0.8);
        let (x1, y1) = unwrap(project(p, &cam));
        let (x2, y2) = unwrap(project(p, &big));
        assert!(((x2 - 640.0) - 2.0 * (x1 - 320.0)).abs() < 1e-9);
        assert!(((y2 - 480.0) - 2.0 * (y1 - 240.0)).abs() < 1e-9);
    }

    #[test]
    fn posed_camera_projects_relative_to_its_frame() {
        let cam = Camera {
            pose: Pose::new(Vec3::new(1.0, 2.0, 3.0), 0.0, 90.0, 0.0),
            ..Camera::default()
        };
        // Pitch 90 about y turns the -Z view axis into -X.
        let (x, y) = unwrap(project(Vec3::new(-1.0, 2.0, 3.0), &cam));
        assert!((x - 320.0).abs() < 1e-9 && (y - 240.0).abs() < 1e-9);
    }

    #[test]
    fn unproject_inverts_project() {
        let cam = Camera {
            pose: Pose::new(Vec3::new(0.2, -0.1, 0.3), 10.0, -20.0, 5.0),
            ..Camera::default()
        };
        let p = cam.unproject(100.25, 300.5, 1.7);
        match project(p, &cam) {
            Projection::Pixel { x, y, depth } => {
                assert!((x - 100.25).abs() < 1e-9 && (y - 300.5).abs() < 1e-9);
                assert!((depth - 1.7).abs() < 1e-12);
            }
            Projection::BehindCamera => panic!(),
        }
    }

    #[test]
    fn invalid_cameras_are_rejected() {
        let base = Camera::default();
        for cam in [
            base.with_size(0, 10),
            Camera { near: 0.0, ..base },
            Camera { near: 2.0, far: 1.0, ..base },
            Camera { fov_y: 180.0, ..base },
            Camera { fov_y: 0.0, ..base },
        ] {
            assert!(cam.validate().is_err(), "{cam:?}");
        }
        base.validate().unwrap();
    }

    #[test]
    fn spotlight_cone_cuts_off() {
        let l = Spotlight::new(Vec3::ZERO, -Vec3::Z, 30.0, 1.0, Rgb::WHITE).unwrap();
        assert!((l.cone_factor(Vec3::new(0.0, 0.0, -1.0)) - 1.0).abs() < 1e-12);
        assert_eq!(l.cone_factor(Vec3::new(1.0, 0.0, -1.0)), 0.0);
        assert!(Spotlight::new(Vec3::ZERO, Vec3::Z, 95.0, 1.0, Rgb::WHITE).is_err());
    }
}
