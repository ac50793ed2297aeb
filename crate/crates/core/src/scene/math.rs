use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or direction in world space, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction; the zero vector maps to itself.
    pub fn normalized(self) -> Vec3 {
        let len = self.length();
        if len > 0.0 {
            self / len
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix, used for rotations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn rot_x(deg: f64) -> Mat3 {
        let (s, c) = deg.to_radians().sin_cos();
        Mat3 {
            rows: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    pub fn rot_y(deg: f64) -> Mat3 {
        let (s, c) = deg.to_radians().sin_cos();
        Mat3 {
            rows: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        }
    }

    pub fn rot_z(deg: f64) -> Mat3 {
        let (s, c) = deg.to_radians().sin_cos();
        Mat3 {
            rows: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Intrinsic x -> y -> z rotation: `Rx(a) * Ry(b) * Rz(c)`.
    pub fn from_euler_xyz(x_deg: f64, y_deg: f64, z_deg: f64) -> Mat3 {
        Mat3::rot_x(x_deg) * Mat3::rot_y(y_deg) * Mat3::rot_z(z_deg)
    }

    /// Rotation taking `+Z` onto the unit vector `dir`.
    pub fn align_z_to(dir: Vec3) -> Mat3 {
        let d = dir.normalized();
        let helper = if d.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        let u = helper.cross(d).normalized();
        let v = d.cross(u);
        Mat3::from_columns(u, v, d)
    }

    /// Inverse of [`Mat3::from_euler_xyz`]: angles in degrees with the
    /// middle angle in `[-90, 90]`.
    pub fn to_euler_xyz(&self) -> [f64; 3] {
        let r = &self.rows;
        let b = r[0][2].clamp(-1.0, 1.0).asin();
        if b.cos().abs() > 1e-9 {
            let a = (-r[1][2]).atan2(r[2][2]);
            let c = (-r[0][1]).atan2(r[0][0]);
            [a.to_degrees(), b.to_degrees(), c.to_degrees()]
        } else {
            // Gimbal lock: fold everything into the first angle.
            let a = r[2][1].atan2(r[1][1]);
            [a.to_degrees(), b.to_degrees(), 0.0]
        }
    }

    pub fn from_columns(a: Vec3, b: Vec3, c: Vec3) -> Mat3 {
        Mat3 {
            rows: [[a.x, b.x, c.x], [a.y, b.y, c.y], [a.z, b.z, c.z]],
        }
    }

    pub fn transpose(self) -> Mat3 {
        let r = self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum();
            }
        }
        Mat3 { rows }
    }
}

/// A rigid transform: rotate, then translate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Transform {
            rotation,
            translation,
        }
    }

    pub fn point(&self, p: Vec3) -> Vec3 {
        self.rotation.apply(p) + self.translation
    }

    pub fn vector(&self, v: Vec3) -> Vec3 {
        self.rotation.apply(v)
    }

    /// `self * other`: apply `other` first.
    pub fn then_local(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.point(other.translation),
        }
    }

    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -rt.apply(self.translation),
        }
    }
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let mut a = deg % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).length() < 1e-12
    }

    #[test]
    fn rotations_follow_right_hand_rule() {
        assert!(close(Mat3::rot_z(90.0).apply(Vec3::X), Vec3::Y));
        assert!(close(Mat3::rot_x(90.0).apply(Vec3::Y), Vec3::Z));
        assert!(close(Mat3::rot_y(90.0).apply(Vec3::Z), Vec3::X));
    }

    #[test]
    fn euler_order_is_intrinsic_xyz() {
        let m = Mat3::from_euler_xyz(30.0, -20.0, 50.0);
        let composed = Mat3::rot_x(30.0) * (Mat3::rot_y(-20.0) * Mat3::rot_z(50.0));
        let v = Vec3::new(0.3, -1.2, 0.7);
        assert!(close(m.apply(v), composed.apply(v)));
    }

    #[test]
    fn euler_extraction_roundtrips() {
        for &(a, b, c) in &[(10.0, 20.0, 30.0), (-170.0, 80.0, 120.0), (45.0, -89.0, -45.0), (0.0, 0.0, 0.0)] {
            let m = Mat3::from_euler_xyz(a, b, c);
            let [x, y, z] = m.to_euler_xyz();
            let back = Mat3::from_euler_xyz(x, y, z);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((m.rows[i][j] - back.rows[i][j]).abs() < 1e-9);
                }
            }
        }
        let locked = Mat3::from_euler_xyz(30.0, 90.0, 10.0);
        let [x, y, z] = locked.to_euler_xyz();
        let back = Mat3::from_euler_xyz(x, y, z);
        let v = Vec3::new(0.3, 0.5, -0.2);
        assert!((locked.apply(v) - back.apply(v)).length() < 1e-9);
    }

    #[test]
    fn align_z_maps_axis() {
        let d = Vec3::new(1.0, 2.0, -0.5).normalized();
        assert!(close(Mat3::align_z_to(d).apply(Vec3::Z), d));
        assert!(close(Mat3::align_z_to(Vec3::X).apply(Vec3::Z), Vec3::X));
    }

    #[test]
    fn transform_inverse_roundtrips() {
        let t = Transform::new(Mat3::from_euler_xyz(10.0, 20.0, 30.0), Vec3::new(1.0, -2.0, 3.0));
        let p = Vec3::new(0.1, 0.2, 0.3);
        assert!(close(t.inverse().point(t.point(p)), p));
    }

    #[test]
    fn degrees_wrap_into_half_open_range() {
        assert_eq!(normalize_degrees(180.0), 180.0);
        assert_eq!(normalize_degrees(-180.0), 180.0);
        assert_eq!(normalize_degrees(270.0), -90.0);
        assert_eq!(normalize_degrees(-540.0), 180.0);
        assert_eq!(normalize_degrees(45.0), 45.0);
    }
}
