use super::{DepthBuffer, Framebuffer, InstanceBuffer};
use crate::scene::{Camera, PartLabel, Rgb, Spotlight, TriangleMesh, Vec3};

/// Light that reaches faces regardless of orientation.
pub const AMBIENT: f64 = 0.15;

/// Flat Lambert color of a world-space triangle seen from `eye`.
/// Faces are two-sided: the normal is flipped toward the viewer.
pub fn shade_triangle(tri: [Vec3; 3], base: Rgb, eye: Vec3, lights: &[Spotlight]) -> Rgb {
    let centroid = (tri[0] + tri[1] + tri[2]) / 3.0;
    let mut n = (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalized();
    if n.dot(eye - centroid) < 0.0 {
        n = -n;
    }
    let (mut r, mut g, mut b) = (AMBIENT, AMBIENT, AMBIENT);
    for light in lights {
        let to_light = (light.position - centroid).normalized();
        let k = light.intensity * n.dot(to_light).max(0.0) * light.cone_factor(centroid);
        r += k * light.color.r;
        g += k * light.color.g;
        b += k * light.color.b;
    }
    Rgb::new(base.r * r, base.g * g, base.b * b)
}

/// Screen-space vertex with its view depth.
#[derive(Clone, Copy, Debug)]
struct ScreenVertex {
    x: f64,
    y: f64,
    depth: f64,
}

/// Clip a camera-space polygon to `depth >= near` (depth = -z).
fn clip_near(poly: &[Vec3], near: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (da, db) = (-a.z - near, -b.z - near);
        if da >= 0.0 {
            out.push(a);
        }
        if (da >= 0.0) != (db >= 0.0) {
            let t = da / (da - db);
            out.push(a.lerp(b, t));
        }
    }
    out
}

#[inline]
fn edge(a: ScreenVertex, b: ScreenVertex, px: f64, py: f64) -> f64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

/// Z-buffered rasterizer. Samples pixel centers; edges are inclusive;
/// a fragment replaces the stored one only when strictly nearer, so the
/// earliest drawn triangle wins exact ties.
pub struct Rasterizer<'a> {
    camera: &'a Camera,
    pub color: &'a mut Framebuffer,
    pub depth: &'a mut DepthBuffer,
    pub labels: &'a mut InstanceBuffer,
}

impl<'a> Rasterizer<'a> {
    pub fn new(
        camera: &'a Camera,
        color: &'a mut Framebuffer,
        depth: &'a mut DepthBuffer,
        labels: &'a mut InstanceBuffer,
    ) -> Self {
        Rasterizer {
            camera,
            color,
            depth,
            labels,
        }
    }

    pub fn draw_mesh(&mut self, mesh: &TriangleMesh, lights: &[Spotlight]) {
        let view = self.camera.world_to_camera();
        let eye = self.camera.pose.position;
        let cam: Vec<Vec3> = mesh.vertices.iter().map(|&v| view.point(v)).collect();
        for (i, t) in mesh.triangles.iter().enumerate() {
            let world = mesh.triangle(i);
            let shaded = shade_triangle(world, mesh.base_color, eye, lights).to_u8();
            let tri = [cam[t[0] as usize], cam[t[1] as usize], cam[t[2] as usize]];
            self.draw_camera_triangle(tri, shaded, mesh.part_label);
        }
    }

    /// Draw one triangle given in camera coordinates.
    pub fn draw_camera_triangle(&mut self, tri: [Vec3; 3], color: [u8; 3], label: PartLabel) {
        let near = self.camera.near;
        let poly = if tri.iter().all(|v| -v.z >= near) {
            tri.to_vec()
        } else {
            clip_near(&tri, near)
        };
        if poly.len() < 3 {
            return;
        }
        let f = self.camera.focal();
        let (cx, cy) = (0.5 * self.camera.width as f64, 0.5 * self.camera.height as f64);
        let screen: Vec<ScreenVertex> = poly
            .iter()
            .map(|v| {
                let d = -v.z;
                ScreenVertex {
                    x: cx + f * v.x / d,
                    y: cy - f * v.y / d,
                    depth: d,
                }
            })
            .collect();
        for k in 1..screen.len() - 1 {
            self.fill([screen[0], screen[k], screen[k + 1]], color, label);
        }
    }

    fn fill(&mut self, v: [ScreenVertex; 3], color: [u8; 3], label: PartLabel) {
        let area = edge(v[0], v[1], v[2].x, v[2].y);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        let (w, h) = (self.camera.width, self.camera.height);
        let min_x = v[0].x.min(v[1].x).min(v[2].x);
        let max_x = v[0].x.max(v[1].x).max(v[2].x);
        let min_y = v[0].y.min(v[1].y).min(v[2].y);
        let max_y = v[0].y.max(v[1].y).max(v[2].y);
        let x0 = (min_x - 0.5).ceil().max(0.0);
        let x1 = (max_x - 0.5).floor().min(w as f64 - 1.0);
        let y0 = (min_y - 0.5).ceil().max(0.0);
        let y1 = (max_y - 0.5).floor().min(h as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            return;
        }
        let far = self.camera.far;
        let inv = [1.0 / v[0].depth, 1.0 / v[1].depth, 1.0 / v[2].depth];
        for py in y0 as u32..=y1 as u32 {
            let sy = py as f64 + 0.5;
            for px in x0 as u32..=x1 as u32 {
                let sx = px as f64 + 0.5;
                let w0 = edge(v[1], v[2], sx, sy);
                let w1 = edge(v[2], v[0], sx, sy);
                let w2 = edge(v[0], v[1], sx, sy);
                let inside = if area > 0.0 {
                    w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0
                } else {
                    w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0
                };
                if !inside {
                    continue;
                }
                let depth = area / (w0 * inv[0] + w1 * inv[1] + w2 * inv[2]);
                if depth > far {
                    continue;
                }
                let idx = py as usize * w as usize + px as usize;
                if depth < self.depth.depth[idx] {
                    self.depth.depth[idx] = depth;
                    self.labels.labels[idx] = label;
                    self.color.pixels[3 * idx..3 * idx + 3].copy_from_slice(&color);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_keeps_front_part() {
        let tri = [Vec3::new(0.0, 0.0, -1.0), Vec3::new(1.0, 0.0, 1.0), Vec3::new(0.0, 1.0, -1.0)];
        let out = clip_near(&tri, 0.5);
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|v| -v.z >= 0.5 - 1e-12));
        assert!(clip_near(&[Vec3::Z, Vec3::Z, Vec3::Z], 0.1).is_empty());
    }

    #[test]
    fn shading_two_sided_and_ambient() {
        let tri = [Vec3::new(0.0, 0.0, -1.0), Vec3::new(1.0, 0.0, -1.0), Vec3::new(0.0, 1.0, -1.0)];
        let flipped = [tri[0], tri[2], tri[1]];
        let light = Spotlight::headlight(&Camera::default());
        let a = shade_triangle(tri, Rgb::WHITE, Vec3::ZERO, &[light]);
        let b = shade_triangle(flipped, Rgb::WHITE, Vec3::ZERO, &[light]);
        assert_eq!(a, b);
        assert!(a.r > AMBIENT);
        let dark = shade_triangle(tri, Rgb::WHITE, Vec3::ZERO, &[]);
        assert_eq!(dark, Rgb::gray(AMBIENT));
    }
}
