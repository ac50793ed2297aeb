use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{PartLabel, Rgb, SceneError, TriangleMesh, Vec3};

/// Parametric distractor shape. Dimensions are in meters; all shapes are
/// centered at the origin with their axis (where they have one) along `+Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// Semi-axes along x, y, z.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Full edge lengths along x, y, z.
    Parallelepiped { x: f64, y: f64, z: f64 },
    /// Elliptic cross-section semi-axes `a` (x) and `b` (y), full height along z.
    EllipticCylinder { a: f64, b: f64, height: f64 },
    /// Capsule: cap radius and the length of the straight section between
    /// the two hemisphere centers.
    Spherocylinder { radius: f64, length: f64 },
}

impl ShapeKind {
    fn check(&self) -> Result<(), SceneError> {
        let (dims, allow_zero_last): (Vec<f64>, bool) = match *self {
            ShapeKind::Ellipsoid { a, b, c } => (vec![a, b, c], false),
            ShapeKind::Parallelepiped { x, y, z } => (vec![x, y, z], false),
            ShapeKind::EllipticCylinder { a, b, height } => (vec![a, b, height], false),
            ShapeKind::Spherocylinder { radius, length } => (vec![radius, length], true),
        };
        let last = dims.len() - 1;
        for (i, d) in dims.iter().enumerate() {
            let ok = d.is_finite() && (*d > 0.0 || (allow_zero_last && i == last && *d == 0.0));
            if !ok {
                return Err(SceneError::InvalidSpec(format!(
                    "{self:?}: dimension {i} must be positive, got {d}"
                )));
            }
        }
        Ok(())
    }

    /// Radius of the smallest origin-centered sphere containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            ShapeKind::Ellipsoid { a, b, c } => a.max(b).max(c),
            ShapeKind::Parallelepiped { x, y, z } => 0.5 * (x * x + y * y + z * z).sqrt(),
            ShapeKind::EllipticCylinder { a, b, height } => {
                (a.max(b).powi(2) + (0.5 * height).powi(2)).sqrt()
            }
            ShapeKind::Spherocylinder { radius, length } => radius + 0.5 * length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub kind: ShapeKind,
    pub color: Rgb,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, color: Rgb) -> Self {
        ShapeSpec { kind, color }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        self.kind.check()?;
        if !self.color.is_valid() {
            return Err(SceneError::InvalidSpec(format!(
                "color {:?} outside [0,1]",
                self.color
            )));
        }
        Ok(())
    }
}

/// Subdivision counts for curved primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tessellation {
    /// Segments around the axis.
    pub segments: usize,
    /// Latitude bands from pole to pole (halved per capsule cap).
    pub rings: usize,
}

impl Default for Tessellation {
    fn default() -> Self {
        Tessellation {
            segments: 16,
            rings: 16,
        }
    }
}

impl Tessellation {
    pub fn new(segments: usize, rings: usize) -> Self {
        Tessellation { segments, rings }
    }

    fn check(&self) -> Result<(), SceneError> {
        if self.segments < 3 || self.rings < 2 {
            return Err(SceneError::InvalidTessellation(format!(
                "need segments >= 3 and rings >= 2, got {} / {}",
                self.segments, self.rings
            )));
        }
        Ok(())
    }
}

/// Tessellate a parametric shape into a closed triangle mesh labeled
/// [`PartLabel::Distractor`].
pub fn build_primitive(spec: &ShapeSpec, tess: Tessellation) -> Result<TriangleMesh, SceneError> {
    spec.validate()?;
    tess.check()?;
    let (vertices, normals, triangles) = match spec.kind {
        ShapeKind::Ellipsoid { a, b, c } => ellipsoid(a, b, c, tess),
        ShapeKind::Parallelepiped { x, y, z } => parallelepiped(x, y, z),
        ShapeKind::EllipticCylinder { a, b, height } => cylinder(a, b, height, tess.segments),
        ShapeKind::Spherocylinder { radius, length } => capsule(radius, length, tess),
    };
    Ok(TriangleMesh {
        vertices,
        normals,
        triangles,
        part_label: PartLabel::Distractor,
        base_color: spec.color,
    })
}

type Buffers = (Vec<Vec3>, Vec<Vec3>, Vec<[u32; 3]>);

/// Stitch consecutive rings of `segments` vertices, starting at `first`.
fn stitch_rings(tris: &mut Vec<[u32; 3]>, first: u32, ring_count: u32, segments: u32) {
    for r in 0..ring_count.saturating_sub(1) {
        let a0 = first + r * segments;
        let b0 = a0 + segments;
        for s in 0..segments {
            let s1 = (s + 1) % segments;
            tris.push([a0 + s, b0 + s, b0 + s1]);
            tris.push([a0 + s, b0 + s1, a0 + s1]);
        }
    }
}

/// Fan from a pole vertex to a ring.
fn cap_fan(tris: &mut Vec<[u32; 3]>, pole: u32, ring: u32, segments: u32, flip: bool) {
    for s in 0..segments {
        let s1 = (s + 1) % segments;
        if flip {
            tris.push([pole, ring + s1, ring + s]);
        } else {
            tris.push([pole, ring + s, ring + s1]);
        }
    }
}

fn ellipsoid(a: f64, b: f64, c: f64, tess: Tessellation) -> Buffers {
    let seg = tess.segments;
    let mut verts = vec![Vec3::new(0.0, 0.0, c)];
    for i in 1..tess.rings {
        let theta = PI * i as f64 / tess.rings as f64;
        let (st, ct) = theta.sin_cos();
        for s in 0..seg {
            let phi = 2.0 * PI * s as f64 / seg as f64;
            let (sp, cp) = phi.sin_cos();
            verts.push(Vec3::new(a * st * cp, b * st * sp, c * ct));
        }
    }
    verts.push(Vec3::new(0.0, 0.0, -c));
    let normals = verts
        .iter()
        .map(|v| Vec3::new(v.x / (a * a), v.y / (b * b), v.z / (c * c)).normalized())
        .collect();
    let rings = (tess.rings - 1) as u32;
    let seg = seg as u32;
    let mut tris = Vec::new();
    cap_fan(&mut tris, 0, 1, seg, false);
    stitch_rings(&mut tris, 1, rings, seg);
    let south = verts.len() as u32 - 1;
    cap_fan(&mut tris, south, 1 + (rings - 1) * seg, seg, true);
    (verts, normals, tris)
}

fn parallelepiped(x: f64, y: f64, z: f64) -> Buffers {
    let (hx, hy, hz) = (x / 2.0, y / 2.0, z / 2.0);
    // Corner i has bit 0 = +x, bit 1 = +y, bit 2 = +z.
    let verts: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 != 0 { hx } else { -hx },
                if i & 2 != 0 { hy } else { -hy },
                if i & 4 != 0 { hz } else { -hz },
            )
        })
        .collect();
    let normals = verts
        .iter()
        .map(|v| Vec3::new(v.x.signum(), v.y.signum(), v.z.signum()).normalized())
        .collect();
    // Outward-wound faces.
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let tris = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    (verts, normals, tris)
}

fn cylinder(a: f64, b: f64, height: f64, segments: usize) -> Buffers {
    let h = height / 2.0;
    let mut verts = Vec::with_capacity(2 * segments + 2);
    let mut normals = Vec::with_capacity(2 * segments + 2);
    for &(z, nz) in &[(h, 1.0), (-h, -1.0)] {
        for s in 0..segments {
            let phi = 2.0 * PI * s as f64 / segments as f64;
            let (sp, cp) = phi.sin_cos();
            verts.push(Vec3::new(a * cp, b * sp, z));
            let side = Vec3::new(cp / a, sp / b, 0.0).normalized();
            normals.push((side + Vec3::new(0.0, 0.0, nz)).normalized());
        }
    }
    verts.push(Vec3::new(0.0, 0.0, h));
    normals.push(Vec3::Z);
    verts.push(Vec3::new(0.0, 0.0, -h));
    normals.push(-Vec3::Z);
    let seg = segments as u32;
    let mut tris = Vec::new();
    stitch_rings(&mut tris, 0, 2, seg);
    cap_fan(&mut tris, 2 * seg, 0, seg, true);
    cap_fan(&mut tris, 2 * seg + 1, seg, seg, false);
    (verts, normals, tris)
}

fn capsule(radius: f64, length: f64, tess: Tessellation) -> Buffers {
    let seg = tess.segments;
    let half_rings = tess.rings.div_ceil(2).max(1);
    let h = length / 2.0;
    let mut verts = vec![Vec3::new(0.0, 0.0, h + radius)];
    let mut normals = vec![Vec3::Z];
    let push_ring = |theta: f64, center_z: f64, verts: &mut Vec<Vec3>, normals: &mut Vec<Vec3>| {
        let (st, ct) = theta.sin_cos();
        for s in 0..seg {
            let phi = 2.0 * PI * s as f64 / seg as f64;
            let (sp, cp) = phi.sin_cos();
            let n = Vec3::new(st * cp, st * sp, ct);
            verts.push(Vec3::new(0.0, 0.0, center_z) + n * radius);
            normals.push(n);
        }
    };
    // Top cap down to its equator, then bottom cap from its equator.
    for i in 1..=half_rings {
        let theta = 0.5 * PI * i as f64 / half_rings as f64;
        push_ring(theta, h, &mut verts, &mut normals);
    }
    for i in 0..half_rings {
        let theta = 0.5 * PI + 0.5 * PI * i as f64 / half_rings as f64;
        push_ring(theta, -h, &mut verts, &mut normals);
    }
    verts.push(Vec3::new(0.0, 0.0, -h - radius));
    normals.push(-Vec3::Z);
    let ring_count = (2 * half_rings) as u32;
    let seg = seg as u32;
    let mut tris = Vec::new();
    cap_fan(&mut tris, 0, 1, seg, false);
    stitch_rings(&mut tris, 1, ring_count, seg);
    let south = verts.len() as u32 - 1;
    cap_fan(&mut tris, south, 1 + (ring_count - 1) * seg, seg, true);
    (verts, normals, tris)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    fn spec(kind: ShapeKind) -> ShapeSpec {
        ShapeSpec::new(kind, Rgb::gray(0.5))
    }

    /// Every undirected edge is shared by exactly two triangles.
    fn is_watertight(mesh: &TriangleMesh) -> bool {
        let mut edges: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        edges.values().all(|&c| c == 2)
    }

    #[test]
    fn unit_box_has_box_topology() {
        let m = build_primitive(
            &spec(ShapeKind::Parallelepiped { x: 1.0, y: 1.0, z: 1.0 }),
            Tessellation::default(),
        )
        .unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.triangles.len(), 12);
        assert!(is_watertight(&m));
        assert_eq!(m.part_label, PartLabel::Distractor);
    }

    #[test]
    fn box_faces_wind_outward() {
        let m = build_primitive(
            &spec(ShapeKind::Parallelepiped { x: 2.0, y: 1.0, z: 0.5 }),
            Tessellation::default(),
        )
        .unwrap();
        for i in 0..m.triangles.len() {
            let [a, b, c] = m.triangle(i);
            let n = (b - a).cross(c - a);
            let centroid = (a + b + c) / 3.0;
            assert!(n.dot(centroid) > 0.0, "triangle {i} faces inward");
        }
    }

    #[test]
    fn ellipsoid_vertices_satisfy_implicit_equation() {
        let (a, b, c) = (0.3, 0.7, 1.9);
        let m = build_primitive(&spec(ShapeKind::Ellipsoid { a, b, c }), Tessellation::default())
            .unwrap();
        for v in &m.vertices {
            let f = (v.x / a).powi(2) + (v.y / b).powi(2) + (v.z / c).powi(2);
            assert!((f - 1.0).abs() < 1e-6, "{v:?} -> {f}");
        }
        assert!(is_watertight(&m));
        m.validate().unwrap();
    }

    #[test]
    fn zero_length_capsule_is_a_sphere() {
        let r = 0.42;
        let m = build_primitive(
            &spec(ShapeKind::Spherocylinder { radius: r, length: 0.0 }),
            Tessellation::default(),
        )
        .unwrap();
        for v in &m.vertices {
            assert!((v.length() - r).abs() < 1e-6);
        }
    }

    #[test]
    fn curved_shapes_are_closed_and_valid() {
        let kinds = [
            ShapeKind::EllipticCylinder { a: 0.2, b: 0.1, height: 0.5 },
            ShapeKind::Spherocylinder { radius: 0.1, length: 0.3 },
            ShapeKind::Ellipsoid { a: 1.0, b: 1.0, c: 1.0 },
        ];
        for kind in kinds {
            for tess in [Tessellation::new(3, 2), Tessellation::new(7, 5), Tessellation::default()] {
                let m = build_primitive(&spec(kind), tess).unwrap();
                m.validate().unwrap();
                assert!(is_watertight(&m), "{kind:?} {tess:?}");
            }
        }
    }

    #[test]
    fn capsule_radius_bounds_vertices() {
        let (radius, length) = (0.1, 0.4);
        let m = build_primitive(
            &spec(ShapeKind::Spherocylinder { radius, length }),
            Tessellation::default(),
        )
        .unwrap();
        for v in &m.vertices {
            let axis_z = v.z.clamp(-length / 2.0, length / 2.0);
            let d = (*v - Vec3::new(0.0, 0.0, axis_z)).length();
            assert!((d - radius).abs() < 1e-9);
        }
    }

    #[test]
    fn non_positive_dimension_is_rejected() {
        for kind in [
            ShapeKind::Ellipsoid { a: 0.0, b: 1.0, c: 1.0 },
            ShapeKind::Parallelepiped { x: 1.0, y: -1.0, z: 1.0 },
            ShapeKind::EllipticCylinder { a: 1.0, b: 1.0, height: 0.0 },
            ShapeKind::Spherocylinder { radius: 0.0, length: 1.0 },
            ShapeKind::Spherocylinder { radius: 1.0, length: -0.1 },
        ] {
            assert!(matches!(
                build_primitive(&spec(kind), Tessellation::default()),
                Err(SceneError::InvalidSpec(_))
            ));
        }
    }

    #[test]
    fn too_coarse_tessellation_is_rejected() {
        let s = spec(ShapeKind::Ellipsoid { a: 1.0, b: 1.0, c: 1.0 });
        assert!(matches!(
            build_primitive(&s, Tessellation::new(2, 4)),
            Err(SceneError::InvalidTessellation(_))
        ));
    }

    #[test]
    fn bounding_radius_contains_vertices() {
        let kinds = [
            ShapeKind::Ellipsoid { a: 0.1, b: 0.3, c: 0.2 },
            ShapeKind::Parallelepiped { x: 0.1, y: 0.3, z: 0.2 },
            ShapeKind::EllipticCylinder { a: 0.1, b: 0.3, height: 0.2 },
            ShapeKind::Spherocylinder { radius: 0.1, length: 0.3 },
        ];
        for kind in kinds {
            let m = build_primitive(&spec(kind), Tessellation::default()).unwrap();
            let r = kind.bounding_radius();
            assert!(m.vertices.iter().all(|v| v.length() <= r + 1e-12));
        }
    }
}
