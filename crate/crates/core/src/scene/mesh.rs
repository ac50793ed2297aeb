use serde::{Deserialize, Serialize};

use super::{Rgb, SceneError, Transform, Vec3};

/// Semantic part a triangle belongs to. The discriminant is the value stored
/// in instance buffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum PartLabel {
    Background = 0,
    Hand = 1,
    Arm = 2,
    Distractor = 3,
}

impl PartLabel {
    pub fn from_u8(v: u8) -> Option<PartLabel> {
        match v {
            0 => Some(PartLabel::Background),
            1 => Some(PartLabel::Hand),
            2 => Some(PartLabel::Arm),
            3 => Some(PartLabel::Distractor),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    /// One unit normal per vertex.
    pub normals: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub part_label: PartLabel,
    pub base_color: Rgb,
}

impl TriangleMesh {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.triangles.is_empty() {
            return Err(SceneError::InvalidMesh("mesh has no triangles".into()));
        }
        if self.normals.len() != self.vertices.len() {
            return Err(SceneError::InvalidMesh(format!(
                "{} normals for {} vertices",
                self.normals.len(),
                self.vertices.len()
            )));
        }
        let n = self.vertices.len();
        if let Some(t) = self
            .triangles
            .iter()
            .find(|t| t.iter().any(|&i| i as usize >= n))
        {
            return Err(SceneError::InvalidMesh(format!(
                "triangle {t:?} references a vertex beyond {n}"
            )));
        }
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(SceneError::InvalidMesh("non-finite vertex".into()));
        }
        if self
            .normals
            .iter()
            .any(|v| (v.length() - 1.0).abs() > 1e-6)
        {
            return Err(SceneError::InvalidMesh("normal is not unit length".into()));
        }
        Ok(())
    }

    pub fn transformed(&self, t: &Transform) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|&v| t.point(v)).collect(),
            normals: self.normals.iter().map(|&n| t.vector(n)).collect(),
            triangles: self.triangles.clone(),
            part_label: self.part_label,
            base_color: self.base_color,
        }
    }

    pub fn with_label(mut self, label: PartLabel) -> Self {
        self.part_label = label;
        self
    }

    pub fn with_color(mut self, color: Rgb) -> Self {
        self.base_color = color;
        self
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[i];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Area-weighted vertex normals from the faces; vertices touching no
    /// face get `+Z`.
    pub fn face_averaged_normals(vertices: &[Vec3], triangles: &[[u32; 3]]) -> Vec<Vec3> {
        let mut acc = vec![Vec3::ZERO; vertices.len()];
        for t in triangles {
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            let n = (b - a).cross(c - a);
            for &i in t {
                acc[i as usize] += n;
            }
        }
        acc.into_iter()
            .map(|n| if n.length() > 0.0 { n.normalized() } else { Vec3::Z })
            .collect()
    }
}
