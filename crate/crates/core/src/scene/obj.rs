use std::fmt::Write as _;

use super::{PartLabel, Rgb, SceneError, TriangleMesh, Vec3};

/// Parse the `v` / `vn` / `f` subset of Wavefront OBJ.
///
/// Face corners may be `v`, `v/vt`, `v//vn` or `v/vt/vn`; negative indices
/// count back from the most recent record. Polygons are fan-triangulated
/// from their first corner. Vertices never given a normal get the
/// area-weighted average of their faces. Other record types are ignored.
pub fn parse_mesh_file(text: &str) -> Result<TriangleMesh, SceneError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut file_normals: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut assigned: Vec<Option<Vec3>> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut parts = line.split_whitespace();
        let Some(tag) = parts.next() else { continue };
        let parse_err = |message: String| SceneError::Parse {
            line: line_no,
            message,
        };
        match tag {
            "v" | "vn" => {
                let nums: Vec<f64> = parts
                    .map(|p| p.parse::<f64>().map_err(|_| parse_err(format!("bad number {p:?}"))))
                    .collect::<Result<_, _>>()?;
                // `v` may carry an optional w / vertex color; only xyz matter.
                let ok = if tag == "v" { nums.len() >= 3 } else { nums.len() == 3 };
                if !ok || nums.iter().any(|n| !n.is_finite()) {
                    return Err(parse_err(format!("{tag} needs 3 finite coordinates")));
                }
                let v = Vec3::new(nums[0], nums[1], nums[2]);
                if tag == "v" {
                    vertices.push(v);
                    assigned.push(None);
                } else {
                    file_normals.push(v.normalized());
                }
            }
            "f" => {
                let mut corners = Vec::new();
                for corner in parts {
                    let mut fields = corner.split('/');
                    let v_idx = fields.next().unwrap_or("");
                    let _vt = fields.next();
                    let vn_idx = fields.next().filter(|s| !s.is_empty());
                    if fields.next().is_some() {
                        return Err(parse_err(format!("bad face corner {corner:?}")));
                    }
                    let v = resolve(v_idx, vertices.len(), line_no)?;
                    let n = vn_idx
                        .map(|s| resolve(s, file_normals.len(), line_no))
                        .transpose()?;
                    corners.push((v, n));
                }
                if corners.len() < 3 {
                    return Err(parse_err("face needs at least 3 corners".into()));
                }
                for &(v, n) in &corners {
                    if let Some(n) = n {
                        assigned[v] = Some(file_normals[n]);
                    }
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0].0 as u32, corners[k].0 as u32, corners[k + 1].0 as u32]);
                }
            }
            _ => {}
        }
    }
    if triangles.is_empty() {
        return Err(SceneError::Parse {
            line: text.lines().count(),
            message: "no faces".into(),
        });
    }
    let computed = TriangleMesh::face_averaged_normals(&vertices, &triangles);
    let normals = assigned
        .into_iter()
        .zip(computed)
        .map(|(a, c)| match a {
            Some(n) if (n.length() - 1.0).abs() < 1e-6 => n,
            _ => c,
        })
        .collect();
    Ok(TriangleMesh {
        vertices,
        normals,
        triangles,
        part_label: PartLabel::Hand,
        base_color: Rgb::gray(0.8),
    })
}

fn resolve(field: &str, count: usize, line: usize) -> Result<usize, SceneError> {
    let idx: i64 = field.parse().map_err(|_| SceneError::Parse {
        line,
        message: format!("bad index {field:?}"),
    })?;
    let resolved = if idx > 0 {
        idx - 1
    } else if idx < 0 {
        count as i64 + idx
    } else {
        -1
    };
    if resolved < 0 || resolved as usize >= count {
        return Err(SceneError::Index {
            line,
            index: idx,
            count,
        });
    }
    Ok(resolved as usize)
}

/// Write a mesh as OBJ with one normal per vertex (`f a//a b//b c//c`).
pub fn serialize_mesh(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for n in &mesh.normals {
        let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
    }
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| i + 1);
        let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
    }
    out
}
