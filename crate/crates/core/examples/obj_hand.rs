//! Replace the procedural hand with a mesh loaded from a Wavefront OBJ and
//! render one Set A scene with it.
//!
//! cargo run -p handforge --example obj_hand

use handforge::render::mask_from_instance;
use handforge::scene::{parse_mesh_file, serialize_mesh};
use handforge::{DatasetPreset, PartLabel, RandomizationConfig, Renderer, SceneSampler};

/// A flat "mitten": a 9 x 8 x 2.5 cm box extending from the wrist along +X.
const MITTEN: &str = "\
# wrist-frame coordinates, meters
v 0.00 -0.040 -0.0125
v 0.09 -0.040 -0.0125
v 0.09  0.040 -0.0125
v 0.00  0.040 -0.0125
v 0.00 -0.040  0.0125
v 0.09 -0.040  0.0125
v 0.09  0.040  0.0125
v 0.00  0.040  0.0125
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = parse_mesh_file(MITTEN)?;
    println!("parsed {} vertices, {} triangles", mesh.vertices.len(), mesh.triangles.len());

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("mitten.obj");
    std::fs::write(&path, serialize_mesh(&mesh))?;

    let config = RandomizationConfig { hand_mesh: Some(path), ..Default::default() };
    let renderer = Renderer::from_config(&config)?;
    let scene = SceneSampler::new(&config, DatasetPreset::SolidBgHand, 3)?.sample(0);
    let frame = renderer.render(&scene)?;
    let mask = mask_from_instance(&frame.instance, PartLabel::Hand);
    println!("mitten covers {} of {} pixels", mask.count(), frame.instance.labels.len());
    Ok(())
}
