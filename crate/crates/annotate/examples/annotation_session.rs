//! Annotate a directory of images through the session API and export the
//! result as an evaluation manifest. With `--serve PORT` the same session
//! is exposed over HTTP until ctrl-c instead.
//!
//! cargo run -p handforge-annotate --example annotation_session -- [--serve PORT]

use std::net::SocketAddr;

use handforge_annotate::{serve, AnnotationSession, AnnotationState, ServeConfig};

fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let dir = tempfile::tempdir()?;
    let images = dir.path().join("real");
    std::fs::create_dir(&images)?;
    for i in 0..3u8 {
        image::RgbImage::from_fn(80, 60, |x, y| image::Rgb([x as u8 * 3, y as u8 * 4, 40 * i]))
            .save(images.join(format!("frame_{i:02}.png")))?;
    }
    let store = dir.path().join("store");
    let export = dir.path().join("export/annotations.json");

    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [flag, port] = args.as_slice() {
        if flag == "--serve" {
            let cfg = ServeConfig {
                image_dir: images,
                store_dir: store,
                export_path: export,
                ui_dir: None,
                addr: SocketAddr::from(([127, 0, 0, 1], port.parse()?)),
            };
            let rt = tokio::runtime::Runtime::new()?;
            return rt.block_on(serve(cfg, |addr| println!("listening on http://{addr}")));
        }
    }

    let session = AnnotationSession::open(&images, &store, &export)?;
    let hand = vec![vec![[20.0, 15.0], [55.0, 12.0], [60.0, 40.0], [25.0, 45.0]]];
    session.put_annotation("frame_00", hand.clone(), AnnotationState::Committed)?;
    session.put_annotation("frame_01", hand, AnnotationState::Draft)?;
    for e in session.list_images() {
        println!("{} {}x{} {:?}", e.id, e.width, e.height, e.state);
    }
    let manifest = session.export()?;
    println!("exported {} committed record(s) to {}", manifest.records.len(), export.display());
    Ok(())
}
