use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use clap::Args;
use handforge_annotate::{serve, ServeConfig};

use crate::config::{pick, FileConfig};
use crate::usage;

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Directory of real images (png, jpg, bmp); the files are never modified.
    #[arg(long)]
    pub images: PathBuf,
    /// TCP port; 0 picks a free one [default: 8080].
    #[arg(long)]
    pub port: Option<u16>,
    /// Bind address [default: 127.0.0.1].
    #[arg(long)]
    pub host: Option<String>,
    /// Where per-image annotations and the exported annotations.json go
    /// [default: annotations].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Built annotator UI to serve at `/`.
    #[arg(long)]
    pub ui: Option<PathBuf>,
}

pub fn run(a: AnnotateArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    let c = &cfg.annotate;
    let host = pick(a.host, c.host.clone(), "127.0.0.1".into());
    let ip: IpAddr = host.parse().map_err(|_| usage(format!("--host {host:?} is not an IP address")))?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("annotations"));
    let serve_cfg = ServeConfig {
        image_dir: a.images,
        store_dir: out.join("store"),
        export_path: out.join(handforge::dataset::ANNOTATIONS_FILE),
        ui_dir: a.ui.or(c.ui.clone()),
        addr: SocketAddr::new(ip, pick(a.port, c.port, 8080)),
    };
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(serve(serve_cfg, |addr| {
        println!("listening on http://{addr}");
    }))
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    println!("shut down");
    Ok(())
}
