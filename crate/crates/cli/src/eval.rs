use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use handforge::dataset::{DatasetManifest, Split};
use handforge::eval::{evaluate_with, EvalError, MetricReport, ModelIdentity};
use handforge::trainer::{CheckpointFile, PixelSegmenter, SegmenterSettings, TrainableModel};

use crate::config::{parse_split, FileConfig};
use crate::usage;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TEXT: &str = "report.txt";

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint written by `train`.
    #[arg(long, required_unless_present = "ground_truth", conflicts_with = "ground_truth")]
    pub model: Option<PathBuf>,
    /// Score the stored annotations against themselves instead of a model.
    #[arg(long)]
    pub ground_truth: bool,
    /// Dataset directory or annotations.json.
    #[arg(long)]
    pub data: PathBuf,
    /// train, val, test or all [default: val if present, else test, else all].
    #[arg(long)]
    pub split: Option<String>,
    /// Output directory for report.{json,csv,txt} [default: eval].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn load_model(path: &Path) -> anyhow::Result<(PixelSegmenter, ModelIdentity)> {
    let file = CheckpointFile::load(path)?;
    if file.model != PixelSegmenter::NAME {
        anyhow::bail!("{}: unsupported model {:?}", path.display(), file.model);
    }
    let settings = match file.metadata.get("settings") {
        Some(s) => serde_json::from_str(s).with_context(|| format!("{}: bad settings", path.display()))?,
        None => SegmenterSettings::default(),
    };
    let mut model = PixelSegmenter::new(settings, 0);
    model.set_parameters(&file.checkpoint.parameters)?;
    let train_preset = match file.metadata.get("train_preset") {
        Some(p) => Some(p.parse().map_err(|e: String| anyhow::anyhow!("{}: {e}", path.display()))?),
        None => None,
    };
    Ok((model, ModelIdentity { name: file.model, train_preset }))
}

pub fn default_split(manifest: &DatasetManifest) -> Option<Split> {
    [Split::Val, Split::Test].into_iter().find(|&s| manifest.count(s) > 0)
}

pub fn evaluate_model(
    manifest: &DatasetManifest,
    split: Option<Split>,
    model: &PixelSegmenter,
    id: ModelIdentity,
) -> Result<MetricReport, EvalError> {
    evaluate_with(manifest, split, id, |r| {
        manifest.load_image(r).map(|img| model.predict(&img)).map_err(EvalError::from)
    })
}

pub fn write_report(out: &Path, report: &MetricReport) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let json = serde_json::to_string_pretty(report).unwrap() + "\n";
    for (name, body) in [
        (REPORT_JSON, json),
        (REPORT_CSV, MetricReport::to_csv(std::slice::from_ref(report))),
        (REPORT_TEXT, report.to_text()),
    ] {
        std::fs::write(out.join(name), body).with_context(|| format!("writing {name}"))?;
    }
    Ok(())
}

pub fn run(a: EvalArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    let manifest = DatasetManifest::read(&a.data).with_context(|| format!("loading dataset {}", a.data.display()))?;
    let split = match a.split.as_deref().or(cfg.eval.split.as_deref()) {
        Some(s) => parse_split(s)?,
        None => default_split(&manifest),
    };
    let report = match &a.model {
        Some(path) => {
            let (model, id) = load_model(path)?;
            evaluate_model(&manifest, split, &model, id)?
        }
        None if a.ground_truth => {
            let id = ModelIdentity { name: "ground-truth".into(), train_preset: None };
            evaluate_with(&manifest, split, id, |r| r.annotation.decode_mask().map_err(EvalError::from))?
        }
        None => return Err(usage("either --model or --ground-truth is required")),
    };
    let out = a.out.unwrap_or_else(|| PathBuf::from("eval"));
    write_report(&out, &report)?;
    print!("{}", report.to_text());
    println!("report -> {}", out.display());
    Ok(())
}
