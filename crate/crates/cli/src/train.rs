use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use handforge::dataset::{DatasetManifest, Provenance, Split};
use handforge::eval::{evaluate_with, EvalError, ModelIdentity};
use handforge::trainer::{
    fit, line_search_lr, training_log_csv, CheckpointFile, EarlyStopConfig, FitResult, LineSearchConfig,
    LrReport, PixelSegmenter, PixelSet, SegmenterSettings, TrainError, TrainableModel, DEFAULT_LR_GRID,
};

use crate::config::{pick, FileConfig};
use crate::usage;

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const LOG_FILE: &str = "training_log.csv";
pub const SEARCH_FILE: &str = "lr_search.csv";

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory or annotations.json with train and val records.
    #[arg(long)]
    pub data: PathBuf,
    /// Learning rate for a single run [default: 0.00025].
    #[arg(long, conflicts_with = "lr_search")]
    pub lr: Option<f64>,
    /// Fit once per rate in --lr-grid and keep the best validation IoU.
    #[arg(long)]
    pub lr_search: bool,
    /// Comma-separated rates for --lr-search, each within [1e-5, 1e-3]
    /// [default: 1e-5,1e-4,2.5e-4,1e-3].
    #[arg(long, value_delimiter = ',', requires = "lr_search")]
    pub lr_grid: Option<Vec<f64>>,
    /// Epochs without validation improvement before stopping [default: 15].
    #[arg(long)]
    pub patience: Option<usize>,
    /// Upper bound on epochs [default: 150].
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Pixels sampled per image for training and validation [default: 1024].
    #[arg(long)]
    pub pixels_per_image: Option<usize>,
    /// Seeds weight init, pixel sampling and shuffling [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for the checkpoint and logs [default: train].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved training settings.
#[derive(Debug, Clone)]
pub struct TrainPlan {
    pub grid: Option<Vec<f64>>,
    pub lr: f64,
    pub early_stop: EarlyStopConfig,
    pub pixels_per_image: usize,
    pub seed: u64,
    pub settings: SegmenterSettings,
}

impl TrainPlan {
    pub fn resolve(a: &TrainArgs, cfg: &FileConfig) -> anyhow::Result<TrainPlan> {
        let t = &cfg.train;
        let defaults = EarlyStopConfig::default();
        let early_stop = EarlyStopConfig {
            patience: pick(a.patience, t.patience, defaults.patience),
            max_epochs: pick(a.max_epochs, t.max_epochs, defaults.max_epochs),
        };
        early_stop.validate().map_err(|e| usage(e.to_string()))?;
        let lr = pick(a.lr, t.lr, 2.5e-4);
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(usage(format!("--lr must be finite and >= 0, got {lr}")));
        }
        let grid = a
            .lr_search
            .then(|| a.lr_grid.clone().or_else(|| t.lr_grid.clone()).unwrap_or(DEFAULT_LR_GRID.to_vec()));
        if let Some(g) = &grid {
            LineSearchConfig { grid: g.clone(), early_stop }
                .validate()
                .map_err(|e| usage(e.to_string()))?;
        }
        let pixels_per_image = pick(a.pixels_per_image, t.pixels_per_image, 1024);
        if pixels_per_image == 0 {
            return Err(usage("--pixels-per-image must be at least 1"));
        }
        let seed = pick(a.seed, t.seed, 0);
        let d = SegmenterSettings::default();
        let settings = SegmenterSettings {
            batch_size: t.batch_size.unwrap_or(d.batch_size),
            momentum: t.momentum.unwrap_or(d.momentum),
            shuffle_seed: seed,
            threshold: t.threshold.unwrap_or(d.threshold),
        };
        Ok(TrainPlan { grid, lr, early_stop, pixels_per_image, seed, settings })
    }
}

pub struct Trained {
    pub model: PixelSegmenter,
    pub lr: f64,
    pub fit: FitResult,
    pub search: Option<Vec<LrReport>>,
    pub checkpoint: CheckpointFile,
}

pub fn identity(manifest: &DatasetManifest) -> ModelIdentity {
    ModelIdentity {
        name: PixelSegmenter::NAME.into(),
        train_preset: match manifest.provenance {
            Provenance::Synthetic(p) => Some(p),
            Provenance::Real => None,
        },
    }
}

pub fn val_iou(manifest: &DatasetManifest, model: &PixelSegmenter) -> Result<f64, EvalError> {
    let report = evaluate_with(manifest, Some(Split::Val), identity(manifest), |r| {
        manifest.load_image(r).map(|img| model.predict(&img)).map_err(EvalError::from)
    })?;
    Ok(report.mean.iou)
}

pub fn train_on(manifest: &DatasetManifest, plan: &TrainPlan) -> anyhow::Result<Trained> {
    if manifest.count(Split::Train) == 0 || manifest.count(Split::Val) == 0 {
        anyhow::bail!("{} needs both train and val records", manifest.name);
    }
    let train = PixelSet::from_manifest(manifest, Some(Split::Train), plan.pixels_per_image, plan.seed)?;
    let val = PixelSet::from_manifest(manifest, Some(Split::Val), plan.pixels_per_image, plan.seed.wrapping_add(1))?;
    let fresh = || PixelSegmenter::new(plan.settings, plan.seed);
    let (model, lr, fit_result, search) = match &plan.grid {
        Some(grid) => {
            let cfg = LineSearchConfig { grid: grid.clone(), early_stop: plan.early_stop };
            let score = |m: &PixelSegmenter| val_iou(manifest, m).map_err(|e| TrainError::Data(e.to_string()));
            let r = line_search_lr(|_| fresh(), &cfg, &train, &val, score)?;
            (r.best_model, r.best_lr, r.best_fit, Some(r.reports))
        }
        None => {
            let mut m = fresh();
            let r = fit(&mut m, &train, &val, plan.lr, &plan.early_stop)?;
            (m, plan.lr, r, None)
        }
    };
    let mut checkpoint = CheckpointFile::new(PixelSegmenter::NAME, fit_result.best.clone());
    let md = &mut checkpoint.metadata;
    md.insert("dataset".into(), manifest.name.clone());
    if let Provenance::Synthetic(p) = manifest.provenance {
        md.insert("train_preset".into(), p.to_string());
    }
    md.insert("lr".into(), lr.to_string());
    md.insert("patience".into(), plan.early_stop.patience.to_string());
    md.insert("max_epochs".into(), plan.early_stop.max_epochs.to_string());
    md.insert("seed".into(), plan.seed.to_string());
    md.insert("pixels_per_image".into(), plan.pixels_per_image.to_string());
    md.insert("settings".into(), serde_json::to_string(&plan.settings).unwrap());
    Ok(Trained { model, lr, fit: fit_result, search, checkpoint })
}

/// Training log with `#` header lines recording the run settings.
pub fn log_text(t: &Trained, plan: &TrainPlan) -> String {
    let mut s = String::new();
    writeln!(s, "# model={}", PixelSegmenter::NAME).unwrap();
    writeln!(s, "# lr={}", t.lr).unwrap();
    writeln!(s, "# patience={}", plan.early_stop.patience).unwrap();
    writeln!(s, "# max_epochs={}", plan.early_stop.max_epochs).unwrap();
    writeln!(s, "# best_epoch={}", t.fit.best.epoch).unwrap();
    s + &training_log_csv(&t.fit.history)
}

pub fn search_csv(reports: &[LrReport]) -> String {
    let mut s = String::from("lr,best_epoch,stopped_epoch,best_val_total,val_iou\n");
    for r in reports {
        writeln!(s, "{},{},{},{},{}", r.lr, r.best_epoch, r.stopped_epoch, r.best_val_total, r.score).unwrap();
    }
    s
}

pub fn write_outputs(out: &Path, t: &Trained, plan: &TrainPlan) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    t.checkpoint.save(&out.join(CHECKPOINT_FILE))?;
    std::fs::write(out.join(LOG_FILE), log_text(t, plan)).with_context(|| format!("writing {LOG_FILE}"))?;
    if let Some(reports) = &t.search {
        std::fs::write(out.join(SEARCH_FILE), search_csv(reports)).with_context(|| format!("writing {SEARCH_FILE}"))?;
    }
    Ok(())
}

pub fn run(a: TrainArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    let plan = TrainPlan::resolve(&a, cfg)?;
    let manifest = DatasetManifest::read(&a.data).with_context(|| format!("loading dataset {}", a.data.display()))?;
    let trained = train_on(&manifest, &plan)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("train"));
    write_outputs(&out, &trained, &plan)?;
    println!(
        "patience {} max_epochs {} on {} ({} train, {} val images)",
        plan.early_stop.patience,
        plan.early_stop.max_epochs,
        manifest.name,
        manifest.count(Split::Train),
        manifest.count(Split::Val)
    );
    if let Some(reports) = &trained.search {
        println!("{:>10} {:>10} {:>8} {:>12} {:>8}", "lr", "best_epoch", "stopped", "val_loss", "val_iou");
        for r in reports {
            println!(
                "{:>10} {:>10} {:>8} {:>12.6} {:>8.4}",
                r.lr, r.best_epoch, r.stopped_epoch, r.best_val_total, r.score
            );
        }
    }
    println!(
        "lr {}: best epoch {} of {}, val loss {:.6}",
        trained.lr,
        trained.fit.best.epoch,
        trained.fit.stopped_epoch(),
        trained.fit.best.val_total()
    );
    println!("checkpoint -> {}", out.join(CHECKPOINT_FILE).display());
    Ok(())
}
