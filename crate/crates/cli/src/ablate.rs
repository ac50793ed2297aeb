use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use handforge::dataset::{generate_dataset, DatasetManifest, Split};
use handforge::eval::{ablation_report, AblationTable, MetricReport};
use handforge::DatasetPreset;

use crate::config::{default_jobs, pick, FileConfig};
use crate::eval::{evaluate_model, write_report, REPORT_JSON};
use crate::train::{identity, train_on, write_outputs, TrainArgs, TrainPlan};
use crate::{generate, usage};

pub const TABLE_CSV: &str = "ablation.csv";
pub const TABLE_TEXT: &str = "ablation.txt";

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// report.json files written by `eval`, or directories holding one.
    #[arg(long, num_args = 1.., required_unless_present = "run", conflicts_with = "run")]
    pub reports: Vec<PathBuf>,
    /// Generate sets A..F, train one model per set and score every model on
    /// every validation split.
    #[arg(long)]
    pub run: bool,
    /// Images per generated set with --run [default: 1000].
    #[arg(long, requires = "run")]
    pub count: Option<usize>,
    /// Dataset and training seed with --run [default: 0].
    #[arg(long, requires = "run")]
    pub seed: Option<u64>,
    /// Learning rate with --run [default: 0.00025].
    #[arg(long, requires = "run")]
    pub lr: Option<f64>,
    /// Early-stopping patience with --run [default: 15].
    #[arg(long, requires = "run")]
    pub patience: Option<usize>,
    /// Epoch cap with --run [default: 150].
    #[arg(long, requires = "run")]
    pub max_epochs: Option<usize>,
    /// Pixels sampled per image with --run [default: 1024].
    #[arg(long, requires = "run")]
    pub pixels_per_image: Option<usize>,
    /// Generation threads with --run [default: available cores].
    #[arg(long, requires = "run")]
    pub jobs: Option<usize>,
    /// Output directory [default: ablation].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_report(path: &Path) -> anyhow::Result<MetricReport> {
    let file = if path.is_dir() { path.join(REPORT_JSON) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: not a metric report", file.display()))
}

fn write_table(out: &Path, table: &AblationTable) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join(TABLE_CSV), table.to_csv())?;
    std::fs::write(out.join(TABLE_TEXT), table.to_text())?;
    Ok(())
}

fn run_all(a: &AblateArgs, cfg: &FileConfig, out: &Path) -> anyhow::Result<Vec<MetricReport>> {
    let count = pick(a.count, cfg.generate.count, 1000);
    let seed = pick(a.seed, cfg.generate.seed, 0);
    let jobs = pick(a.jobs, cfg.generate.jobs, default_jobs());
    if count < 2 || jobs == 0 {
        return Err(usage("--run needs --count >= 2 and --jobs >= 1"));
    }
    let plan = TrainPlan::resolve(
        &TrainArgs {
            data: PathBuf::new(),
            lr: a.lr,
            lr_search: false,
            lr_grid: None,
            patience: a.patience,
            max_epochs: a.max_epochs,
            pixels_per_image: a.pixels_per_image,
            seed: Some(seed),
            out: None,
        },
        cfg,
    )?;
    let mut sets: Vec<DatasetManifest> = Vec::new();
    for preset in DatasetPreset::ALL {
        let dir = out.join("data").join(format!("set_{}", preset.letter().to_ascii_lowercase()));
        let mut opts = handforge::dataset::GenerateOptions::new(preset, count, seed);
        opts.jobs = jobs;
        opts.train_fraction = pick(None, cfg.generate.train_fraction, 0.8);
        let m = generate_dataset(&cfg.randomization, &opts, &dir)?;
        println!("set {preset}: {}", generate::summary(&m));
        sets.push(m);
    }
    let mut reports = Vec::new();
    for train_set in &sets {
        let letter = train_set.name.trim_start_matches("set_").to_string();
        let trained = train_on(train_set, &plan)?;
        write_outputs(&out.join("train").join(&letter), &trained, &plan)?;
        println!(
            "trained on {}: lr {} best epoch {} of {}",
            train_set.name,
            trained.lr,
            trained.fit.best.epoch,
            trained.fit.stopped_epoch()
        );
        for eval_set in &sets {
            let r = evaluate_model(eval_set, Some(Split::Val), &trained.model, identity(train_set))?;
            write_report(&out.join("reports").join(format!("{letter}_on_{}", eval_set.name)), &r)?;
            reports.push(r);
        }
    }
    Ok(reports)
}

pub fn run(a: AblateArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("ablation"));
    let reports = if a.run {
        run_all(&a, cfg, &out)?
    } else {
        a.reports.iter().map(|p| read_report(p)).collect::<anyhow::Result<Vec<_>>>()?
    };
    let table = ablation_report(&reports);
    write_table(&out, &table)?;
    print!("{}", table.to_text());
    println!("table -> {}", out.join(TABLE_CSV).display());
    Ok(())
}
