//! Model-agnostic training: early stopping, checkpoints, freezing and a
//! learning-rate line search, plus a small per-pixel reference model.

mod checkpoint;
mod pixel;
mod search;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{Checkpoint, CheckpointFile, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use pixel::{
    base_features, expand_features, intensity_std3, PixelSegmenter, PixelSet, SegmenterSettings,
    BASE_FEATURES, PARAMS,
};
pub use search::{line_search_lr, LineSearchConfig, LineSearchResult, LrReport, DEFAULT_LR_GRID, LR_RANGE};

use crate::detection::{total_loss, LossBreakdown};
use crate::render::BinaryMask;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown parameter group {0:?}")]
    UnknownGroup(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("data: {0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model failure: {0}")]
    Model(String),
}

/// Where initial parameters come from.
#[derive(Debug, Clone)]
pub enum WeightSource<'a> {
    Fresh { seed: u64 },
    Checkpoint(&'a Checkpoint),
}

/// Named parameter groups excluded from updates. Freezing accumulates:
/// applying `S` then `T` freezes `S ∪ T`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeSpec {
    pub groups: BTreeSet<String>,
}

impl FreezeSpec {
    pub fn groups<I: IntoIterator<Item = S>, S: Into<String>>(groups: I) -> Self {
        FreezeSpec {
            groups: groups.into_iter().map(Into::into).collect(),
        }
    }

    pub fn union(&self, other: &FreezeSpec) -> FreezeSpec {
        FreezeSpec {
            groups: self.groups.union(&other.groups).cloned().collect(),
        }
    }
}

/// What the training loop needs from a model.
pub trait TrainableModel {
    /// Training and validation data.
    type Data: ?Sized;
    type Input: ?Sized;

    fn initialize(&mut self, source: WeightSource<'_>) -> Result<(), TrainError>;
    fn train_epoch(&mut self, data: &Self::Data, lr: f64) -> Result<LossBreakdown, TrainError>;
    /// Must not change parameters.
    fn validation_loss(&self, data: &Self::Data) -> Result<LossBreakdown, TrainError>;
    fn predict(&self, input: &Self::Input) -> BinaryMask;
    fn parameters(&self) -> Vec<f64>;
    fn set_parameters(&mut self, params: &[f64]) -> Result<(), TrainError>;
    /// Frozen parameters stay bit-identical through `train_epoch`.
    fn freeze(&mut self, spec: &FreezeSpec) -> Result<(), TrainError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopConfig {
    pub patience: usize,
    pub max_epochs: usize,
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        EarlyStopConfig {
            patience: 15,
            max_epochs: 150,
        }
    }
}

impl EarlyStopConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.patience == 0 || self.patience > self.max_epochs {
            return Err(TrainError::Config(format!(
                "need 1 <= patience <= max_epochs, got patience={} max_epochs={}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train: LossBreakdown,
    pub val: LossBreakdown,
}

impl EpochRecord {
    pub fn val_total(&self) -> f64 {
        total_loss(&self.val)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub best: Checkpoint,
    pub history: Vec<EpochRecord>,
}

impl FitResult {
    pub fn stopped_epoch(&self) -> usize {
        self.history.len()
    }
}

#[derive(Debug, Error)]
#[error("training failed at epoch {epoch}: {source}")]
pub struct FitError {
    pub epoch: usize,
    pub history: Vec<EpochRecord>,
    #[source]
    pub source: TrainError,
}

/// Train until the total validation loss has not strictly improved for
/// `patience` epochs or `max_epochs` is reached. The model is left holding
/// the best checkpoint's parameters.
pub fn fit<M: TrainableModel + ?Sized>(
    model: &mut M,
    train: &M::Data,
    val: &M::Data,
    lr: f64,
    cfg: &EarlyStopConfig,
) -> Result<FitResult, FitError> {
    fit_with_progress(model, train, val, lr, cfg, |_| {})
}

pub fn fit_with_progress<M: TrainableModel + ?Sized>(
    model: &mut M,
    train: &M::Data,
    val: &M::Data,
    lr: f64,
    cfg: &EarlyStopConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<FitResult, FitError> {
    let fail = |epoch, history: &Vec<EpochRecord>, source| FitError {
        epoch,
        history: history.clone(),
        source,
    };
    let mut history = Vec::new();
    cfg.validate().map_err(|e| fail(0, &history, e))?;
    let mut best: Option<Checkpoint> = None;
    let mut since_best = 0;
    for epoch in 1..=cfg.max_epochs {
        let train_loss = model.train_epoch(train, lr).map_err(|e| fail(epoch, &history, e))?;
        let val_loss = model.validation_loss(val).map_err(|e| fail(epoch, &history, e))?;
        let rec = EpochRecord {
            epoch,
            train: train_loss,
            val: val_loss,
        };
        history.push(rec);
        on_epoch(&rec);
        let total = rec.val_total();
        if best.as_ref().is_none_or(|b| total < b.val_total()) {
            best = Some(Checkpoint {
                epoch,
                parameters: model.parameters(),
                val_loss,
            });
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    let best = best.expect("at least one epoch runs");
    model
        .set_parameters(&best.parameters)
        .map_err(|e| fail(history.len(), &history, e))?;
    Ok(FitResult { best, history })
}

/// CSV with columns `epoch`, the five training losses, `total`, `val_total`.
pub fn training_log_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from(
        "epoch,rpn_class_loss,rpn_bbox_loss,mrcnn_class_loss,mrcnn_bbox_loss,mrcnn_mask_loss,total,val_total\n",
    );
    for r in history {
        write!(s, "{}", r.epoch).unwrap();
        for v in r.train.as_array() {
            write!(s, ",{v}").unwrap();
        }
        writeln!(s, ",{},{}", total_loss(&r.train), r.val_total()).unwrap();
    }
    s
}
