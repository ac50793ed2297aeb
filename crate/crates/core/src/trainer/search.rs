use serde::{Deserialize, Serialize};

use super::{fit, EarlyStopConfig, FitError, FitResult, TrainError, TrainableModel};

/// Inclusive bounds for line-search learning rates.
pub const LR_RANGE: (f64, f64) = (1e-5, 1e-3);
pub const DEFAULT_LR_GRID: [f64; 4] = [1e-5, 1e-4, 2.5e-4, 1e-3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSearchConfig {
    pub grid: Vec<f64>,
    pub early_stop: EarlyStopConfig,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig {
            grid: DEFAULT_LR_GRID.to_vec(),
            early_stop: EarlyStopConfig::default(),
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.grid.is_empty() {
            return Err(TrainError::Config("learning-rate grid is empty".into()));
        }
        let (lo, hi) = LR_RANGE;
        if let Some(lr) = self.grid.iter().find(|&&lr| !(lo..=hi).contains(&lr)) {
            return Err(TrainError::Config(format!("learning rate {lr} outside [{lo}, {hi}]")));
        }
        self.early_stop.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrReport {
    pub lr: f64,
    pub best_epoch: usize,
    pub stopped_epoch: usize,
    pub best_val_total: f64,
    /// Mean IoU on the selection set.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult<M> {
    pub best_lr: f64,
    pub best_model: M,
    pub best_fit: FitResult,
    /// One entry per grid value, in grid order.
    pub reports: Vec<LrReport>,
}

/// Fit a fresh model per learning rate and keep the one whose `score`
/// (mean IoU on the designated validation set) is highest. Ties go to the
/// smaller rate.
pub fn line_search_lr<M, F, S>(
    mut factory: F,
    cfg: &LineSearchConfig,
    train: &M::Data,
    val: &M::Data,
    mut score: S,
) -> Result<LineSearchResult<M>, FitError>
where
    M: TrainableModel,
    F: FnMut(f64) -> M,
    S: FnMut(&M) -> Result<f64, TrainError>,
{
    cfg.validate().map_err(|source| FitError {
        epoch: 0,
        history: vec![],
        source,
    })?;
    let mut reports = Vec::new();
    let mut best: Option<(f64, f64, M, FitResult)> = None;
    for &lr in &cfg.grid {
        let mut model = factory(lr);
        let result = fit(&mut model, train, val, lr, &cfg.early_stop)?;
        let s = score(&model).map_err(|source| FitError {
            epoch: result.stopped_epoch(),
            history: result.history.clone(),
            source,
        })?;
        reports.push(LrReport {
            lr,
            best_epoch: result.best.epoch,
            stopped_epoch: result.stopped_epoch(),
            best_val_total: result.best.val_total(),
            score: s,
        });
        let better = match &best {
            None => true,
            Some((best_s, best_lr, _, _)) => s > *best_s || (s == *best_s && lr < *best_lr),
        };
        if better {
            best = Some((s, lr, model, result));
        }
    }
    let (_, best_lr, best_model, best_fit) = best.expect("grid is nonempty");
    Ok(LineSearchResult {
        best_lr,
        best_model,
        best_fit,
        reports,
    })
}
