use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::skeleton::Split;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Sample-weighted mean training loss.
    pub loss: f64,
    /// Top-1 of the training-mode scores seen during the epoch.
    pub train_top1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalMetrics {
    pub split: Split,
    pub samples: usize,
    pub top1: f64,
    /// Top-k accuracy with `k = min(5, classes)`.
    pub top5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub params: u64,
    pub macs: u64,
    pub epochs: Vec<EpochRecord>,
    /// Eval-mode accuracy on the training split after the last epoch.
    pub final_train: EvalMetrics,
    /// Eval-mode accuracy on the test split, when the dataset has one.
    pub eval: Option<EvalMetrics>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<RunReport> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("run report: {e}")))
    }

    /// JSON with the wall-clock field zeroed, for byte-level run comparison.
    pub fn reproducible_json(&self) -> String {
        RunReport {
            wall_clock_seconds: 0.0,
            ..self.clone()
        }
        .to_json()
    }
}
