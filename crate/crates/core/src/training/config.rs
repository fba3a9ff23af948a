use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{Preprocess, Stream, DEFAULT_TARGET_FRAMES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub base_lr: f64,
    pub momentum: f64,
    pub nesterov: bool,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay_factor: f64,
    pub weight_decay: f64,
    pub seed: u64,
    /// Frames every clip is replay-padded (or truncated) to.
    pub target_frames: usize,
    pub center: bool,
    /// After the last epoch, replace the batch-norm running statistics by
    /// their average over one pass of the training split.
    pub recalibrate_bn: bool,
    /// Write a checkpoint every this many epochs, and after the last one.
    pub checkpoint_every: Option<usize>,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            base_lr: 0.1,
            momentum: 0.9,
            nesterov: true,
            batch_size: 32,
            epochs: 50,
            lr_decay_epochs: vec![30, 40],
            lr_decay_factor: 0.1,
            weight_decay: 1e-4,
            seed: 0,
            target_frames: DEFAULT_TARGET_FRAMES,
            center: true,
            recalibrate_bn: false,
            checkpoint_every: None,
            checkpoint_dir: None,
        }
    }
}

impl TrainConfig {
    /// Short schedule for the small synthetic datasets: 30 epochs on 64-frame
    /// clips, one decay step at epoch 22, statistics recalibrated at the end.
    pub fn desk() -> Self {
        TrainConfig {
            epochs: 30,
            lr_decay_epochs: vec![22],
            target_frames: 64,
            recalibrate_bn: true,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if !self.base_lr.is_finite() || self.base_lr < 0.0 {
            return Err(Error::config("base_lr must be finite and non-negative"));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::config("weight_decay must be finite and non-negative"));
        }
        if self.target_frames == 0 {
            return Err(Error::config("target_frames must be positive"));
        }
        if self.checkpoint_every == Some(0) {
            return Err(Error::config("checkpoint_every must be positive"));
        }
        if self.checkpoint_every.is_some() && self.checkpoint_dir.is_none() {
            return Err(Error::config("checkpoint_every needs checkpoint_dir"));
        }
        Ok(())
    }

    pub fn preprocess(&self, stream: Stream) -> Preprocess {
        Preprocess {
            target_frames: self.target_frames,
            center: self.center,
            stream,
        }
    }
}

/// How clips are prepared and batched for inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub target_frames: usize,
    pub center: bool,
    pub batch_size: usize,
}

impl From<&TrainConfig> for EvalOptions {
    fn from(c: &TrainConfig) -> Self {
        EvalOptions {
            target_frames: c.target_frames,
            center: c.center,
            batch_size: c.batch_size,
        }
    }
}

impl Default for EvalOptions {
    fn default() -> Self {
        (&TrainConfig::default()).into()
    }
}
