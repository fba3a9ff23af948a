//! Closed-form parameter and multiply-accumulate counts.
//!
//! MACs are counted densely: every adjacency entry and every kernel tap,
//! padded ones included, costs one multiply-accumulate. Elementwise work
//! (bias, norm, activation, mask products, pooling) is not counted.

use serde::{Deserialize, Serialize};

use super::{BlockKind, TgnModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountItem {
    pub name: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    /// One entry per stored parameter tensor.
    pub tensors: Vec<CountItem>,
    /// Totals grouped as `layer 1`, ..., `classifier`.
    pub per_layer: Vec<CountItem>,
    pub total: u64,
}

fn group_of(name: &str) -> String {
    let mut parts = name.split('.');
    while let Some(p) = parts.next() {
        if p == "layers" {
            if let Some(i) = parts.next().and_then(|i| i.parse::<usize>().ok()) {
                return format!("layer {}", i + 1);
            }
        }
    }
    name.split('.').next().unwrap_or(name).to_string()
}

pub fn count_params(model: &TgnModel) -> ParamCount {
    let mut tensors = Vec::new();
    let mut per_layer: Vec<CountItem> = Vec::new();
    for p in model.params.iter() {
        let count = p.numel() as u64;
        tensors.push(CountItem {
            name: p.name.clone(),
            count,
        });
        let group = group_of(&p.name);
        match per_layer.iter_mut().find(|g| g.name == group) {
            Some(g) => g.count += count,
            None => per_layer.push(CountItem { name: group, count }),
        }
    }
    let total = tensors.iter().map(|t| t.count).sum();
    ParamCount {
        tensors,
        per_layer,
        total,
    }
}

/// Batch geometry the MAC count is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub batch: usize,
    pub frames: usize,
    pub persons: usize,
}

impl InputShape {
    /// One clip of 300 frames.
    pub fn clip(persons: usize) -> Self {
        InputShape {
            batch: 1,
            frames: 300,
            persons,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacCount {
    pub input: InputShape,
    /// `layer i` totals over all scales, then `classifier`.
    pub per_layer: Vec<CountItem>,
    /// Totals per scale branch including its classifier pass.
    pub per_scale: Vec<CountItem>,
    pub graph_mixing: u64,
    pub convolution: u64,
    pub total: u64,
}

/// MACs of one forward pass, derived from the configuration alone.
pub fn count_flops(model: &TgnModel, input: InputShape) -> Result<MacCount> {
    if input.batch == 0 || input.frames == 0 || input.persons == 0 {
        return Err(Error::config("input shape extents must be positive"));
    }
    let cfg = &model.config;
    let rows = (input.batch * input.persons) as u64;
    let mut per_layer: Vec<CountItem> = (0..cfg.layers.len())
        .map(|i| CountItem {
            name: format!("layer {}", i + 1),
            count: 0,
        })
        .collect();
    let mut classifier = 0;
    let mut per_scale = Vec::new();
    let (mut mixing, mut convolution) = (0u64, 0u64);
    for branch in model.branches() {
        let v = branch.scale.len() as u64;
        let k = branch.stack.len() as u64;
        let mut t = input.frames as u64;
        let mut scale_total = 0;
        for (i, layer) in cfg.layers.iter().enumerate() {
            let (c_in, c_out, kt) = (layer.c_in as u64, layer.c_out as u64, layer.temporal_kernel as u64);
            let t_out = t.div_ceil(layer.stride as u64);
            let mix = k * rows * c_in * t * v * v;
            let mut conv = match cfg.block {
                BlockKind::Tgn => k * rows * c_out * c_in * kt * t_out * v,
                BlockKind::Baseline => k * rows * c_out * c_in * t * v + rows * c_out * c_out * kt * t_out * v,
            };
            if layer.residual && !layer.preserves_shape() {
                conv += rows * c_out * c_in * t_out * v;
            }
            mixing += mix;
            convolution += conv;
            per_layer[i].count += mix + conv;
            scale_total += mix + conv;
            t = t_out;
        }
        let head = (input.batch * cfg.feature_channels() * cfg.num_classes) as u64;
        classifier += head;
        scale_total += head;
        per_scale.push(CountItem {
            name: branch.scale.name.to_string(),
            count: scale_total,
        });
    }
    per_layer.push(CountItem {
        name: "classifier".into(),
        count: classifier,
    });
    Ok(MacCount {
        input,
        total: mixing + convolution + classifier,
        per_layer,
        per_scale,
        graph_mixing: mixing,
        convolution,
    })
}
