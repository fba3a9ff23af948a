use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{PartitionStrategy, ScaleConfig, ScaleName};
use crate::skeleton::Stream;

/// Which graph-convolution block the layer stack uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Fused spatiotemporal block: per-partition temporal kernels inside the
    /// neighbour aggregation.
    #[default]
    Tgn,
    /// Per-frame graph convolution followed by a separate temporal convolution.
    Baseline,
}

impl std::str::FromStr for BlockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tgn" => Ok(BlockKind::Tgn),
            "baseline" => Ok(BlockKind::Baseline),
            other => Err(Error::config(format!("unknown block '{other}' (tgn|baseline)"))),
        }
    }
}

impl std::fmt::Display for BlockKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlockKind::Tgn => "tgn",
            BlockKind::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub c_in: usize,
    pub c_out: usize,
    #[serde(default = "default_kernel")]
    pub temporal_kernel: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub residual: bool,
}

fn default_kernel() -> usize {
    3
}

fn default_stride() -> usize {
    1
}

impl LayerConfig {
    pub fn new(c_in: usize, c_out: usize) -> Self {
        LayerConfig {
            c_in,
            c_out,
            temporal_kernel: 3,
            stride: 1,
            residual: false,
        }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn kernel(mut self, t: usize) -> Self {
        self.temporal_kernel = t;
        self
    }

    pub fn residual(mut self, on: bool) -> Self {
        self.residual = on;
        self
    }

    /// Whether the block output has the same shape as its input.
    pub fn preserves_shape(&self) -> bool {
        self.c_in == self.c_out && self.stride == 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_in == 0 || self.c_out == 0 {
            return Err(Error::config("layer channel counts must be positive"));
        }
        if self.temporal_kernel % 2 == 0 {
            return Err(Error::config(format!(
                "temporal kernel width {} must be odd",
                self.temporal_kernel
            )));
        }
        if !(1..=2).contains(&self.stride) {
            return Err(Error::config(format!("layer stride {} must be 1 or 2", self.stride)));
        }
        Ok(())
    }
}

/// Everything needed to build a [`super::TgnModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub layout: String,
    pub in_channels: usize,
    pub num_classes: usize,
    pub layers: Vec<LayerConfig>,
    pub scales: Vec<ScaleName>,
    /// Replacements for the layout's shipped scale definitions.
    #[serde(default)]
    pub scale_overrides: Vec<ScaleConfig>,
    #[serde(default)]
    pub partition: PartitionStrategy,
    #[serde(default)]
    pub block: BlockKind,
    #[serde(default = "yes")]
    pub share_weights_across_scales: bool,
    #[serde(default = "yes")]
    pub edge_importance: bool,
    #[serde(default = "yes")]
    pub batch_norm: bool,
    #[serde(default = "bn_momentum")]
    pub bn_momentum: f64,
    #[serde(default)]
    pub stream: Stream,
}

fn yes() -> bool {
    true
}

fn bn_momentum() -> f64 {
    0.1
}

/// Channel plan 64x4, 128x3, 256x3 with stride 2 entering the 128 and 256
/// groups. Every layer but the first has a shortcut: identity where the shape
/// is kept, a strided 1x1 projection where it changes.
pub fn default_layer_plan(in_channels: usize, temporal_kernel: usize) -> Vec<LayerConfig> {
    let widths = [64, 64, 64, 64, 128, 128, 128, 256, 256, 256];
    let mut layers = Vec::with_capacity(widths.len());
    let mut c_in = in_channels;
    for (i, &c_out) in widths.iter().enumerate() {
        let stride = if i == 4 || i == 7 { 2 } else { 1 };
        let mut layer = LayerConfig::new(c_in, c_out).stride(stride).kernel(temporal_kernel);
        layer.residual = i > 0;
        layers.push(layer);
        c_in = c_out;
    }
    layers
}

impl ModelConfig {
    /// Ten TGN layers on the three NTU scales, 60 classes.
    pub fn ntu25_default() -> Self {
        ModelConfig {
            layout: "ntu25".into(),
            in_channels: 3,
            num_classes: 60,
            layers: default_layer_plan(3, 3),
            scales: ScaleName::ALL.to_vec(),
            scale_overrides: Vec::new(),
            partition: PartitionStrategy::Spatial,
            block: BlockKind::Tgn,
            share_weights_across_scales: true,
            edge_importance: true,
            batch_norm: true,
            bn_momentum: 0.1,
            stream: Stream::Joint,
        }
    }

    /// Ten TGN layers on the three OpenPose scales, 400 classes.
    pub fn openpose18_default() -> Self {
        ModelConfig {
            layout: "openpose18".into(),
            num_classes: 400,
            ..Self::ntu25_default()
        }
    }

    /// A small three-layer network that trains in seconds on synthetic data.
    pub fn desk(layout: &str, num_classes: usize) -> Self {
        ModelConfig {
            layout: layout.into(),
            num_classes,
            layers: vec![
                LayerConfig::new(3, 8),
                LayerConfig::new(8, 8).residual(true),
                LayerConfig::new(8, 16).stride(2).residual(true),
            ],
            ..Self::ntu25_default()
        }
    }

    /// The same network with the GCN-then-TCN block of width `t` in every layer.
    pub fn as_baseline(&self, t: usize) -> Self {
        let mut c = self.clone();
        c.block = BlockKind::Baseline;
        for l in &mut c.layers {
            l.temporal_kernel = t;
        }
        c
    }

    /// Names accepted by [`ModelConfig::preset`].
    pub const PRESETS: [&'static str; 3] = ["ntu25_default", "openpose18_default", "desk"];

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "ntu25_default" => Some(Self::ntu25_default()),
            "openpose18_default" => Some(Self::openpose18_default()),
            "desk" => Some(Self::desk("ntu25", 2)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::config("model needs at least one layer"));
        }
        if self.num_classes == 0 || self.in_channels == 0 {
            return Err(Error::config("num_classes and in_channels must be positive"));
        }
        if self.scales.is_empty() {
            return Err(Error::config("model needs at least one scale"));
        }
        for (i, s) in self.scales.iter().enumerate() {
            if self.scales[..i].contains(s) {
                return Err(Error::config(format!("scale {s} enabled twice")));
            }
        }
        if !(0.0..=1.0).contains(&self.bn_momentum) {
            return Err(Error::config("bn_momentum must lie in [0, 1]"));
        }
        let mut c = self.in_channels;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate()?;
            if layer.c_in != c {
                return Err(Error::config(format!(
                    "layer {} expects {} input channels but receives {c}",
                    i + 1,
                    layer.c_in
                )));
            }
            c = layer.c_out;
        }
        Ok(())
    }

    pub fn feature_channels(&self) -> usize {
        self.layers.last().map_or(self.in_channels, |l| l.c_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_matches_channel_schedule() {
        let cfg = ModelConfig::ntu25_default();
        let widths: Vec<usize> = cfg.layers.iter().map(|l| l.c_out).collect();
        assert_eq!(widths, [64, 64, 64, 64, 128, 128, 128, 256, 256, 256]);
        assert!(cfg.layers.iter().all(|l| l.temporal_kernel == 3));
        let strides: Vec<usize> = cfg.layers.iter().map(|l| l.stride).collect();
        assert_eq!(strides, [1, 1, 1, 1, 2, 1, 1, 2, 1, 1]);
        cfg.validate().unwrap();
    }

    #[test]
    fn broken_chain_rejected() {
        let mut cfg = ModelConfig::desk("ntu25", 2);
        cfg.layers[1].c_in = 5;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn even_kernel_rejected() {
        assert!(LayerConfig::new(2, 2).kernel(4).validate().is_err());
        assert!(LayerConfig::new(2, 2).stride(3).validate().is_err());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let mut v = serde_json::to_value(ModelConfig::desk("ntu25", 2)).unwrap();
        v["dropout"] = serde_json::json!(0.5);
        assert!(serde_json::from_value::<ModelConfig>(v).is_err());
    }
}
