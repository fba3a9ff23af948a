//! JSON checkpoints: config, layout, enabled scales, every parameter tensor
//! and the batch-norm running statistics. Floats round-trip exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelConfig, TgnModel};
use crate::error::{Error, Result};
use crate::graphs::ScaleDefinition;
use crate::numerics::{RunningStats, Tensor};
use crate::skeleton::Layout;

pub const CHECKPOINT_FORMAT: &str = "mstgn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredTensor {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredStats {
    name: String,
    #[serde(flatten)]
    stats: RunningStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: ModelConfig,
    layout: Layout,
    scales: Vec<ScaleDefinition>,
    params: Vec<StoredTensor>,
    stats: Vec<StoredStats>,
}

pub fn checkpoint_to_json(model: &TgnModel) -> Result<String> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        config: model.config.clone(),
        layout: model.layout.clone(),
        scales: model.branches().iter().map(|b| b.scale.clone()).collect(),
        params: model
            .params
            .iter()
            .map(|p| StoredTensor {
                name: p.name.clone(),
                shape: p.value.shape().to_vec(),
                data: p.value.data().to_vec(),
            })
            .collect(),
        stats: model
            .stat_names
            .iter()
            .zip(&model.stats)
            .map(|(name, s)| StoredStats {
                name: name.clone(),
                stats: s.clone(),
            })
            .collect(),
    };
    serde_json::to_string(&file).map_err(|e| Error::parse(format!("checkpoint: {e}")))
}

pub fn checkpoint_from_json(text: &str) -> Result<TgnModel> {
    let file: CheckpointFile = serde_json::from_str(text).map_err(|e| Error::parse(format!("checkpoint: {e}")))?;
    if file.format != CHECKPOINT_FORMAT || file.version != CHECKPOINT_VERSION {
        return Err(Error::parse(format!(
            "checkpoint: unsupported format {} v{}",
            file.format, file.version
        )));
    }
    let mut model = TgnModel::new(file.config, file.layout, &file.scales, 0)?;
    if file.params.len() != model.params.len() {
        return Err(Error::parse(format!(
            "checkpoint: {} parameter tensors, model has {}",
            file.params.len(),
            model.params.len()
        )));
    }
    for stored in file.params {
        let id = model
            .params
            .by_name(&stored.name)
            .map(|p| p.id)
            .ok_or_else(|| Error::parse(format!("checkpoint: unknown parameter {}", stored.name)))?;
        let value = Tensor::new(stored.shape, stored.data)?;
        model.params.assign(id, value)?;
    }
    if file.stats.len() != model.stats.len() {
        return Err(Error::parse("checkpoint: running statistics do not match the model"));
    }
    for stored in file.stats {
        let i = model
            .stat_names
            .iter()
            .position(|n| *n == stored.name)
            .ok_or_else(|| Error::parse(format!("checkpoint: unknown statistics {}", stored.name)))?;
        if stored.stats.mean.len() != model.stats[i].mean.len() || stored.stats.var.len() != model.stats[i].var.len() {
            return Err(Error::dim(format!("checkpoint: statistics {} have the wrong width", stored.name)));
        }
        model.stats[i] = stored.stats;
    }
    Ok(model)
}

pub fn save_checkpoint(model: &TgnModel, path: &Path) -> Result<()> {
    fs::write(path, checkpoint_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<TgnModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toy_layout;
    use crate::graphs::ScaleName;

    #[test]
    fn roundtrip_is_exact() {
        let cfg = ModelConfig {
            layout: "toy4".into(),
            in_channels: 2,
            num_classes: 2,
            layers: vec![crate::model::LayerConfig::new(2, 3)],
            scales: vec![ScaleName::Core, ScaleName::Full],
            ..ModelConfig::ntu25_default()
        };
        let mut model = TgnModel::with_layout(cfg, toy_layout(), 5).unwrap();
        model.stats[0].mean[1] = 0.1 + 0.2;
        let text = checkpoint_to_json(&model).unwrap();
        let back = checkpoint_from_json(&text).unwrap();
        assert_eq!(back.stats, model.stats);
        for (a, b) in model.params.iter().zip(back.params.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.value, b.value);
        }
        let x = Tensor::ones(vec![1, 2, 3, 4, 1]);
        assert_eq!(model.predict(&x).unwrap(), back.predict(&x).unwrap());
    }

    #[test]
    fn foreign_documents_rejected() {
        assert!(matches!(checkpoint_from_json("{\"format\": 1}"), Err(Error::Parse(_))));
    }
}
