//! TGN layers, the baseline GCN + TCN block, the multi-scale network,
//! cost accounting and checkpoints.

mod accounting;
mod checkpoint;
mod config;
mod fusion;
mod gradient_suite;
pub mod layer;
mod network;

pub use accounting::{count_flops, count_params, CountItem, InputShape, MacCount, ParamCount};
pub use checkpoint::{
    checkpoint_from_json, checkpoint_to_json, load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION,
};
pub use config::{default_layer_plan, BlockKind, LayerConfig, ModelConfig};
pub use fusion::fuse_scores;
pub use gradient_suite::{gradient_suite, op_gradchecks, toy_model_gradchecks, SuiteEntry, SuiteReport};
pub use layer::{
    baseline_gcn_tcn_forward, fuse_baseline_weights, tgn_layer_forward, BaselineLayerVars, Norm, Shortcut,
    TgnLayerVars,
};
pub use network::{toy_config, toy_layout, Branch, ForwardOutput, TgnModel};
