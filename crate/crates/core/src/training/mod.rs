//! Loss, optimizer, schedule, metrics, training and evaluation loops, run
//! reports and the ablation harness.

mod ablation;
mod config;
mod metrics;
mod optim;
mod report;
mod run;

pub use ablation::{ablation_run, block_rows, multiscale_rows, row_config, AblationResult, AblationRow, AblationTable};
pub use config::{EvalOptions, TrainConfig};
pub use metrics::{label_rank, topk_accuracy};
pub use optim::{cross_entropy_loss, lr_at, sgd_nesterov_step, OptimizerState};
pub use report::{EpochRecord, EvalMetrics, RunReport};
pub use run::{evaluate, evaluate_fused, split_scores, train};
