//! Train-and-evaluate comparison tables over scale sets and block types.

use serde::{Deserialize, Serialize};

use super::{evaluate, train, EvalOptions, TrainConfig};
use crate::error::{Error, Result};
use crate::graphs::ScaleName;
use crate::model::{BlockKind, ModelConfig, TgnModel};
use crate::skeleton::{Dataset, Split};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationRow {
    pub scales: Vec<ScaleName>,
    pub block: BlockKind,
}

/// `{full}`, `{part}`, `{core}`, `{full, part}`, `{full, part, core}`.
pub fn multiscale_rows() -> Vec<AblationRow> {
    use ScaleName::*;
    [vec![Full], vec![Part], vec![Core], vec![Full, Part], vec![Full, Part, Core]]
        .into_iter()
        .map(|scales| AblationRow {
            scales,
            block: BlockKind::Tgn,
        })
        .collect()
}

/// Baseline block and TGN block on the same scales.
pub fn block_rows(scales: &[ScaleName]) -> Vec<AblationRow> {
    [BlockKind::Baseline, BlockKind::Tgn]
        .into_iter()
        .map(|block| AblationRow {
            scales: scales.to_vec(),
            block,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationResult {
    pub row: AblationRow,
    pub params: u64,
    pub train_top1: f64,
    pub eval_split: Split,
    pub eval_top1: f64,
    pub eval_top5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationTable {
    pub title: String,
    pub rows: Vec<AblationResult>,
}

impl AblationTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    /// Fixed-width text table with check marks for the enabled scales.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.title);
        out.push_str(&format!(
            "{:<6}{:<6}{:<6}{:<10}{:>9}{:>10}{:>9}{:>9}\n",
            "full", "part", "core", "block", "params", "train@1", "eval@1", "eval@5"
        ));
        for r in &self.rows {
            let mark = |s: ScaleName| if r.row.scales.contains(&s) { "√" } else { "-" };
            out.push_str(&format!(
                "{:<6}{:<6}{:<6}{:<10}{:>9}{:>9.1}%{:>8.1}%{:>8.1}%\n",
                mark(ScaleName::Full),
                mark(ScaleName::Part),
                mark(ScaleName::Core),
                r.row.block.to_string(),
                r.params,
                100.0 * r.train_top1,
                100.0 * r.eval_top1,
                100.0 * r.eval_top5,
            ));
        }
        out
    }
}

/// The configuration one ablation row trains.
pub fn row_config(base: &ModelConfig, row: &AblationRow, baseline_kernel: usize) -> ModelConfig {
    let mut cfg = match row.block {
        BlockKind::Tgn => base.clone(),
        BlockKind::Baseline => base.as_baseline(baseline_kernel),
    };
    cfg.scales = row.scales.clone();
    cfg
}

/// Train and evaluate every row with the same seed. Rows are evaluated on the
/// test split when the dataset has one, otherwise on the training split.
pub fn ablation_run(
    title: &str,
    base: &ModelConfig,
    rows: &[AblationRow],
    dataset: &Dataset,
    config: &TrainConfig,
    baseline_kernel: usize,
) -> Result<AblationTable> {
    if rows.is_empty() {
        return Err(Error::config("ablation needs at least one row"));
    }
    let split = if dataset.manifest.indices(Split::Test).is_empty() {
        Split::Train
    } else {
        Split::Test
    };
    let options = EvalOptions::from(config);
    let mut results = Vec::with_capacity(rows.len());
    for row in rows {
        let cfg = row_config(base, row, baseline_kernel);
        let mut model = TgnModel::with_layout(cfg, dataset.layout.clone(), config.seed)?;
        let report = train(&mut model, dataset, config)?;
        let eval = match split {
            Split::Train => report.final_train.clone(),
            Split::Test => evaluate(&model, dataset, split, &options)?,
        };
        results.push(AblationResult {
            row: row.clone(),
            params: report.params,
            train_top1: report.final_train.top1,
            eval_split: split,
            eval_top1: eval.top1,
            eval_top5: eval.top5,
        });
    }
    Ok(AblationTable {
        title: title.to_string(),
        rows: results,
    })
}
