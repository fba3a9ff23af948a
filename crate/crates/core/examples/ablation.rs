//! The five-row multi-scale table and the block comparison on a small
//! synthetic dataset with a held-out split.

use mstgn::graphs::ScaleName;
use mstgn::model::ModelConfig;
use mstgn::skeleton::{synth_dataset, Layout, SynthConfig};
use mstgn::training::{ablation_run, block_rows, multiscale_rows, TrainConfig};

fn main() -> mstgn::Result<()> {
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let layout = Layout::builtin("ntu25")?;
    let data = synth_dataset(
        &SynthConfig {
            classes: 3,
            per_class: 8,
            test_per_class: 4,
            frames: 32,
            seed: 5,
            ..Default::default()
        },
        &layout,
    )?;
    let base = ModelConfig::desk("ntu25", 3);
    let train = TrainConfig {
        epochs,
        base_lr: 0.05,
        lr_decay_epochs: vec![epochs * 3 / 4],
        batch_size: 8,
        target_frames: 32,
        ..TrainConfig::desk()
    };
    let table = ablation_run("multi-scale graphs", &base, &multiscale_rows(), &data, &train, 9)?;
    print!("{}", table.to_text());
    println!();
    let blocks = ablation_run("block type", &base, &block_rows(&[ScaleName::Full]), &data, &train, 9)?;
    print!("{}", blocks.to_text());
    Ok(())
}
