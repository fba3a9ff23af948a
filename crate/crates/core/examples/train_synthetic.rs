//! Train the small desk network on a synthetic two-class ntu25 dataset and
//! print the per-epoch curve.

use mstgn::model::{ModelConfig, TgnModel};
use mstgn::skeleton::{synth_dataset, Layout, SynthConfig};
use mstgn::training::{train, TrainConfig};

fn main() -> mstgn::Result<()> {
    let layout = Layout::builtin("ntu25")?;
    let data = synth_dataset(&SynthConfig { seed: 7, ..Default::default() }, &layout)?;
    let mut model = TgnModel::from_config(ModelConfig::desk("ntu25", 2), 0)?;
    let mut config = TrainConfig::desk();
    if let Some(epochs) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        config.epochs = epochs;
        config.lr_decay_epochs = vec![epochs * 3 / 4];
    }
    let report = train(&mut model, &data, &config)?;
    for e in &report.epochs {
        println!("epoch {:>3}  lr {:.4}  loss {:.4}  top1 {:.3}", e.epoch, e.lr, e.loss, e.train_top1);
    }
    println!(
        "final train top-1 {:.3}  ({} params, {:.1}s)",
        report.final_train.top1, report.params, report.wall_clock_seconds
    );
    Ok(())
}
