//! Train a joint-stream and a bone-stream model, then fuse their softmax
//! scores on the held-out split.

use mstgn::model::{ModelConfig, TgnModel};
use mstgn::skeleton::{synth_dataset, Layout, Split, Stream, SynthConfig};
use mstgn::training::{evaluate, evaluate_fused, train, EvalOptions, TrainConfig};

fn main() -> mstgn::Result<()> {
    let layout = Layout::builtin("ntu25")?;
    let data = synth_dataset(
        &SynthConfig {
            classes: 3,
            per_class: 16,
            test_per_class: 8,
            frames: 32,
            seed: 21,
            ..Default::default()
        },
        &layout,
    )?;
    let config = TrainConfig {
        epochs: 20,
        base_lr: 0.05,
        lr_decay_epochs: vec![15],
        batch_size: 8,
        target_frames: 32,
        ..TrainConfig::desk()
    };
    let options = EvalOptions::from(&config);
    let mut models = Vec::new();
    for stream in [Stream::Joint, Stream::Bone] {
        let mut cfg = ModelConfig::desk("ntu25", 3);
        cfg.stream = stream;
        let mut model = TgnModel::from_config(cfg, 0)?;
        train(&mut model, &data, &config)?;
        let m = evaluate(&model, &data, Split::Test, &options)?;
        println!("{stream:?} stream: test top-1 {:.3}", m.top1);
        models.push(model);
    }
    let fused = evaluate_fused(&[(&models[0], 1.0), (&models[1], 1.0)], &data, Split::Test, &options)?;
    println!("joint + bone fused: test top-1 {:.3}", fused.top1);
    Ok(())
}
