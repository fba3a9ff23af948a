//! With single-frame temporal kernels a per-frame graph convolution cannot
//! mix time steps: perturbing one input frame changes only that output frame.
//! A width-3 kernel spreads the same perturbation to the neighbouring frames.

use mstgn::graphs::{build_adjacency, GraphSpec, PartitionStrategy};
use mstgn::model::{tgn_layer_forward, LayerConfig, TgnLayerVars};
use mstgn::numerics::{Tape, Tensor};

fn changed_frames(t: usize) -> mstgn::Result<Vec<usize>> {
    let spec = GraphSpec {
        num_nodes: 4,
        edges: vec![(0, 1), (1, 2), (1, 3)],
        center: 1,
        layout_id: "star4".into(),
    };
    let stack = build_adjacency(&spec, PartitionStrategy::Spatial)?;
    let layer = LayerConfig::new(2, 3).kernel(t);
    let n = 3 * 3 * 2 * t;
    let w = Tensor::new(vec![3, 3, 2, t], (0..n).map(|i| ((i * 5 % 7) as f64 - 3.0) / 4.0).collect())?;
    let x0 = Tensor::new(vec![1, 2, 10, 4], (0..80).map(|i| (i as f64 * 0.37).sin()).collect())?;
    let mut x1 = x0.clone();
    for c in 0..2 {
        for v in 0..4 {
            let i = [0, c, 6, v];
            x1.set(&i, x1.get(&i) + 1.0);
        }
    }
    let run = |x: &Tensor| -> mstgn::Result<Tensor> {
        let tape = Tape::new();
        let y = tgn_layer_forward(tape.leaf(x.clone())?, &stack, &layer, TgnLayerVars::linear(tape.leaf(w.clone())?))?;
        Ok((*y.value()).clone())
    };
    let (y0, y1) = (run(&x0)?, run(&x1)?);
    let frames = (0..10)
        .filter(|&f| (0..3).any(|c| (0..4).any(|v| y0.get(&[0, c, f, v]) != y1.get(&[0, c, f, v]))))
        .collect();
    Ok(frames)
}

fn main() -> mstgn::Result<()> {
    println!("perturbed input frame 6");
    println!("t=1: output frames changed {:?}", changed_frames(1)?);
    println!("t=3: output frames changed {:?}", changed_frames(3)?);
    Ok(())
}
