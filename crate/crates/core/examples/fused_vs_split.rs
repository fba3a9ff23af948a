//! A linear GCN + TCN block and a TGN layer whose kernel is the composition
//! of the two compute the same function.

use mstgn::graphs::{build_adjacency, GraphSpec, PartitionStrategy};
use mstgn::model::{baseline_gcn_tcn_forward, fuse_baseline_weights, tgn_layer_forward, BaselineLayerVars, LayerConfig, TgnLayerVars};
use mstgn::numerics::{Tape, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn main() -> mstgn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spec = GraphSpec {
        num_nodes: 5,
        edges: vec![(0, 1), (1, 2), (2, 3), (1, 4)],
        center: 1,
        layout_id: "chain5".into(),
    };
    for strategy in [PartitionStrategy::Uniform, PartitionStrategy::Spatial] {
        let stack = build_adjacency(&spec, strategy)?;
        let k = stack.len();
        let layer = LayerConfig::new(3, 4).kernel(5);
        let gcn = random(&mut rng, vec![k, 4, 3, 1]);
        let tcn = random(&mut rng, vec![4, 4, 5]);
        let fused = fuse_baseline_weights(&gcn, &tcn)?;

        let tape = Tape::new();
        let x = tape.leaf(random(&mut rng, vec![2, 3, 12, 5]))?;
        let split = baseline_gcn_tcn_forward(x, &stack, &layer, BaselineLayerVars::linear(tape.leaf(gcn)?, tape.leaf(tcn)?))?;
        let tgn = tgn_layer_forward(x, &stack, &layer, TgnLayerVars::linear(tape.leaf(fused)?))?;
        println!(
            "{:<8} K={k}: output {:?}, max |split - fused| = {:.3e}",
            format!("{strategy:?}").to_lowercase(),
            tgn.shape(),
            split.value().max_abs_diff(&tgn.value())?
        );
    }
    Ok(())
}
