use mstgn::graphs::{build_adjacency, AdjacencyStack, GraphSpec, PartitionStrategy, ScaleName};
use mstgn::model::{
    baseline_gcn_tcn_forward, checkpoint_from_json, checkpoint_to_json, count_flops, count_params,
    fuse_baseline_weights, fuse_scores, tgn_layer_forward, BaselineLayerVars, InputShape, LayerConfig, ModelConfig,
    TgnLayerVars, TgnModel,
};
use mstgn::numerics::{mac_counter, reset_mac_counter, Tape, Tensor};
use mstgn::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn stack_of(partitions: Vec<Tensor>) -> AdjacencyStack {
    let v = partitions[0].shape()[0];
    AdjacencyStack {
        partitions,
        strategy: PartitionStrategy::Uniform,
        graph: GraphSpec {
            num_nodes: v,
            edges: vec![],
            center: 0,
            layout_id: "test".into(),
        },
    }
}

fn tgn_linear(x: &Tensor, stack: &AdjacencyStack, layer: &LayerConfig, w: &Tensor) -> mstgn::Result<Tensor> {
    let tape = Tape::new();
    let y = tgn_layer_forward(tape.leaf(x.clone())?, stack, layer, TgnLayerVars::linear(tape.leaf(w.clone())?))?;
    Ok((*y.value()).clone())
}

#[test]
fn tgn_layer_hand_cases() {
    let layer = LayerConfig::new(1, 1).kernel(1);
    let clique = build_adjacency(
        &GraphSpec {
            num_nodes: 2,
            edges: vec![(0, 1)],
            center: 0,
            layout_id: "pair".into(),
        },
        PartitionStrategy::Uniform,
    )
    .unwrap();
    let x = Tensor::new(vec![1, 1, 1, 2], vec![1.0, 3.0]).unwrap();
    let w = Tensor::new(vec![1, 1, 1, 1], vec![2.0]).unwrap();
    let y = tgn_linear(&x, &clique, &layer, &w).unwrap();
    assert!(y.data().iter().all(|v| (v - 4.0).abs() < 1e-12), "{:?}", y.data());

    let eye = stack_of(vec![Tensor::identity(5)]);
    let layer = LayerConfig::new(3, 3).kernel(1);
    let mut w = Tensor::zeros(vec![1, 3, 3, 1]);
    for c in 0..3 {
        w.set(&[0, c, c, 0], 1.0);
    }
    let x = random(&mut ChaCha8Rng::seed_from_u64(0), vec![2, 3, 6, 5]);
    assert_eq!(tgn_linear(&x, &eye, &layer, &w).unwrap(), x);
}

#[test]
fn stride_two_halves_the_frames() {
    let stack = stack_of(vec![Tensor::identity(2)]);
    let layer = LayerConfig::new(1, 1).stride(2);
    let y = tgn_linear(&Tensor::ones(vec![1, 1, 300, 2]), &stack, &layer, &Tensor::ones(vec![1, 1, 1, 3])).unwrap();
    assert_eq!(y.shape(), &[1, 1, 150, 2]);
}

#[test]
fn mismatched_mask_is_dimension_error() {
    let stack = stack_of(vec![Tensor::identity(3)]);
    let layer = LayerConfig::new(1, 1);
    let tape = Tape::new();
    let mut vars = TgnLayerVars::linear(tape.leaf(Tensor::ones(vec![1, 1, 1, 3])).unwrap());
    vars.masks = Some(tape.leaf(Tensor::ones(vec![1, 4, 4])).unwrap());
    let x = tape.leaf(Tensor::ones(vec![1, 1, 4, 3])).unwrap();
    assert!(matches!(tgn_layer_forward(x, &stack, &layer, vars), Err(Error::Dimension(_))));
}

#[test]
fn tgn_layer_is_permutation_equivariant() {
    let spec = GraphSpec {
        num_nodes: 4,
        edges: vec![(0, 1), (1, 2), (1, 3)],
        center: 1,
        layout_id: "star".into(),
    };
    let layer = LayerConfig::new(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = random(&mut rng, vec![3, 3, 2, 3]);
    let x = random(&mut rng, vec![1, 2, 5, 4]);
    let base = tgn_linear(&x, &build_adjacency(&spec, PartitionStrategy::Spatial).unwrap(), &layer, &w).unwrap();
    let perm = [2, 0, 3, 1];
    let moved = build_adjacency(&spec.permuted(&perm), PartitionStrategy::Spatial).unwrap();
    let permute = |t: &Tensor| {
        let mut out = t.clone();
        for (src, dst) in t.data().chunks(4).zip(out.data_mut().chunks_mut(4)) {
            for j in 0..4 {
                dst[perm[j]] = src[j];
            }
        }
        out
    };
    let y = tgn_linear(&permute(&x), &moved, &layer, &w).unwrap();
    assert!(y.max_abs_diff(&permute(&base)).unwrap() < 1e-14);
}

#[test]
fn linear_baseline_equals_fused_tgn_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let v = rng.random_range(2..=6);
        let frames = rng.random_range(3..=16);
        let (c_in, c_out) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let t = [1, 3, 5][rng.random_range(0..3)];
        let stride = rng.random_range(1..=2);
        let stack = stack_of(vec![random(&mut rng, vec![v, v])]);
        let gcn = random(&mut rng, vec![1, c_out, c_in, 1]);
        let tcn = random(&mut rng, vec![c_out, c_out, t]);
        let x = random(&mut rng, vec![2, c_in, frames, v]);
        let layer = LayerConfig::new(c_in, c_out).kernel(t).stride(stride);

        let tape = Tape::new();
        let split = baseline_gcn_tcn_forward(
            tape.leaf(x.clone()).unwrap(),
            &stack,
            &layer,
            BaselineLayerVars::linear(tape.leaf(gcn.clone()).unwrap(), tape.leaf(tcn.clone()).unwrap()),
        )
        .unwrap();
        let fused = fuse_baseline_weights(&gcn, &tcn).unwrap();
        let y = tgn_linear(&x, &stack, &layer, &fused).unwrap();
        assert!(y.max_abs_diff(&split.value()).unwrap() < 1e-10);
    }
}

#[test]
fn closed_form_parameter_counts() {
    // three partitions, 3 -> 64, t = 3, plus bias
    assert_eq!(3 * 64 * 3 * 3 + 64, 1_792);
    let model = TgnModel::from_config(ModelConfig::ntu25_default(), 0).unwrap();
    let counts = count_params(&model);
    let find = |name: &str| counts.tensors.iter().find(|t| t.name.ends_with(name)).map(|t| t.count);
    let layer1: u64 = counts
        .tensors
        .iter()
        .filter(|t| t.name.contains("layers.0.") && (t.name.ends_with("weight") || t.name.ends_with("bias")))
        .map(|t| t.count)
        .sum();
    assert_eq!(layer1, 1_792);
    assert_eq!(counts.per_layer.last().map(|g| g.count), Some(15_420));
    assert!(find("classifier.weight").is_some());
    // GCN + TCN at t = 9 vs TGN at t = 3, c = 256, weights only
    let c = 256u64;
    assert_eq!(3 * c * c + 9 * c * c, 12 * c * c);
    assert_eq!(3 * 3 * c * c, 9 * c * c);
}

#[test]
fn adding_a_scale_adds_only_its_masks() {
    let base = ModelConfig::desk("ntu25", 2);
    let full = TgnModel::from_config(ModelConfig { scales: vec![ScaleName::Full], ..base.clone() }, 0).unwrap();
    let two = TgnModel::from_config(ModelConfig { scales: vec![ScaleName::Full, ScaleName::Part], ..base.clone() }, 0).unwrap();
    let three = TgnModel::from_config(base.clone(), 0).unwrap();
    let masks = |v: u64| base.layers.len() as u64 * 3 * v * v;
    let total = |m: &TgnModel| count_params(m).total;
    assert_eq!(total(&two) - total(&full), masks(11));
    assert_eq!(total(&three) - total(&two), masks(7));
}

fn batch(seed: u64, n: usize, frames: usize) -> Tensor {
    random(&mut ChaCha8Rng::seed_from_u64(seed), vec![n, 3, frames, 25, 2])
}

#[test]
fn scale_fusion_is_the_mean_of_branch_scores() {
    let x = batch(1, 2, 12);
    let single = TgnModel::from_config(ModelConfig { scales: vec![ScaleName::Full], ..ModelConfig::desk("ntu25", 4) }, 5).unwrap();
    let tape = Tape::new();
    let out = single.forward_eval(&tape, &x).unwrap();
    assert_eq!(*out.scores.value(), *out.per_scale[0].value());

    let all = TgnModel::from_config(ModelConfig::desk("ntu25", 4), 5).unwrap();
    let tape = Tape::new();
    let out = all.forward_eval(&tape, &x).unwrap();
    let mut mean = Tensor::zeros(vec![2, 4]);
    for s in &out.per_scale {
        mean = mean.zip_map(&s.value(), |a, b| a + b / 3.0).unwrap();
    }
    assert!(out.scores.value().max_abs_diff(&mean).unwrap() < 1e-15);
}

#[test]
fn default_model_output_shape_and_determinism() {
    let model = TgnModel::from_config(ModelConfig::ntu25_default(), 0).unwrap();
    let x = batch(2, 2, 8);
    let a = model.predict(&x).unwrap();
    assert_eq!(a.shape(), &[2, 60]);
    assert_eq!(a, model.predict(&x).unwrap());
}

#[test]
fn closed_form_macs_match_execution() {
    for cfg in [ModelConfig::desk("ntu25", 3), ModelConfig::desk("ntu25", 3).as_baseline(9)] {
        let model = TgnModel::from_config(cfg, 0).unwrap();
        let predicted = count_flops(&model, InputShape { batch: 2, frames: 10, persons: 2 }).unwrap().total;
        reset_mac_counter();
        model.predict(&batch(3, 2, 10)).unwrap();
        assert_eq!(mac_counter(), predicted);
    }
}

#[test]
fn checkpoint_round_trip_reproduces_predictions() {
    let mut model = TgnModel::from_config(ModelConfig::desk("ntu25", 3), 9).unwrap();
    let tape = Tape::new();
    model.forward_train(&tape, &batch(4, 3, 8)).unwrap();
    let text = checkpoint_to_json(&model).unwrap();
    let back = checkpoint_from_json(&text).unwrap();
    assert_eq!(checkpoint_to_json(&back).unwrap(), text);
    let x = batch(5, 2, 8);
    assert_eq!(back.predict(&x).unwrap(), model.predict(&x).unwrap());
    assert!(checkpoint_from_json("{\"format\":\"other\"}").is_err());
}

#[test]
fn stream_fusion_cases() {
    let a = Tensor::new(vec![1, 2], vec![1.0, 0.0]).unwrap();
    let b = Tensor::new(vec![1, 2], vec![0.0, 1.0]).unwrap();
    assert_eq!(fuse_scores(&[a.clone(), b.clone()], &[3.0, 1.0]).unwrap().data(), &[0.75, 0.25]);
    assert_eq!(fuse_scores(&[a.clone(), b.clone()], &[1.0, 0.0]).unwrap(), a);
    assert!(matches!(fuse_scores(&[], &[]), Err(Error::Contract(_))));
    let s = random(&mut ChaCha8Rng::seed_from_u64(8), vec![6, 5]);
    let argmax = |t: &Tensor| -> Vec<usize> {
        t.data()
            .chunks(5)
            .map(|r| (0..5).max_by(|&i, &j| r[i].total_cmp(&r[j])).unwrap())
            .collect()
    };
    for w in [[1.0, 1.0], [0.2, 5.0], [7.0, 0.5]] {
        assert_eq!(argmax(&fuse_scores(&[s.clone(), s.clone()], &w).unwrap()), argmax(&s));
    }
}
