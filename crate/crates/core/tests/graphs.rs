use mstgn::graphs::{
    build_adjacency, default_scales, default_scales_for, select_scale_tensor, GraphSpec, PartitionStrategy, ScaleName,
};
use mstgn::numerics::Tensor;
use mstgn::skeleton::{Layout, Side};
use mstgn::Error;
use proptest::prelude::*;

const STRATEGIES: [PartitionStrategy; 3] = [
    PartitionStrategy::Uniform,
    PartitionStrategy::Distance,
    PartitionStrategy::Spatial,
];

fn spec(num_nodes: usize, edges: &[(usize, usize)], center: usize) -> GraphSpec {
    GraphSpec {
        num_nodes,
        edges: edges.to_vec(),
        center,
        layout_id: "test".into(),
    }
}

fn layout_graph(layout: &Layout) -> GraphSpec {
    spec(layout.num_joints(), &layout.edges(), layout.center)
}

fn spectral_radius(a: &Tensor) -> f64 {
    let v = a.shape()[0];
    let mut x: Vec<f64> = (0..v).map(|i| 1.0 + 0.01 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let y: Vec<f64> = (0..v).map(|i| (0..v).map(|j| a.get(&[i, j]) * x[j]).sum()).collect();
        let norm = y.iter().map(|z| z * z).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / x.iter().map(|z| z * z).sum::<f64>().sqrt();
        x = y.into_iter().map(|z| z / norm).collect();
    }
    lambda
}

#[test]
fn tiny_graphs_by_hand() {
    let one = build_adjacency(&spec(1, &[], 0), PartitionStrategy::Uniform).unwrap();
    assert_eq!(one.partitions[0].data(), &[1.0]);
    let two = build_adjacency(&spec(2, &[(0, 1)], 0), PartitionStrategy::Uniform).unwrap();
    assert!(two.partitions[0].data().iter().all(|&v| (v - 0.5).abs() < 1e-15));
}

#[test]
fn three_node_path_distance_partitions() {
    let s = build_adjacency(&spec(3, &[(0, 1), (1, 2)], 1), PartitionStrategy::Distance).unwrap();
    let own = &s.partitions[0];
    let want = [0.5, 1.0 / 3.0, 0.5];
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { want[i] } else { 0.0 };
            assert!((own.get(&[i, j]) - expect).abs() < 1e-15);
        }
    }
    let nb = &s.partitions[1];
    let edge = 1.0 / 6f64.sqrt();
    assert!((nb.get(&[0, 1]) - edge).abs() < 1e-15);
    assert!((nb.get(&[1, 2]) - edge).abs() < 1e-15);
    assert_eq!(nb.get(&[0, 2]), 0.0);
    assert_eq!(nb.get(&[1, 1]), 0.0);
}

#[test]
fn spatial_needs_a_connected_graph() {
    let err = build_adjacency(&spec(4, &[(0, 1), (2, 3)], 0), PartitionStrategy::Spatial).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(build_adjacency(&spec(4, &[(0, 1), (2, 3)], 0), PartitionStrategy::Uniform).is_ok());
}

#[test]
fn shipped_layout_partitions_are_well_formed() {
    for id in ["ntu25", "openpose18"] {
        let layout = Layout::builtin(id).unwrap();
        let g = layout_graph(&layout);
        for strategy in STRATEGIES {
            let s = build_adjacency(&g, strategy).unwrap();
            assert_eq!(s.len(), strategy.num_partitions());
            for p in &s.partitions {
                assert!(p.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
            let summed = s.summed();
            let v = g.num_nodes;
            for i in 0..v {
                for j in 0..v {
                    assert!((summed.get(&[i, j]) - summed.get(&[j, i])).abs() < 1e-15);
                }
            }
            assert!(spectral_radius(&summed) <= 1.0 + 1e-9, "{id} {strategy:?}");
            // Rows of the symmetric normalization exceed 1 at hubs; the
            // similar matrix D^-1/2 A D^1/2 is row-stochastic instead.
            if strategy == PartitionStrategy::Uniform {
                let a = g.adjacency();
                let degree: Vec<f64> = (0..v).map(|i| 1.0 + a[i * v..(i + 1) * v].iter().sum::<f64>()).collect();
                for i in 0..v {
                    let row: f64 = (0..v).map(|j| summed.get(&[i, j])).sum();
                    assert!(row > 0.0);
                    let walk: f64 = (0..v).map(|j| summed.get(&[i, j]) * (degree[j] / degree[i]).sqrt()).sum();
                    assert!((walk - 1.0).abs() < 1e-12, "row {i}: {walk}");
                }
            }
            // closer and farther partitions mirror each other
            if strategy == PartitionStrategy::Spatial {
                for i in 0..v {
                    for j in 0..v {
                        assert_eq!(s.partitions[1].get(&[i, j]), s.partitions[2].get(&[j, i]));
                    }
                }
            }
        }
    }
}

#[test]
fn relabelling_nodes_permutes_the_partitions() {
    let layout = Layout::builtin("ntu25").unwrap();
    let g = layout_graph(&layout);
    let v = g.num_nodes;
    let perm: Vec<usize> = (0..v).map(|i| (i * 7 + 3) % v).collect();
    let moved = g.permuted(&perm);
    for strategy in STRATEGIES {
        let a = build_adjacency(&g, strategy).unwrap();
        let b = build_adjacency(&moved, strategy).unwrap();
        for (pa, pb) in a.partitions.iter().zip(&b.partitions) {
            for i in 0..v {
                for j in 0..v {
                    assert_eq!(pa.get(&[i, j]), pb.get(&[perm[i], perm[j]]));
                }
            }
        }
    }
}

#[test]
fn shipped_scales() {
    let sizes = |id| -> Vec<usize> { default_scales_for(id).unwrap().iter().map(|s| s.len()).collect() };
    assert_eq!(sizes("ntu25"), vec![25, 11, 7]);
    assert_eq!(sizes("openpose18"), vec![18, 11, 7]);
    for id in ["ntu25", "openpose18"] {
        let layout = Layout::builtin(id).unwrap();
        let scales = default_scales(&layout).unwrap();
        let names: Vec<_> = scales.iter().map(|s| s.name).collect();
        assert_eq!(names, ScaleName::ALL.to_vec());
        for s in &scales {
            assert!(s.graph_spec(layout.center).is_connected(), "{id} {}", s.name);
        }
        let core = &scales[2];
        let side = |j: usize| layout.joints[j].side;
        assert!(
            core.edges
                .iter()
                .any(|&(a, b)| matches!((side(a), side(b)), (Side::Left, Side::Right) | (Side::Right, Side::Left))),
            "{id} core scale has no left-right edge"
        );
    }
}

#[test]
fn unknown_layout_is_config_error() {
    assert!(matches!(default_scales_for("kinect99"), Err(Error::Config(_))));
}

#[test]
fn selecting_scales() {
    let scales = default_scales_for("ntu25").unwrap();
    let x = Tensor::new(vec![2, 3, 4, 25], (0..600).map(|i| i as f64).collect()).unwrap();
    assert_eq!(select_scale_tensor(&x, &scales[0]).unwrap(), x);
    let part = &scales[1];
    let y = select_scale_tensor(&x, part).unwrap();
    assert_eq!(y.shape(), &[2, 3, 4, 11]);
    for (n, c, t) in [(0, 0, 0), (1, 2, 3)] {
        assert_eq!(y.get(&[n, c, t, 0]), x.get(&[n, c, t, part.node_subset[0]]));
    }
    let wrong = Tensor::zeros(vec![1, 3, 4, 18]);
    assert!(matches!(select_scale_tensor(&wrong, part), Err(Error::Dimension(_))));
}

fn random_tree(n: usize) -> impl Strategy<Value = GraphSpec> {
    prop::collection::vec(any::<prop::sample::Index>(), n - 1).prop_flat_map(move |picks| {
        let edges: Vec<(usize, usize)> = picks.iter().enumerate().map(|(i, p)| (i + 1, p.index(i + 1))).collect();
        (0..n).prop_map(move |center| spec(n, &edges, center))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_trees_give_symmetric_bounded_partitions(g in (2usize..12).prop_flat_map(random_tree)) {
        for strategy in STRATEGIES {
            let s = build_adjacency(&g, strategy).unwrap();
            let summed = s.summed();
            let v = g.num_nodes;
            for i in 0..v {
                for j in 0..v {
                    prop_assert!((summed.get(&[i, j]) - summed.get(&[j, i])).abs() < 1e-15);
                    prop_assert!((0.0..=1.0).contains(&summed.get(&[i, j])));
                }
            }
            prop_assert!(spectral_radius(&summed) <= 1.0 + 1e-9);
        }
    }
}
