//! Normalized adjacency partitions and the full/part/core scales of each
//! builtin layout.

use mstgn::graphs::{build_adjacency, default_scales, PartitionStrategy};
use mstgn::skeleton::{Layout, BUILTIN_LAYOUTS};

/// Largest eigenvalue magnitude of a symmetric matrix by power iteration.
fn spectral_radius(a: &[f64], n: usize) -> f64 {
    let mut x = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        lambda = norm / x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.iter().map(|v| v / norm).collect();
    }
    lambda
}

fn main() -> mstgn::Result<()> {
    for id in BUILTIN_LAYOUTS {
        let layout = Layout::builtin(id)?;
        println!("layout {id}: {} joints, centre {}", layout.num_joints(), layout.center);
        for scale in default_scales(&layout)? {
            let spec = scale.graph_spec(layout.center);
            for strategy in [PartitionStrategy::Uniform, PartitionStrategy::Distance, PartitionStrategy::Spatial] {
                let stack = build_adjacency(&spec, strategy)?;
                let summed = stack.summed();
                let nonzero: Vec<usize> = stack
                    .partitions
                    .iter()
                    .map(|p| p.data().iter().filter(|&&v| v != 0.0).count())
                    .collect();
                println!(
                    "  {:<5} {:>2} joints  {:<8}  nonzeros per partition {:?}  spectral radius {:.6}",
                    scale.name.as_str(),
                    scale.len(),
                    format!("{strategy:?}").to_lowercase(),
                    nonzero,
                    spectral_radius(summed.data(), stack.num_nodes()),
                );
            }
            let names: Vec<&str> = scale.node_subset.iter().map(|&j| layout.joints[j].name.as_str()).collect();
            println!("        members {}", names.join(", "));
        }
    }
    Ok(())
}
