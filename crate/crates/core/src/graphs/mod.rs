//! Skeleton graphs, normalized adjacency partitions and multi-scale graphs.

mod adjacency;
mod scales;

pub use adjacency::{build_adjacency, AdjacencyStack, GraphSpec, PartitionStrategy};
pub use scales::{
    default_scales, default_scales_for, resolve_scales, select_scale, select_scale_tensor, ScaleConfig,
    ScaleDefinition, ScaleFile, ScaleName,
};
