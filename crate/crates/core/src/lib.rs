//! Multi-scale temporal graph networks for skeleton-based action recognition.
//!
//! A TGN layer treats each joint's whole time series as one graph node and
//! applies a per-partition temporal kernel inside the neighbour aggregation,
//! so spatial and temporal features are extracted by a single graph
//! convolution. The multi-scale network runs the same layer stack on three
//! graphs of decreasing size (full, part and core) and averages the class
//! scores.
//!
//! Main entry points:
//!
//! - [`numerics`]: tensors and the reverse-mode tape.
//! - [`skeleton`]: sequence files, replay padding, centring, bone streams,
//!   synthetic datasets.
//! - [`graphs`]: skeleton layouts, normalized adjacency partitions, scales.
//! - [`model`]: the TGN layer, the GCN-then-TCN reference block, the
//!   multi-scale network, checkpoints and cost accounting.
//! - [`training`]: loss, Nesterov SGD, schedules, metrics, training loop,
//!   ablation tables.
//! - [`cli`]: the `mstgn` command line.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod error;
pub mod graphs;
pub mod model;
pub mod numerics;
pub mod skeleton;
pub mod training;

pub use error::{Error, Result};
