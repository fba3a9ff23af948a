//! Skeleton sequences: file format, layouts, preprocessing and synthetic data.

mod dataset;
pub mod layout;
mod preprocess;
mod sequence;
mod synth;

pub use dataset::{Dataset, DatasetManifest, ManifestEntry, Split};
pub use layout::{Joint, Layout, Side, BUILTIN_LAYOUTS};
pub use preprocess::{bone_transform, center_normalize, pad_replay, Preprocess, Stream, DEFAULT_TARGET_FRAMES};
pub use sequence::{load_sequence, load_sequence_with, SkeletonSequence};
pub use synth::{synth_dataset, SynthConfig};
