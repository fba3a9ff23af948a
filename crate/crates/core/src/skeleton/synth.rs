//! Deterministic synthetic action datasets.
//!
//! Each class is a distinct oscillation pattern: every bone swings about its
//! parent joint along its own axis with a class-specific amplitude, frequency
//! and phase, and a joint's displacement is the sum of the swings along its
//! chain to the root. Clips add a random global offset, a small phase jitter,
//! Gaussian noise and a random true length.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, DatasetManifest, Layout, ManifestEntry, SkeletonSequence, Split};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    /// Extra held-out clips per class, tagged `test`.
    pub test_per_class: usize,
    pub frames: usize,
    pub seed: u64,
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 2,
            per_class: 32,
            test_per_class: 0,
            frames: 64,
            seed: 0,
            noise: 0.01,
        }
    }
}

struct BoneMotion {
    amplitude: f64,
    cycles: f64,
    phase: f64,
    axis: [f64; 3],
}

fn depth_of(parents: &[Option<usize>]) -> Vec<usize> {
    (0..parents.len())
        .map(|mut v| {
            let mut d = 0;
            while let Some(p) = parents[v] {
                d += 1;
                v = p;
            }
            d
        })
        .collect()
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.2 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Generate a balanced labelled dataset. Identical configs produce
/// bit-identical datasets.
pub fn synth_dataset(config: &SynthConfig, layout: &Layout) -> Result<Dataset> {
    if config.classes < 2 {
        return Err(Error::config("synthetic datasets need at least two classes"));
    }
    if config.per_class == 0 || config.frames == 0 {
        return Err(Error::config("per_class and frames must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let parents = layout.parent_map();
    let depth = depth_of(&parents);
    let v = layout.num_joints();
    let c = layout.channels;
    let m = layout.max_persons;
    let coords = layout.coordinate_channels();

    // rest pose: accumulate random bone vectors down the tree
    let mut rest = vec![[0.0f64; 3]; v];
    let mut order: Vec<usize> = (0..v).collect();
    order.sort_by_key(|&j| depth[j]);
    for &j in &order {
        if let Some(p) = parents[j] {
            let dir = unit_vector(&mut rng);
            for a in 0..3 {
                rest[j][a] = rest[p][a] + 0.25 * dir[a];
            }
        }
    }

    let motions: Vec<Vec<BoneMotion>> = (0..config.classes)
        .map(|_| {
            (0..v)
                .map(|_| BoneMotion {
                    amplitude: rng.random_range(0.03..0.12),
                    cycles: rng.random_range(1..=3) as f64,
                    phase: rng.random_range(0.0..TAU),
                    axis: unit_vector(&mut rng),
                })
                .collect()
        })
        .collect();

    let noise = Normal::new(0.0, config.noise.max(0.0)).map_err(|e| Error::config(e.to_string()))?;
    let mut entries = Vec::new();
    let mut sequences = Vec::new();
    let total_per_class = config.per_class + config.test_per_class;
    for class in 0..config.classes {
        for k in 0..total_per_class {
            let true_frames = rng.random_range(config.frames.div_ceil(2)..=config.frames);
            let offset = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let jitter: f64 = rng.random_range(-0.2..0.2);
            let gain: f64 = rng.random_range(0.9..1.1);
            let mut data = vec![0.0; c * true_frames * v * m];
            let mut disp = vec![[0.0f64; 3]; v];
            for t in 0..true_frames {
                let s = t as f64 / true_frames as f64;
                // each bone swings about its parent; joints accumulate their chain's swings
                for &j in &order {
                    let base = parents[j].map_or([0.0; 3], |p| disp[p]);
                    let bone = &motions[class][j];
                    let swing = match parents[j] {
                        Some(_) => gain * bone.amplitude * (TAU * bone.cycles * s + bone.phase + jitter).sin(),
                        None => 0.0,
                    };
                    for a in 0..3 {
                        disp[j][a] = base[a] + swing * bone.axis[a];
                    }
                }
                for j in 0..v {
                    for (ci, &channel) in coords.iter().enumerate() {
                        let axis = ci.min(2);
                        let value = rest[j][axis] + offset[axis] + disp[j][axis] + noise.sample(&mut rng);
                        data[((channel * true_frames + t) * v + j) * m] = value;
                    }
                    if let Some(conf) = layout.confidence_channel {
                        data[((conf * true_frames + t) * v + j) * m] = rng.random_range(0.8..1.0);
                    }
                }
            }
            let index = entries.len();
            let path = format!("sequences/{index:06}.json");
            entries.push(ManifestEntry {
                path,
                label: class,
                split: if k < config.per_class { Split::Train } else { Split::Test },
            });
            sequences.push(SkeletonSequence {
                data: Tensor::new(vec![c, true_frames, v, m], data)?,
                label: class,
                true_frames,
                layout_id: layout.id.clone(),
            });
        }
    }
    let manifest = DatasetManifest {
        layout: layout.id.clone(),
        class_count: config.classes,
        entries,
    };
    Dataset::new(manifest, layout.clone(), sequences)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_balance() {
        let layout = Layout::builtin("ntu25").unwrap();
        let d = synth_dataset(&SynthConfig { frames: 16, ..Default::default() }, &layout).unwrap();
        assert_eq!(d.len(), 64);
        let ones = d.sequences.iter().filter(|s| s.label == 1).count();
        assert_eq!(ones, 32);
    }

    #[test]
    fn one_class_is_rejected() {
        let layout = Layout::builtin("ntu25").unwrap();
        let cfg = SynthConfig { classes: 1, ..Default::default() };
        assert!(synth_dataset(&cfg, &layout).is_err());
    }

    #[test]
    fn depth_counts_hops_to_root() {
        // 0 <- 1 <- 2, 0 <- 3
        let parents = [None, Some(0), Some(1), Some(0)];
        assert_eq!(depth_of(&parents), vec![0, 1, 2, 1]);
    }
}
