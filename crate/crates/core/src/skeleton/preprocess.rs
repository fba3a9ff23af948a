use serde::{Deserialize, Serialize};

use super::layout::validate_parent_map;
use super::{Layout, SkeletonSequence};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

pub const DEFAULT_TARGET_FRAMES: usize = 300;

/// Input representation fed to the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stream {
    /// Raw joint coordinates.
    #[default]
    Joint,
    /// Offsets of each joint from its skeletal parent.
    Bone,
}

impl std::str::FromStr for Stream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(Stream::Joint),
            "bone" => Ok(Stream::Bone),
            other => Err(Error::config(format!("unknown stream '{other}' (joint|bone)"))),
        }
    }
}

/// Extend (or cut) a sequence to `target_frames` by cycling its true frames:
/// output frame `i` is input frame `i mod true_frames`.
pub fn pad_replay(seq: &SkeletonSequence, target_frames: usize) -> Result<SkeletonSequence> {
    if seq.true_frames == 0 {
        return Err(Error::EmptyInput("cannot replay a sequence with zero true frames".into()));
    }
    if target_frames == 0 {
        return Err(Error::config("target frame count must be positive"));
    }
    let (c, t, v, m) = (seq.channels(), seq.frames(), seq.joints(), seq.persons());
    let true_frames = seq.true_frames.min(t);
    let block = v * m;
    let mut out = vec![0.0; c * target_frames * block];
    let src = seq.data.data();
    for ci in 0..c {
        for i in 0..target_frames {
            let from = (ci * t + i % true_frames) * block;
            let to = (ci * target_frames + i) * block;
            out[to..to + block].copy_from_slice(&src[from..from + block]);
        }
    }
    Ok(SkeletonSequence {
        data: Tensor::new(vec![c, target_frames, v, m], out)?,
        label: seq.label,
        true_frames: true_frames.min(target_frames),
        layout_id: seq.layout_id.clone(),
    })
}

/// Translate every coordinate so that the layout's centre joint of frame 0,
/// person 0 sits at the origin. Confidence channels and absent (all-zero)
/// persons are left alone.
pub fn center_normalize(seq: &SkeletonSequence, layout: &Layout) -> Result<SkeletonSequence> {
    check_layout(seq, layout)?;
    let (t, v, m) = (seq.frames(), seq.joints(), seq.persons());
    let coords = layout.coordinate_channels();
    let present: Vec<bool> = (0..m)
        .map(|mi| {
            coords
                .iter()
                .any(|&c| (0..t).any(|ti| (0..v).any(|vi| seq.at(c, ti, vi, mi) != 0.0)))
        })
        .collect();
    let mut out = seq.clone();
    let dst = out.data.data_mut();
    for &c in &coords {
        let origin = seq.at(c, 0, layout.center, 0);
        for ti in 0..t {
            for vi in 0..v {
                for mi in (0..m).filter(|&mi| present[mi]) {
                    dst[seq.index(c, ti, vi, mi)] -= origin;
                }
            }
        }
    }
    Ok(out)
}

/// Replace each joint by its offset from its parent; the root becomes zero.
pub fn bone_transform(seq: &SkeletonSequence, parents: &[Option<usize>], coordinate_channels: &[usize]) -> Result<SkeletonSequence> {
    if parents.len() != seq.joints() {
        return Err(Error::dim(format!(
            "parent map covers {} joints, sequence has {}",
            parents.len(),
            seq.joints()
        )));
    }
    validate_parent_map(parents)?;
    let (t, m) = (seq.frames(), seq.persons());
    let mut out = seq.clone();
    let dst = out.data.data_mut();
    for &c in coordinate_channels {
        for ti in 0..t {
            for (vi, parent) in parents.iter().enumerate() {
                for mi in 0..m {
                    let here = seq.at(c, ti, vi, mi);
                    dst[seq.index(c, ti, vi, mi)] = match parent {
                        Some(p) => here - seq.at(c, ti, *p, mi),
                        None => 0.0,
                    };
                }
            }
        }
    }
    Ok(out)
}

fn check_layout(seq: &SkeletonSequence, layout: &Layout) -> Result<()> {
    if seq.joints() != layout.num_joints() || seq.channels() != layout.channels {
        return Err(Error::dim(format!(
            "sequence [{} channels, {} joints] does not match layout {}",
            seq.channels(),
            seq.joints(),
            layout.id
        )));
    }
    Ok(())
}

/// The preprocessing applied to every clip before it reaches the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Preprocess {
    pub target_frames: usize,
    pub center: bool,
    pub stream: Stream,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess {
            target_frames: DEFAULT_TARGET_FRAMES,
            center: true,
            stream: Stream::Joint,
        }
    }
}

impl Preprocess {
    pub fn apply(&self, seq: &SkeletonSequence, layout: &Layout) -> Result<SkeletonSequence> {
        check_layout(seq, layout)?;
        let mut out = pad_replay(seq, self.target_frames)?;
        if self.center {
            out = center_normalize(&out, layout)?;
        }
        if self.stream == Stream::Bone {
            out = bone_transform(&out, &layout.parent_map(), &layout.coordinate_channels())?;
        }
        Ok(out)
    }
}
