//! Skeleton layouts: joint tables, parent maps, centre joints and the
//! shipped scale definitions. Layouts are JSON data; two are embedded.
//!
//! Joint ids in the file format are 1-based. In memory everything is 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::ScaleConfig;

const NTU25: &str = include_str!("../../data/layouts/ntu25.json");
const OPENPOSE18: &str = include_str!("../../data/layouts/openpose18.json");

pub const BUILTIN_LAYOUTS: [&str; 2] = ["ntu25", "openpose18"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointFile {
    pub name: String,
    /// 1-based parent id, `null` for the root.
    pub parent: Option<usize>,
    pub side: Side,
}

/// On-disk layout document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub id: String,
    pub channels: usize,
    /// 0-based channel index holding detection confidence, if any.
    pub confidence_channel: Option<usize>,
    pub max_persons: usize,
    /// 1-based centre joint.
    pub center: usize,
    pub joints: Vec<JointFile>,
    #[serde(default)]
    pub scales: Vec<ScaleConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayoutFile", into = "LayoutFile")]
pub struct Layout {
    pub id: String,
    pub channels: usize,
    pub confidence_channel: Option<usize>,
    pub max_persons: usize,
    pub center: usize,
    pub joints: Vec<Joint>,
    /// Shipped non-full scale definitions (file form, 1-based).
    pub scales: Vec<ScaleConfig>,
}

impl Layout {
    pub fn builtin(id: &str) -> Result<Layout> {
        let text = match id {
            "ntu25" => NTU25,
            "openpose18" => OPENPOSE18,
            other => {
                return Err(Error::config(format!(
                    "unknown layout '{other}' (known: {})",
                    BUILTIN_LAYOUTS.join(", ")
                )))
            }
        };
        Layout::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Layout> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("layout: {e}")))
    }

    pub fn num_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn parent_map(&self) -> Vec<Option<usize>> {
        self.joints.iter().map(|j| j.parent).collect()
    }

    /// Skeleton edges as `(child, parent)` pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.joints
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.parent.map(|p| (i, p)))
            .collect()
    }

    /// Channels carrying spatial coordinates (everything but confidence).
    pub fn coordinate_channels(&self) -> Vec<usize> {
        (0..self.channels)
            .filter(|&c| Some(c) != self.confidence_channel)
            .collect()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }
}

/// Checks that `parents` forms a forest with exactly one root and no
/// cycles. Returns the root.
pub fn validate_parent_map(parents: &[Option<usize>]) -> Result<usize> {
    let n = parents.len();
    let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
    if roots.len() != 1 {
        return Err(Error::config(format!(
            "parent map must have exactly one root, found {}",
            roots.len()
        )));
    }
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            if *p >= n {
                return Err(Error::config(format!("joint {i} has out-of-range parent {p}")));
            }
        }
    }
    for start in 0..n {
        let mut cur = start;
        for _ in 0..=n {
            match parents[cur] {
                None => break,
                Some(p) => cur = p,
            }
        }
        if parents[cur].is_some() {
            return Err(Error::config(format!("parent map has a cycle through joint {start}")));
        }
    }
    Ok(roots[0])
}

impl TryFrom<LayoutFile> for Layout {
    type Error = Error;

    fn try_from(f: LayoutFile) -> Result<Layout> {
        let v = f.joints.len();
        if v == 0 {
            return Err(Error::config(format!("layout '{}' has no joints", f.id)));
        }
        let to_zero = |id: usize, what: &str| -> Result<usize> {
            if id == 0 || id > v {
                Err(Error::config(format!("layout '{}': {what} id {id} outside 1..={v}", f.id)))
            } else {
                Ok(id - 1)
            }
        };
        let mut joints = Vec::with_capacity(v);
        for j in &f.joints {
            joints.push(Joint {
                name: j.name.clone(),
                parent: j.parent.map(|p| to_zero(p, "parent")).transpose()?,
                side: j.side,
            });
        }
        let parents: Vec<Option<usize>> = joints.iter().map(|j| j.parent).collect();
        validate_parent_map(&parents)?;
        if f.channels == 0 {
            return Err(Error::config("layout needs at least one channel"));
        }
        if let Some(c) = f.confidence_channel {
            if c >= f.channels {
                return Err(Error::config("confidence channel out of range"));
            }
        }
        if f.max_persons == 0 {
            return Err(Error::config("max_persons must be at least 1"));
        }
        Ok(Layout {
            center: to_zero(f.center, "center")?,
            id: f.id,
            channels: f.channels,
            confidence_channel: f.confidence_channel,
            max_persons: f.max_persons,
            joints,
            scales: f.scales,
        })
    }
}

impl From<Layout> for LayoutFile {
    fn from(l: Layout) -> LayoutFile {
        LayoutFile {
            id: l.id,
            channels: l.channels,
            confidence_channel: l.confidence_channel,
            max_persons: l.max_persons,
            center: l.center + 1,
            joints: l
                .joints
                .into_iter()
                .map(|j| JointFile {
                    name: j.name,
                    parent: j.parent.map(|p| p + 1),
                    side: j.side,
                })
                .collect(),
            scales: l.scales,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_load() {
        let ntu = Layout::builtin("ntu25").unwrap();
        assert_eq!(ntu.num_joints(), 25);
        assert_eq!(ntu.joints[ntu.center].name, "spine_shoulder");
        assert_eq!(ntu.max_persons, 2);
        assert_eq!(ntu.edges().len(), 24);

        let op = Layout::builtin("openpose18").unwrap();
        assert_eq!(op.num_joints(), 18);
        assert_eq!(op.joints[op.center].name, "neck");
        assert_eq!(op.coordinate_channels(), vec![0, 1]);
    }

    #[test]
    fn unknown_layout_is_config_error() {
        assert!(matches!(Layout::builtin("coco17"), Err(Error::Config(_))));
    }

    #[test]
    fn cyclic_parent_map_rejected() {
        let parents = [None, Some(2), Some(1)];
        assert!(matches!(validate_parent_map(&parents), Err(Error::Config(_))));
        assert_eq!(validate_parent_map(&[Some(1), None, Some(1)]).unwrap(), 1);
    }

    #[test]
    fn serde_roundtrip_preserves_layout() {
        let ntu = Layout::builtin("ntu25").unwrap();
        let text = serde_json::to_string(&ntu).unwrap();
        assert_eq!(Layout::from_json(&text).unwrap(), ntu);
    }
}
