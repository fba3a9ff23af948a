//! Full, part and core scale graphs.
//!
//! A scale keeps an ordered subset of the layout's joints and its own edge
//! list. The part and core scales drop the less mobile joints; the core
//! scale also links the left and right extremities directly.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GraphSpec;
use crate::error::{Error, Result};
use crate::numerics::{Var, Tensor};
use crate::skeleton::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleName {
    Full,
    Part,
    Core,
}

impl ScaleName {
    pub const ALL: [ScaleName; 3] = [ScaleName::Full, ScaleName::Part, ScaleName::Core];

    pub fn as_str(self) -> &'static str {
        match self {
            ScaleName::Full => "full",
            ScaleName::Part => "part",
            ScaleName::Core => "core",
        }
    }

    /// Parse a comma-separated list such as `full,part,core`.
    pub fn parse_list(s: &str) -> Result<Vec<ScaleName>> {
        let names = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if names.is_empty() {
            return Err(Error::config("scale list is empty"));
        }
        Ok(names)
    }
}

impl std::fmt::Display for ScaleName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScaleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ScaleName::Full),
            "part" => Ok(ScaleName::Part),
            "core" => Ok(ScaleName::Core),
            other => Err(Error::config(format!("unknown scale '{other}' (full|part|core)"))),
        }
    }
}

/// File form of a scale: 1-based joint ids of the parent layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    pub name: ScaleName,
    pub joints: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

/// Scale overrides document: `{"layout": "...", "scales": [ScaleConfig, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleFile {
    pub layout: String,
    pub scales: Vec<ScaleConfig>,
}

impl ScaleFile {
    pub fn load(path: &Path) -> Result<ScaleFile> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(format!("scale file: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleDefinition {
    pub name: ScaleName,
    /// 0-based joint indices into the parent layout, in gather order.
    pub node_subset: Vec<usize>,
    /// Edges between parent-layout joint indices, all inside the subset.
    pub edges: Vec<(usize, usize)>,
    /// Joint count of the parent layout.
    pub layout_joints: usize,
    pub layout_id: String,
}

impl ScaleDefinition {
    pub fn full(layout: &Layout) -> ScaleDefinition {
        ScaleDefinition {
            name: ScaleName::Full,
            node_subset: (0..layout.num_joints()).collect(),
            edges: layout.edges(),
            layout_joints: layout.num_joints(),
            layout_id: layout.id.clone(),
        }
    }

    pub fn from_config(config: &ScaleConfig, layout: &Layout) -> Result<ScaleDefinition> {
        let v = layout.num_joints();
        let zero = |id: usize| -> Result<usize> {
            if id == 0 || id > v {
                Err(Error::config(format!(
                    "scale {}: joint id {id} outside 1..={v}",
                    config.name
                )))
            } else {
                Ok(id - 1)
            }
        };
        let def = ScaleDefinition {
            name: config.name,
            node_subset: config.joints.iter().map(|&j| zero(j)).collect::<Result<_>>()?,
            edges: config
                .edges
                .iter()
                .map(|&[a, b]| Ok((zero(a)?, zero(b)?)))
                .collect::<Result<_>>()?,
            layout_joints: v,
            layout_id: layout.id.clone(),
        };
        def.validate()?;
        Ok(def)
    }

    pub fn to_config(&self) -> ScaleConfig {
        ScaleConfig {
            name: self.name,
            joints: self.node_subset.iter().map(|j| j + 1).collect(),
            edges: self.edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.node_subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_subset.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_subset.is_empty() {
            return Err(Error::config(format!("scale {} has no joints", self.name)));
        }
        let mut seen = HashSet::new();
        for &j in &self.node_subset {
            if j >= self.layout_joints {
                return Err(Error::dim(format!(
                    "scale {}: joint {j} outside layout of {} joints",
                    self.name, self.layout_joints
                )));
            }
            if !seen.insert(j) {
                return Err(Error::config(format!("scale {}: joint {j} listed twice", self.name)));
            }
        }
        for &(a, b) in &self.edges {
            if !seen.contains(&a) || !seen.contains(&b) {
                return Err(Error::config(format!(
                    "scale {}: edge ({a}, {b}) leaves the subset",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Graph over subset positions. The centre is the layout centre when it is
    /// kept, otherwise the first subset joint.
    pub fn graph_spec(&self, layout_center: usize) -> GraphSpec {
        let pos = |j: usize| self.node_subset.iter().position(|&s| s == j).expect("validated edge");
        GraphSpec {
            num_nodes: self.len(),
            edges: self.edges.iter().map(|&(a, b)| (pos(a), pos(b))).collect(),
            center: self
                .node_subset
                .iter()
                .position(|&s| s == layout_center)
                .unwrap_or(0),
            layout_id: format!("{}:{}", self.layout_id, self.name),
        }
    }
}

/// The shipped full, part and core scales of a layout.
pub fn default_scales(layout: &Layout) -> Result<Vec<ScaleDefinition>> {
    let mut out = vec![ScaleDefinition::full(layout)];
    for cfg in &layout.scales {
        out.push(ScaleDefinition::from_config(cfg, layout)?);
    }
    Ok(out)
}

/// Builtin layout id to its shipped scales.
pub fn default_scales_for(layout_id: &str) -> Result<Vec<ScaleDefinition>> {
    default_scales(&Layout::builtin(layout_id)?)
}

/// Shipped scales with any definitions in `overrides` replacing them by name.
pub fn resolve_scales(layout: &Layout, overrides: &[ScaleConfig]) -> Result<Vec<ScaleDefinition>> {
    let mut scales = default_scales(layout)?;
    for cfg in overrides {
        let def = ScaleDefinition::from_config(cfg, layout)?;
        match scales.iter_mut().find(|s| s.name == def.name) {
            Some(slot) => *slot = def,
            None => scales.push(def),
        }
    }
    Ok(scales)
}

/// Gather the scale's joints from a `[N, C, T, V_full]` feature map.
pub fn select_scale<'t>(x: Var<'t>, scale: &ScaleDefinition) -> Result<Var<'t>> {
    let shape = x.shape();
    if shape.len() != 4 || shape[3] != scale.layout_joints {
        return Err(Error::dim(format!(
            "select_scale: input {shape:?} does not match a {}-joint layout",
            scale.layout_joints
        )));
    }
    x.gather_joints(&scale.node_subset)
}

/// Tensor-level gather, for use outside a tape.
pub fn select_scale_tensor(x: &Tensor, scale: &ScaleDefinition) -> Result<Tensor> {
    let tape = crate::numerics::Tape::new();
    let v = tape.leaf(x.clone())?;
    Ok((*select_scale(v, scale)?.value()).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_sizes() {
        let sizes = |id| -> Vec<usize> { default_scales_for(id).unwrap().iter().map(ScaleDefinition::len).collect() };
        assert_eq!(sizes("ntu25"), vec![25, 11, 7]);
        assert_eq!(sizes("openpose18"), vec![18, 11, 7]);
    }

    #[test]
    fn unknown_layout() {
        assert!(matches!(default_scales_for("mpii16"), Err(Error::Config(_))));
    }

    #[test]
    fn parse_scale_list() {
        assert_eq!(
            ScaleName::parse_list("full, core").unwrap(),
            vec![ScaleName::Full, ScaleName::Core]
        );
        assert!(ScaleName::parse_list("full,torso").is_err());
    }

    #[test]
    fn config_roundtrip() {
        let layout = Layout::builtin("ntu25").unwrap();
        for s in default_scales(&layout).unwrap() {
            assert_eq!(ScaleDefinition::from_config(&s.to_config(), &layout).unwrap(), s);
        }
    }

    #[test]
    fn edges_outside_subset_rejected() {
        let layout = Layout::builtin("ntu25").unwrap();
        let cfg = ScaleConfig {
            name: ScaleName::Part,
            joints: vec![1, 2],
            edges: vec![[1, 3]],
        };
        assert!(ScaleDefinition::from_config(&cfg, &layout).is_err());
    }
}
