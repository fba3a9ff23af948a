use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_sequence_with, Layout, SkeletonSequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::config(format!("unknown split '{other}' (train|test)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Sequence file path relative to the manifest.
    pub path: String,
    pub label: usize,
    pub split: Split,
}

/// List of labelled sequence files with their split tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub layout: String,
    pub class_count: usize,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.class_count == 0 {
            return Err(Error::config("manifest class_count must be positive"));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.label >= self.class_count {
                return Err(Error::config(format!(
                    "entry {} has label {} outside 0..{}",
                    e.path, e.label, self.class_count
                )));
            }
            if !seen.insert(e.path.as_str()) {
                return Err(Error::config(format!("duplicate manifest locator {}", e.path)));
            }
        }
        Ok(())
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| self.entries[i].split == split)
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: DatasetManifest = serde_json::from_str(text).map_err(|e| Error::parse(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }
}

/// Manifest plus the sequences it lists, in entry order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub layout: Layout,
    pub sequences: Vec<SkeletonSequence>,
}

impl Dataset {
    pub fn new(manifest: DatasetManifest, layout: Layout, sequences: Vec<SkeletonSequence>) -> Result<Self> {
        manifest.validate()?;
        if manifest.layout != layout.id {
            return Err(Error::config(format!(
                "manifest layout '{}' ≠ '{}'",
                manifest.layout, layout.id
            )));
        }
        if manifest.entries.len() != sequences.len() {
            return Err(Error::contract("manifest and sequence counts differ"));
        }
        for (e, s) in manifest.entries.iter().zip(&sequences) {
            if e.label != s.label {
                return Err(Error::config(format!(
                    "{}: manifest label {} ≠ file label {}",
                    e.path, e.label, s.label
                )));
            }
        }
        Ok(Dataset {
            manifest,
            layout,
            sequences,
        })
    }

    pub fn load(manifest_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
        let manifest = DatasetManifest::from_json(&text)?;
        let layout = Layout::builtin(&manifest.layout)?;
        let root = manifest_path.parent().unwrap_or(Path::new("."));
        let mut sequences = Vec::with_capacity(manifest.entries.len());
        for e in &manifest.entries {
            let path = root.join(&e.path);
            let bytes = fs::read(&path).map_err(|err| Error::io(&path, err))?;
            let seq = load_sequence_with(&bytes, &layout)
                .map_err(|err| Error::parse(format!("{}: {err}", path.display())))?;
            sequences.push(seq);
        }
        Dataset::new(manifest, layout, sequences)
    }

    /// Writes `manifest.json` and each sequence file under `dir`; returns
    /// the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        for (e, s) in self.manifest.entries.iter().zip(&self.sequences) {
            let path = dir.join(&e.path);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|err| Error::io(parent, err))?;
            }
            fs::write(&path, s.to_json()).map_err(|err| Error::io(&path, err))?;
        }
        let manifest_path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
        Ok(manifest_path)
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn labels(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.sequences[i].label).collect()
    }
}
