use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Layout;
use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// One clip of joint coordinates, stored channel-major as `[C, T, V, M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence {
    pub data: Tensor,
    pub label: usize,
    /// Number of recorded frames; frames past this are replays or absent.
    pub true_frames: usize,
    pub layout_id: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDoc {
    layout: String,
    label: usize,
    true_frames: usize,
    channels: usize,
    persons: usize,
    frames: Value,
}

impl SkeletonSequence {
    pub fn channels(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn frames(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn joints(&self) -> usize {
        self.data.shape()[2]
    }

    pub fn persons(&self) -> usize {
        self.data.shape()[3]
    }

    #[inline]
    pub fn index(&self, c: usize, t: usize, v: usize, m: usize) -> usize {
        let s = self.data.shape();
        ((c * s[1] + t) * s[2] + v) * s[3] + m
    }

    pub fn at(&self, c: usize, t: usize, v: usize, m: usize) -> f64 {
        self.data.data()[self.index(c, t, v, m)]
    }

    /// All values of frame `t` in `[C, V, M]` order.
    pub fn frame(&self, t: usize) -> Vec<f64> {
        let (c, v, m) = (self.channels(), self.joints(), self.persons());
        let mut out = Vec::with_capacity(c * v * m);
        for ci in 0..c {
            let start = self.index(ci, t, 0, 0);
            out.extend_from_slice(&self.data.data()[start..start + v * m]);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let (c, t, v, m) = (self.channels(), self.frames(), self.joints(), self.persons());
        let frames: Vec<Vec<Vec<Vec<f64>>>> = (0..t)
            .map(|ti| {
                (0..m)
                    .map(|mi| {
                        (0..v)
                            .map(|vi| (0..c).map(|ci| self.at(ci, ti, vi, mi)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let doc = SequenceDoc {
            layout: self.layout_id.clone(),
            label: self.label,
            true_frames: self.true_frames,
            channels: c,
            persons: m,
            frames: serde_json::to_value(frames).expect("finite coordinates serialize"),
        };
        serde_json::to_string(&doc).expect("sequence serializes")
    }
}

/// Parse a sequence document against a builtin layout named in the document.
pub fn load_sequence(bytes: &[u8]) -> Result<SkeletonSequence> {
    let doc = parse_doc(bytes)?;
    let layout = Layout::builtin(&doc.layout)?;
    build(doc, &layout)
}

/// Parse a sequence document against an explicit layout.
pub fn load_sequence_with(bytes: &[u8], layout: &Layout) -> Result<SkeletonSequence> {
    let doc = parse_doc(bytes)?;
    if doc.layout != layout.id {
        return Err(Error::parse(format!(
            "sequence declares layout '{}' but '{}' was expected",
            doc.layout, layout.id
        )));
    }
    build(doc, layout)
}

fn parse_doc(bytes: &[u8]) -> Result<SequenceDoc> {
    serde_json::from_slice(bytes).map_err(|e| Error::parse(format!("malformed sequence JSON: {e}")))
}

fn build(doc: SequenceDoc, layout: &Layout) -> Result<SkeletonSequence> {
    let v = layout.num_joints();
    let c = layout.channels;
    let m_max = layout.max_persons;
    if doc.channels != c {
        return Err(Error::parse(format!(
            "channel count {} ≠ {c} for layout {}",
            doc.channels, layout.id
        )));
    }
    if doc.persons == 0 || doc.persons > m_max {
        return Err(Error::parse(format!(
            "person count {} outside 1..={m_max} for layout {}",
            doc.persons, layout.id
        )));
    }
    let frames = doc
        .frames
        .as_array()
        .ok_or_else(|| Error::parse("'frames' must be an array"))?;
    let t = frames.len();
    if t == 0 {
        return Err(Error::EmptyInput("sequence has no frames".into()));
    }
    if doc.true_frames == 0 || doc.true_frames > t {
        return Err(Error::parse(format!(
            "true_frames {} outside 1..={t}",
            doc.true_frames
        )));
    }
    let mut data = vec![0.0; c * t * v * m_max];
    for (ti, frame) in frames.iter().enumerate() {
        let persons = frame
            .as_array()
            .ok_or_else(|| Error::parse(format!("frame {ti}: expected an array of persons")))?;
        if persons.len() != doc.persons {
            return Err(Error::parse(format!(
                "frame {ti}: person count {} ≠ {}",
                persons.len(),
                doc.persons
            )));
        }
        for (mi, person) in persons.iter().enumerate() {
            let joints = person
                .as_array()
                .ok_or_else(|| Error::parse(format!("frame {ti}, person {mi}: expected an array of joints")))?;
            if joints.len() != v {
                return Err(Error::parse(format!(
                    "frame {ti}, person {mi}: joint count {} ≠ {v}",
                    joints.len()
                )));
            }
            for (vi, joint) in joints.iter().enumerate() {
                let coords = joint.as_array().filter(|a| a.len() == c).ok_or_else(|| {
                    Error::parse(format!("frame {ti}, person {mi}, joint {vi}: expected {c} numbers"))
                })?;
                for (ci, value) in coords.iter().enumerate() {
                    let x = value.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
                        Error::parse(format!(
                            "frame {ti}, person {mi}, joint {vi}, channel {ci}: not a finite number"
                        ))
                    })?;
                    data[((ci * t + ti) * v + vi) * m_max + mi] = x;
                }
            }
        }
    }
    Ok(SkeletonSequence {
        data: Tensor::new(vec![c, t, v, m_max], data)?,
        label: doc.label,
        true_frames: doc.true_frames,
        layout_id: layout.id.clone(),
    })
}
