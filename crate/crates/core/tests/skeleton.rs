use mstgn::numerics::Tensor;
use mstgn::skeleton::layout::validate_parent_map;
use mstgn::skeleton::{
    bone_transform, center_normalize, load_sequence, pad_replay, synth_dataset, Dataset, DatasetManifest, Layout,
    Preprocess, SkeletonSequence, Split, Stream, SynthConfig,
};
use mstgn::Error;
use proptest::prelude::*;

fn doc(joints: usize, frames: usize, value: &str) -> String {
    let joint = format!("[{value},{value},{value}]");
    let person = format!("[{}]", vec![joint.as_str(); joints].join(","));
    let frame = format!("[{person}]");
    format!(
        r#"{{"layout":"ntu25","label":1,"true_frames":{frames},"channels":3,"persons":1,"frames":[{}]}}"#,
        vec![frame.as_str(); frames].join(",")
    )
}

fn sequence(layout: &Layout, frames: usize, data: Vec<f64>, persons: usize) -> SkeletonSequence {
    SkeletonSequence {
        data: Tensor::new(vec![layout.channels, frames, layout.num_joints(), persons], data).unwrap(),
        label: 0,
        true_frames: frames,
        layout_id: layout.id.clone(),
    }
}

#[test]
fn single_zero_frame_loads() {
    let seq = load_sequence(doc(25, 1, "0").as_bytes()).unwrap();
    assert_eq!(seq.data.shape(), &[3, 1, 25, 2]);
    assert!(seq.data.data().iter().all(|&v| v == 0.0));
    assert_eq!(seq.label, 1);
}

#[test]
fn wrong_joint_count_is_reported() {
    let err = load_sequence(doc(24, 1, "0").as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse(_)));
    assert!(err.to_string().contains("joint count 24 ≠ 25"), "{err}");
}

#[test]
fn non_numeric_coordinates_are_rejected() {
    assert!(load_sequence(doc(25, 1, "\"nan\"").as_bytes()).is_err());
    assert!(load_sequence(doc(25, 1, "1e999").as_bytes()).is_err());
    assert!(load_sequence(b"{not json").is_err());
}

#[test]
fn replay_padding() {
    let layout = Layout::builtin("ntu25").unwrap();
    let seq = sequence(&layout, 7, (0..3 * 7 * 25).map(|i| i as f64).collect(), 1);
    let padded = pad_replay(&seq, 300).unwrap();
    assert_eq!(padded.frames(), 300);
    assert_eq!(padded.frame(7), seq.frame(0));
    assert_eq!(padded.frame(299), seq.frame(5));
    assert_eq!(pad_replay(&seq, 7).unwrap(), seq);
    let mut empty = seq.clone();
    empty.true_frames = 0;
    assert!(matches!(pad_replay(&empty, 10), Err(Error::EmptyInput(_))));
}

#[test]
fn absent_persons_stay_zero_through_preprocessing() {
    let layout = Layout::builtin("ntu25").unwrap();
    let mut data = vec![0.0; 3 * 4 * 25 * 2];
    for (i, v) in data.iter_mut().enumerate() {
        if i % 2 == 0 {
            *v = 1.0 + (i as f64 * 0.37).sin();
        }
    }
    let seq = sequence(&layout, 4, data, 2);
    for stream in [Stream::Joint, Stream::Bone] {
        let pre = Preprocess {
            target_frames: 9,
            center: true,
            stream,
        };
        let out = pre.apply(&seq, &layout).unwrap();
        for c in 0..3 {
            for t in 0..9 {
                for v in 0..25 {
                    assert_eq!(out.at(c, t, v, 1), 0.0);
                }
            }
        }
        // the first person is centred on the centre joint of frame 0
        if stream == Stream::Joint {
            for c in 0..3 {
                assert_eq!(out.at(c, 0, layout.center, 0), 0.0);
            }
        }
    }
}

#[test]
fn bone_of_a_child_is_its_offset_from_the_parent() {
    let layout = Layout::builtin("ntu25").unwrap();
    let parents = layout.parent_map();
    let seq = sequence(&layout, 2, (0..3 * 2 * 25).map(|i| (i * i % 17) as f64).collect(), 1);
    let bones = bone_transform(&seq, &parents, &layout.coordinate_channels()).unwrap();
    let root = validate_parent_map(&parents).unwrap();
    for c in 0..3 {
        assert_eq!(bones.at(c, 1, root, 0), 0.0);
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                assert_eq!(bones.at(c, 1, v, 0), seq.at(c, 1, v, 0) - seq.at(c, 1, p, 0));
            }
        }
    }
}

#[test]
fn parent_maps_must_be_single_rooted_trees() {
    assert_eq!(validate_parent_map(&[None, Some(0), Some(1)]).unwrap(), 0);
    assert!(matches!(validate_parent_map(&[Some(1), Some(0)]), Err(Error::Config(_))));
    assert!(matches!(validate_parent_map(&[None, Some(2), Some(1)]), Err(Error::Config(_))));
    assert!(matches!(validate_parent_map(&[None, None]), Err(Error::Config(_))));
}

#[test]
fn sequence_json_round_trip() {
    let layout = Layout::builtin("ntu25").unwrap();
    let mut seq = sequence(&layout, 3, (0..3 * 3 * 25 * 2).map(|i| (i as f64).cos() * 0.1).collect(), 2);
    seq.true_frames = 2;
    assert_eq!(load_sequence(seq.to_json().as_bytes()).unwrap(), seq);
}

#[test]
fn dataset_on_disk_round_trip() {
    let layout = Layout::builtin("ntu25").unwrap();
    let config = SynthConfig {
        classes: 3,
        per_class: 2,
        test_per_class: 1,
        frames: 6,
        ..SynthConfig::default()
    };
    let ds = synth_dataset(&config, &layout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = ds.write(dir.path()).unwrap();
    assert_eq!(Dataset::load(&manifest).unwrap(), ds);
}

#[test]
fn duplicate_manifest_locator_is_rejected() {
    let text = r#"{"layout":"ntu25","class_count":2,"entries":[
        {"path":"a.json","label":0,"split":"train"},
        {"path":"a.json","label":1,"split":"train"}]}"#;
    let err = DatasetManifest::from_json(text).unwrap_err();
    assert!(err.to_string().contains("duplicate"), "{err}");
}

#[test]
fn synthetic_data_is_deterministic_and_balanced() {
    let layout = Layout::builtin("ntu25").unwrap();
    let config = SynthConfig::default();
    let a = synth_dataset(&config, &layout).unwrap();
    assert_eq!(a, synth_dataset(&config, &layout).unwrap());
    let other = synth_dataset(&SynthConfig { seed: 1, ..config.clone() }, &layout).unwrap();
    assert_ne!(a.sequences, other.sequences);
    assert_eq!(a.len(), 64);
    let labels = a.labels(&a.manifest.indices(Split::Train));
    for c in 0..2 {
        assert_eq!(labels.iter().filter(|&&l| l == c).count(), 32);
    }
}

/// Per-joint motion energy (variance over time) as a feature vector.
fn energy(seq: &SkeletonSequence) -> Vec<f64> {
    let mut out = Vec::new();
    for c in 0..3 {
        for v in 0..seq.joints() {
            let xs: Vec<f64> = (0..seq.true_frames).map(|t| seq.at(c, t, v, 0)).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            out.push(xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64);
        }
    }
    out
}

#[test]
fn synthetic_classes_are_separable_by_a_nearest_centroid() {
    let layout = Layout::builtin("ntu25").unwrap();
    let config = SynthConfig {
        classes: 4,
        per_class: 8,
        test_per_class: 8,
        frames: 48,
        ..SynthConfig::default()
    };
    let ds = synth_dataset(&config, &layout).unwrap();
    let feats: Vec<Vec<f64>> = ds.sequences.iter().map(energy).collect();
    let dim = feats[0].len();
    let mut centroids = vec![vec![0.0; dim]; 4];
    let train = ds.manifest.indices(Split::Train);
    for &i in &train {
        for (c, f) in centroids[ds.sequences[i].label].iter_mut().zip(&feats[i]) {
            *c += f / 8.0;
        }
    }
    let test = ds.manifest.indices(Split::Test);
    let correct = test
        .iter()
        .filter(|&&i| {
            let dist = |c: &Vec<f64>| c.iter().zip(&feats[i]).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let best = (0..4).min_by(|&a, &b| dist(&centroids[a]).total_cmp(&dist(&centroids[b]))).unwrap();
            best == ds.sequences[i].label
        })
        .count();
    assert!(correct as f64 / test.len() as f64 > 0.5, "{correct}/{}", test.len());
}

fn ntu_sequence(frames: usize, persons: usize) -> impl Strategy<Value = SkeletonSequence> {
    prop::collection::vec(-2.0f64..2.0, 3 * frames * 25 * persons).prop_map(move |d| {
        let layout = Layout::builtin("ntu25").unwrap();
        sequence(&layout, frames, d, persons)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn padded_frames_come_from_the_input(seq in ntu_sequence(5, 1), target in 1usize..40) {
        let out = pad_replay(&seq, target).unwrap();
        for t in 0..target {
            prop_assert_eq!(out.frame(t), seq.frame(t % 5));
        }
        prop_assert_eq!(pad_replay(&out, target).unwrap(), out);
    }

    #[test]
    fn centring_is_idempotent_and_translation_invariant(seq in ntu_sequence(3, 1), shift in prop::array::uniform3(-5.0f64..5.0)) {
        let layout = Layout::builtin("ntu25").unwrap();
        let once = center_normalize(&seq, &layout).unwrap();
        prop_assert_eq!(&center_normalize(&once, &layout).unwrap(), &once);
        let mut moved = seq.clone();
        for c in 0..3 {
            for t in 0..3 {
                for v in 0..25 {
                    let i = moved.index(c, t, v, 0);
                    moved.data.data_mut()[i] += shift[c];
                }
            }
        }
        let a = center_normalize(&moved, &layout).unwrap();
        prop_assert!(a.data.max_abs_diff(&once.data).unwrap() < 1e-12);
    }

    #[test]
    fn bones_ignore_centring(seq in ntu_sequence(3, 1)) {
        let layout = Layout::builtin("ntu25").unwrap();
        let (p, c) = (layout.parent_map(), layout.coordinate_channels());
        let direct = bone_transform(&seq, &p, &c).unwrap();
        let centred = bone_transform(&center_normalize(&seq, &layout).unwrap(), &p, &c).unwrap();
        prop_assert!(direct.data.max_abs_diff(&centred.data).unwrap() < 1e-12);
    }
}
