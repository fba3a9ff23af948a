//! Replay padding, centring and the bone stream on one synthetic clip.

use mstgn::skeleton::{bone_transform, center_normalize, pad_replay, synth_dataset, Layout, SynthConfig};

fn main() -> mstgn::Result<()> {
    let layout = Layout::builtin("ntu25")?;
    let data = synth_dataset(
        &SynthConfig {
            per_class: 1,
            frames: 20,
            seed: 3,
            ..Default::default()
        },
        &layout,
    )?;
    let clip = &data.sequences[0];
    println!("clip: label {}, {} true frames of {}", clip.label, clip.true_frames, clip.frames());

    let padded = pad_replay(clip, 300)?;
    let replayed = 299 % clip.true_frames;
    println!(
        "padded to {} frames; frame 299 replays frame {replayed}: {}",
        padded.frames(),
        padded.frame(299) == clip.frame(replayed)
    );

    let centred = center_normalize(&padded, &layout)?;
    let c = layout.center;
    println!(
        "centre joint at frame 0 before ({:.3}, {:.3}, {:.3}) after ({:.3}, {:.3}, {:.3})",
        padded.at(0, 0, c, 0),
        padded.at(1, 0, c, 0),
        padded.at(2, 0, c, 0),
        centred.at(0, 0, c, 0),
        centred.at(1, 0, c, 0),
        centred.at(2, 0, c, 0),
    );

    let bones = bone_transform(&centred, &layout.parent_map(), &layout.coordinate_channels())?;
    let root = layout.parent_map().iter().position(Option::is_none).expect("layouts have a root");
    let root_zero = (0..bones.frames()).all(|t| (0..3).all(|ch| bones.at(ch, t, root, 0) == 0.0));
    println!("bone stream: root joint '{}' is zero in every frame: {root_zero}", layout.joints[root].name);
    let j = 5;
    let p = layout.parent_map()[j].expect("joint 5 has a parent");
    println!(
        "bone of '{}' at frame 0: ({:.3}, {:.3}, {:.3})",
        layout.joints[j].name,
        bones.at(0, 0, j, 0),
        bones.at(1, 0, j, 0),
        bones.at(2, 0, j, 0)
    );
    println!(
        "  equals joint minus parent '{}': ({:.3}, {:.3}, {:.3})",
        layout.joints[p].name,
        centred.at(0, 0, j, 0) - centred.at(0, 0, p, 0),
        centred.at(1, 0, j, 0) - centred.at(1, 0, p, 0),
        centred.at(2, 0, j, 0) - centred.at(2, 0, p, 0)
    );
    Ok(())
}
