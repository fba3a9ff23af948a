use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use mstgn::model::{count_flops, count_params, InputShape, ModelConfig, TgnModel};
use serde_json::Value;

fn mstgn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstgn")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (k, v) in tree(&path) {
                out.insert(format!("{}/{k}", path.file_name().unwrap().to_string_lossy()), v);
            }
        } else {
            out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap());
        }
    }
    out
}

fn synth(dir: &Path, extra: &[&str]) -> String {
    let out = dir.to_str().unwrap();
    let mut args = vec!["synth", "--out", out, "--json"];
    args.extend_from_slice(extra);
    let doc = json_of(&mstgn(&args));
    doc["manifest"].as_str().unwrap().to_string()
}

#[test]
fn count_matches_the_library() {
    let doc = json_of(&mstgn(&["count", "--config", "ntu25_default", "--json"]));
    let model = TgnModel::from_config(ModelConfig::ntu25_default(), 0).unwrap();
    assert_eq!(doc["params"]["total"].as_u64(), Some(count_params(&model).total));
    let macs = count_flops(&model, InputShape::clip(2)).unwrap();
    assert_eq!(doc["flops"]["total"].as_u64(), Some(macs.total));
    assert_eq!(doc["flops"]["graph_mixing"].as_u64(), Some(macs.graph_mixing));
    assert!(doc["baseline"]["params"].as_u64().unwrap() > doc["params"]["total"].as_u64().unwrap());

    let text = mstgn(&["count", "--config", "ntu25_default"]);
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("classifier"));
    assert!(text.contains("total"));
    assert!(text.contains("TGN <= baseline"));
}

#[test]
fn gradcheck_passes() {
    let doc = json_of(&mstgn(&["gradcheck", "--seeds", "2", "--json"]));
    assert_eq!(doc["pass"], Value::Bool(true));
    assert!(doc["max_rel_error"].as_f64().unwrap() < 1e-4);
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--classes", "2", "--per-class", "32", "--seed", "7", "--frames", "8"];
    synth(a.path(), &args);
    synth(b.path(), &args);
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.len(), 65);
    assert_eq!(ta, tb);
}

#[test]
fn usage_and_runtime_errors_have_distinct_exit_codes() {
    assert_eq!(mstgn(&["count"]).status.code(), Some(1));
    assert_eq!(mstgn(&["count", "--config", "ntu25_default", "--set", "model.bogus=1"]).status.code(), Some(1));
    assert_eq!(mstgn(&["count", "--config", "no_such_preset"]).status.code(), Some(1));
    assert_eq!(mstgn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mstgn(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), &["--per-class", "2", "--frames", "8"]);
    let out = mstgn(&[
        "train", "--config", "desk", "--data", &manifest,
        "--set", "train.epochs=2", "--set", "train.target_frames=8", "--set", "train.base_lr=1e308",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let missing = mstgn(&["train", "--config", "desk", "--data", "/nonexistent/manifest.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn train_eval_convert_and_ablate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let manifest = synth(&data, &["--per-class", "4", "--test-per-class", "2", "--frames", "8", "--seed", "3"]);
    let ckpt = dir.path().join("model.json").to_str().unwrap().to_string();
    let common = ["--config", "desk", "--set", "train.epochs=2", "--set", "train.target_frames=8", "--set", "train.batch_size=4"];
    let train = |extra: &[&str]| {
        let mut args = vec!["train", "--data", manifest.as_str(), "--json"];
        args.extend_from_slice(&common);
        args.extend_from_slice(extra);
        json_of(&mstgn(&args))
    };
    let a = train(&["--save", ckpt.as_str()]);
    let mut b = train(&[]);
    let mut a_cmp = a.clone();
    a_cmp["wall_clock_seconds"] = Value::Null;
    b["wall_clock_seconds"] = Value::Null;
    assert_eq!(a_cmp, b);
    assert_eq!(a["epochs"].as_array().unwrap().len(), 2);

    let mut args = vec!["eval", "--checkpoint", ckpt.as_str(), "--data", manifest.as_str(), "--split", "train", "--json"];
    args.extend_from_slice(&common);
    let e = json_of(&mstgn(&args));
    assert_eq!(e["metrics"]["top1"], a["final_train"]["top1"]);
    let fused = json_of(&mstgn(&[
        "eval", "--checkpoint", &ckpt, "--checkpoint", &ckpt, "--weight", "1", "--weight", "3",
        "--data", &manifest, "--split", "train", "--json",
        "--config", "desk", "--set", "train.target_frames=8", "--set", "train.batch_size=4",
    ]));
    assert_eq!(fused["metrics"]["top1"], e["metrics"]["top1"]);

    let first = data.join("sequences").join("000000.json");
    let converted = dir.path().join("converted");
    let c = json_of(&mstgn(&[
        "convert", first.to_str().unwrap(), "--frames", "20", "--center", "--stream", "bone",
        "--out", converted.to_str().unwrap(), "--json",
    ]));
    assert_eq!(c["files"][0]["frames"].as_u64(), Some(20));
    assert!(converted.join(first.file_name().unwrap()).exists());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"layout\":\"ntu25\"}").unwrap();
    assert_eq!(mstgn(&["convert", bad.to_str().unwrap()]).status.code(), Some(1));

    let mut args = vec!["ablate", "--data", manifest.as_str(), "--kind", "blocks", "--json"];
    args.extend_from_slice(&["--config", "desk", "--set", "train.epochs=1", "--set", "train.target_frames=8", "--scales", "core"]);
    let t = json_of(&mstgn(&args));
    let rows = t["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["row"]["block"], "baseline");
    assert_eq!(rows[1]["row"]["block"], "tgn");
}
