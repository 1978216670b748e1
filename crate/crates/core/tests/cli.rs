use std::path::Path;
use std::process::{Command, Output};

fn scc(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scc"))
        .args(args)
        .env("SCC_OUTPUT_ROOT", root)
        .current_dir(root)
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn encode_simulate_extract_decode_recovers_the_payload() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("exp.toml"), "seed = 5\n[layout]\nrows = 10\ncols = 10\nparity_bits = 50\n").unwrap();
    let payload: Vec<u8> = (0..120u8).map(|i| i.wrapping_mul(37) ^ 0x5a).collect();
    std::fs::write(root.join("payload.bin"), &payload).unwrap();

    ok(scc(root, &["encode", "--config", "exp.toml", "--payload", "payload.bin", "--out", "enc"]));
    ok(scc(root, &["simulate", "--input", "enc", "--seed", "3", "--out", "cam"]));
    ok(scc(root, &["extract", "--input", "cam", "--every", "2", "--out", "quads.json"]));
    ok(scc(root, &["decode", "--input", "cam", "--quads", "quads.json", "--out", "dec"]));

    assert_eq!(std::fs::read(root.join("dec/payload.bin")).unwrap(), payload);
    let log = std::fs::read_to_string(root.join("dec/frames.csv")).unwrap();
    assert!(log.starts_with("#schema scc-frames/1\nframe_index,score,seq,corrected,outcome\n"));
    let quads: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(root.join("quads.json")).unwrap()).unwrap();
    assert!(quads["mean_iou"].as_f64().unwrap() > 0.9);
}

#[test]
fn evaluate_then_report_writes_schema_tagged_files() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(
        root.join("exp.toml"),
        "frames = 6\noutput_dir = \"runs/eval\"\n[layout]\nrows = 4\ncols = 4\nparity_bits = 0\n[sweep]\nnoise = [0.0, 2.0]\n",
    )
    .unwrap();
    let stdout = ok(scc(root, &["evaluate", "--config", "exp.toml"]));
    assert!(stdout.starts_with("#schema scc-metrics/1"));
    let metrics = root.join("runs/eval/metrics.csv");
    assert!(metrics.is_file() && root.join("runs/eval/manifest.json").is_file());
    ok(scc(root, &["report", "--metrics", metrics.to_str().unwrap(), "--out", "plots"]));
    let plot = std::fs::read_to_string(root.join("plots/fer_vs_noise.csv")).unwrap();
    assert!(plot.starts_with("#schema scc-plot/1"));
}

#[test]
fn invalid_config_fails_before_writing_output() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("bad.toml"), "frames = 0\n").unwrap();
    let out = scc(root, &["evaluate", "--config", "bad.toml", "--out", "never"]);
    assert!(!out.status.success());
    assert!(!root.join("never").exists());
    std::fs::write(root.join("typo.toml"), "frams = 3\n").unwrap();
    let out = scc(root, &["encode", "--config", "typo.toml", "--out", "never"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("frams"));
    assert!(!root.join("never").exists());
}

#[test]
fn every_subcommand_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["encode", "simulate", "extract", "decode", "train", "evaluate", "report"] {
        let text = ok(scc(dir.path(), &[cmd, "--help"]));
        assert!(text.contains("Usage"), "{cmd}");
    }
}
