use std::path::Path;
use std::process::{Command, Output};

fn spineseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spineseg"))
        .args(args)
        .output()
        .unwrap()
}

fn make_phantoms(dir: &Path, count: u64) {
    let out = spineseg(&[
        "phantom",
        "--count",
        &count.to_string(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn phantom_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    make_phantoms(dir.path(), 2);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert_eq!(
        manifest,
        "phantom_00.pgm,phantom_00.truth.pgm\nphantom_01.pgm,phantom_01.truth.pgm\n"
    );
}

#[test]
fn segment_reports_metrics_with_truth() {
    let dir = tempfile::tempdir().unwrap();
    make_phantoms(dir.path(), 1);
    let d = dir.path();
    let out_dir = d.join("out");
    let out = spineseg(&[
        "segment",
        d.join("phantom_00.pgm").to_str().unwrap(),
        "--truth",
        d.join("phantom_00.truth.pgm").to_str().unwrap(),
        "--method",
        "kmeans",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("method,dice,hausdorff,elapsed_seconds"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "kmeans");
    assert!(row[1].parse::<f64>().unwrap() > 0.8);
    for suffix in ["mask.pgm", "labels.pgm", "overlay.ppm", "components.csv"] {
        assert!(out_dir
            .join(format!("phantom_00.kmeans.{suffix}"))
            .is_file());
    }
}

#[test]
fn segment_without_truth_leaves_metrics_empty() {
    let dir = tempfile::tempdir().unwrap();
    make_phantoms(dir.path(), 1);
    let d = dir.path();
    let out = spineseg(&[
        "segment",
        d.join("phantom_00.pgm").to_str().unwrap(),
        "--out",
        d.join("o").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().nth(1).unwrap().starts_with("fcm,,,"));
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    make_phantoms(d, 1);
    let image = d.join("phantom_00.pgm");

    std::fs::write(d.join("bad.pgm"), b"P2\n1 1\n255\n0").unwrap();
    assert_eq!(
        spineseg(&["segment", d.join("bad.pgm").to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    std::fs::write(d.join("flat.pgm"), b"P5\n2 2\n255\n\x07\x07\x07\x07").unwrap();
    let out = spineseg(&[
        "segment",
        d.join("flat.pgm").to_str().unwrap(),
        "--method",
        "otsu",
    ]);
    assert_eq!(out.status.code(), Some(3));

    std::fs::write(d.join("cfg.txt"), "fcm.fuzzifier = 1\n").unwrap();
    let out = spineseg(&[
        "segment",
        image.to_str().unwrap(),
        "--config",
        d.join("cfg.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));

    let out = spineseg(&["phantom", "--bodies", "0", "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bench_needs_reference_masks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    make_phantoms(d, 1);
    std::fs::write(d.join("list.txt"), "phantom_00.pgm\n").unwrap();
    let out = spineseg(&["bench", "--manifest", d.join("list.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
