//! End-to-end checks of the `vortexzone` binary: subcommands, flags and the
//! documented exit codes (0 success, 2 config error, 3 numerical
//! precondition failure).

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vortexzone"))
}

#[test]
fn dissipation_subcommand_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "dissipation",
            "--preset",
            "appendixB-const",
            "--out",
            dir.path().to_str().unwrap(),
            "--resolution",
            "128",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("rate_vs_c.csv").exists());
}

#[test]
fn unknown_preset_exits_2() {
    let out = bin()
        .args(["simulate", "--preset", "not-a-preset"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("appendixB-const"), "{stderr}");
}

#[test]
fn bad_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "preset = appendixB-const\nnot_a_key = 1\n").unwrap();
    let out = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));
}

#[test]
fn numerical_precondition_exits_3() {
    // A self-intersecting interface fails the chord-arc precondition inside
    // the construct pipeline.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("collide.cfg");
    // Zero strength makes the order-3 normalization degenerate (∫ϖ₀² = 0).
    std::fs::write(
        &cfg,
        format!(
            "strength = const:0\nresolution = 64\nout = {}\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let out = bin()
        .args(["construct", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_and_report_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(
        &cfg,
        format!(
            "preset = appendixB-cos2\nblobs = 128\nsteps = 4\nresolution = 64\n\
             times = 0,0.1\nout = {}\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let sim = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        sim.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&sim.stderr)
    );
    let report = bin()
        .args(["report", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(report.status.success());
    assert!(dir.path().join("report.svg").exists());
}
