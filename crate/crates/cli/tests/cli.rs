use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tribody(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tribody"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Copies a fixture into `dir` so relative output paths resolve there.
fn staged(dir: &Path, name: &str) -> String {
    let dst = dir.join(name);
    fs::copy(fixture(name), &dst).unwrap();
    dst.to_str().unwrap().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_snapshot_passes() {
    let o = tribody(&["verify", "--config", fixture("st1.toml").to_str().unwrap()]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("status=PASS"));
    assert!(!text.contains("status=FAIL"));
}

#[test]
fn negative_mass_is_a_config_error_with_a_line() {
    let o = tribody(&["verify", "--config", fixture("negative_mass.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("negative_mass.toml:5:"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[potential]\nalpha = -1\nbeta = 2\n");
    let o = tribody(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml:3:"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = tribody(&["verify", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn syzygy_needs_a_span() {
    let o = tribody(&["syzygy", "--config", fixture("st1.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fuzz_reports_every_sample() {
    let o = tribody(&["theorem5-fuzz", "--n", "200", "--seed", "3"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("passed=200/200"));
    assert_eq!(stdout(&tribody(&["theorem5-fuzz", "--n", "200", "--seed", "3"])), text);
}

#[test]
fn simulate_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "[potential]\nalpha = -1\n\n[initial]\nstate = \"1 1 1 / 1 0 0 1 -1 -1 / 1 1 -0.2 -1.4 -0.8 0.4\"\n\n[span]\nt_end = 0.5\n",
    );
    let out = dir.path().join("sim");
    let o = tribody(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // One row per accepted step plus the initial state.
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.lines().count() > 2);
    assert!(stdout(&o).contains("termination="));
}

#[test]
fn syzygy_lists_events_and_certifies_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = staged(dir.path(), "free_fall.toml");
    let o = tribody(&["syzygy", "--config", &cfg]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.starts_with("t,kind,detail"));
    assert!(text.contains("theorem=gap-certificate"));
    assert!(dir.path().join("out/free_fall/events.csv").exists());
}

#[test]
fn scaled_verify_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = staged(dir.path(), "free_fall.toml");
    let o = tribody(&["verify", "--scaled", "--config", &cfg]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("theorem=general-area"));
    let csv = fs::read_to_string(dir.path().join("out/free_fall/scaled.csv")).unwrap();
    assert!(csv.starts_with("t,qt1x"));
}

#[test]
fn found_orbit_verifies_from_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let guesses = staged(dir.path(), "guesses.txt");
    let lib = dir.path().join("library.txt");
    let o = tribody(&[
        "find-orbit",
        "--alpha",
        "-2",
        "--guess",
        &guesses,
        "--library",
        lib.to_str().unwrap(),
    ]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("orbit=strong-eight"));
    assert!(!text.contains("newton-eight"));

    let cfg = write(
        dir.path(),
        "orbit.toml",
        "[potential]\nalpha = -2\n\n[initial]\nlibrary = \"library.txt\"\nrecord = 0\n",
    );
    let o = tribody(&["verify", "--config", &cfg]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("syzygies=6"));
    let o = tribody(&["verify", "--constants", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn find_orbit_without_matching_guesses_fails() {
    let dir = tempfile::tempdir().unwrap();
    let guesses = staged(dir.path(), "guesses.txt");
    let lib = dir.path().join("library.txt");
    let o = tribody(&[
        "find-orbit",
        "--alpha",
        "1",
        "--guess",
        &guesses,
        "--library",
        lib.to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!lib.exists());
}
