//! End-to-end runs of the `gradobs` binary.

use std::path::Path;
use std::process::{Command, Output};

fn gradobs(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradobs")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const BROKEN: &str = r#"
name = "broken"
[domain]
kind = "disc"
radius = 1.0
[body]
given = "K"
kind = "ball"
radius = 1.0
[phi]
kind = "zero"
[operator]
kind = "linear"
a = [[-1.0, 0.0], [0.0, -1.0]]
b = [0.0, 0.0]
c = 0.0
f = 1.0
[grid]
h = 0.0625
"#;

#[test]
fn presets_are_listed_and_printed() {
    let dir = tempfile::tempdir().unwrap();
    let out = gradobs(&["presets"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let names = stdout(&out);
    assert_eq!(names.lines().count(), 8);
    assert!(names.lines().any(|l| l == "torsion-disc-R3"));
    let text = stdout(&gradobs(&["presets", "ellipse-ridge"], dir.path()));
    assert!(text.contains("name = \"ellipse-ridge\""));
    assert_eq!(gradobs(&["presets", "nope"], dir.path()).status.code(), Some(3));
}

#[test]
fn run_check_and_contours_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = gradobs(&["run", "torsion-disc-R1", "--out", "archive"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("theorem2: PASS") && !text.contains("FAIL"), "{text}");
    let archive = dir.path().join("archive");
    for file in ["scenario.echo", "log.csv", "fields/u.csv", "masks/P_plus.csv", "reports/summary.txt"] {
        assert!(archive.join(file).exists(), "missing {file}");
    }

    let check = gradobs(&["check", "archive"], dir.path());
    assert_eq!(check.status.code(), Some(0));
    assert!(!stdout(&check).contains("mismatch"));

    // u = (1 − r²)/4 on the unit disc, so u = 3/16 at r = 1/2
    let contours = gradobs(&["contours", "archive/fields/u.csv", "--levels", "0.1875,5"], dir.path());
    assert_eq!(contours.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&contours.stderr).contains("outside field range"));
    let csv = stdout(&contours);
    let radii: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<f64> = l.split(',').skip(3).take(2).map(|v| v.parse().unwrap()).collect();
            f[0].hypot(f[1])
        })
        .collect();
    assert!(radii.len() > 20);
    assert!(radii.iter().all(|r| (r - 0.5).abs() < 1e-3), "{radii:?}");
}

#[test]
fn input_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = gradobs(&["run", "torsion-disc-R3", "--grid", "10", "--out", "x"], dir.path());
    assert_eq!(coarse.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&coarse.stderr).contains("too coarse"));
    assert_eq!(gradobs(&["run", "no-such-scenario"], dir.path()).status.code(), Some(3));
    assert_eq!(gradobs(&["frobnicate"], dir.path()).status.code(), Some(3));
}

#[test]
fn failed_assumptions_skip_the_solve() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.toml"), BROKEN).unwrap();
    let out = gradobs(&["run", "broken.toml", "--out", "archive"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("assumptions: FAIL"));
    assert!(dir.path().join("archive/reports/assumptions.txt").exists());
    assert!(!dir.path().join("archive/fields/u.csv").exists());
}

#[test]
fn dry_run_prints_resolved_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = gradobs(&["run", "pucci-disc", "--dry-run", "--schedule", "8:1,0:0.5,0:0.25"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("pucci_plus"), "{text}");
    assert!(!dir.path().join("runs").exists());
}
