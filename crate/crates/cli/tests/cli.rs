//! End-to-end checks of the command-line verbs and their exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiraldrift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes the resolved configuration of a built-in manifest by running its
/// geometry stage only.
fn write_config(name: &str, dir: &Path) -> std::path::PathBuf {
    let bundle = dir.join("bundle");
    let o = run(&[
        "pipeline",
        name,
        "-o",
        bundle.to_str().unwrap(),
        "--t-end",
        "0",
    ]);
    assert!(bundle.join("metric.grid").exists());
    // Checks that need a simulation cannot pass at zero duration.
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(bundle.join("summary.json")).unwrap())
            .unwrap();
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&summary["config"]).unwrap(),
    )
    .unwrap();
    path
}

#[test]
fn list_names_every_built_in_manifest() {
    let o = run(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in [
        "fig3",
        "fig4a",
        "fig4b",
        "fig5a-red",
        "fig5b-yellow",
        "fig4a-desk",
    ] {
        assert!(
            text.lines()
                .any(|l| l.split_whitespace().next() == Some(name)),
            "{name} missing from\n{text}"
        );
    }
}

#[test]
fn geometry_predict_and_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config("fig4a", dir.path());
    let config = config.to_str().unwrap();

    let geo = dir.path().join("geo");
    let o = run(&["geometry", config, "-o", geo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(geo.join("metric.csv")).unwrap();
    // 301 x 301 nodes plus a header.
    assert_eq!(csv.lines().count(), 301 * 301 + 1);

    let pred = dir.path().join("pred.csv");
    let o = run(&[
        "predict",
        "--config",
        config,
        "--x0",
        "-1.5",
        "--y0",
        "2",
        "--t-end",
        "100",
        "--q1",
        "0.643",
        "--q2",
        "0.357",
        "-o",
        pred.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&pred).unwrap();
    assert_eq!(text.lines().next(), Some("t,x,y"));
    assert_eq!(text.lines().count(), 102);
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(first, vec![0.0, -1.5, 2.0]);

    let o = run(&["compare", pred.to_str().unwrap(), pred.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["max"].as_f64(), Some(0.0));
    assert!(report["observed_arc_length"].as_f64().unwrap() > 1.0);
}

#[test]
fn errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = run(&["pipeline", "no-such-manifest", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("list"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    let o = run(&[
        "geometry",
        bad.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
