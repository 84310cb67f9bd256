use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pts_core::{load_scenario, load_scenario_file, presets, ScenarioConfig64};

const SHORT: &str = r#"
seed = 1
arena = { min = [-2.0, -2.0], max = [6.0, 2.0] }

[[formations]]
id = 0
start = { x = 0.0, y = 0.0, theta = 0.0 }
dest = [4.0, 0.0]
body_radius = 0.1
d = 0.2
radius = 0.5
followers = [{ rho = 0.35, psi = 3.141592653589793 }, { rho = 0.35, psi = 1.5707963267948966 }]
"#;

fn pts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pts-sim")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"))
}

/// The short scenario with its destination walled in by twelve discs.
fn walled_in() -> String {
    let mut text = String::from(
        "seed = 1\narena = { min = [-2.0, -4.0], max = [7.0, 4.0] }\n\n[params.rrt]\nmax_iters = 1500\n\n",
    );
    for k in 0..12 {
        let a = std::f64::consts::TAU * f64::from(k) / 12.0;
        text += &format!(
            "[[obstacles]]\ncenter = [{:?}, {:?}]\nradius = 0.5\n\n",
            4.0 + 2.0 * a.cos(),
            2.0 * a.sin()
        );
    }
    let (_, formation) = SHORT.split_once("[[formations]]").unwrap();
    text + "[[formations]]" + formation
}

#[test]
fn simulate_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.toml", SHORT);
    let out = dir.path().join("run");
    let o = pts(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
        "--max-steps",
        "300",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not arrive"));

    let csv = std::fs::read_to_string(out.join("trajectories.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("step,time,formation_id,robot_id,role,x,y,theta,v,omega")
    );
    assert_eq!(lines.count(), 300 * 3);

    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
    assert_eq!(m["steps"], 300);
    assert_eq!(m["complete"], false);
}

#[test]
fn full_run_reports_arrival() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.toml", SHORT);
    let out = dir.path().join("run");
    let o = pts(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("formation 0: arrived after"));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["complete"], true);
    assert_eq!(m["collision_count"], 0);
}

#[test]
fn validation_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        dir.path(),
        "u.toml",
        &format!("colour = 1\n{}", SHORT.replace("d = 0.2", "d = 0.2\nwheels = 4")),
    );
    let o = pts(&["validate", "--scenario", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("colour") && e.contains("wheels"), "{e}");

    let bad = write(dir.path(), "b.toml", &SHORT.replace("radius = 0.5", "radius = 0.2"));
    let o = pts(&[
        "simulate",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("formations[0]"), "{}", stderr(&o));
    assert!(!dir.path().join("x").exists());

    let blocked = write(
        dir.path(),
        "o.toml",
        &SHORT.replace(
            "[[formations]]",
            "[[obstacles]]\ncenter = [4.0, 0.3]\nradius = 0.3\n\n[[formations]]",
        ),
    );
    let o = pts(&["plan", "--scenario", blocked.to_str().unwrap(), "--formation", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("formations[0].dest"), "{}", stderr(&o));

    let o = pts(&[
        "simulate",
        "--scenario",
        write(dir.path(), "s.toml", SHORT).to_str().unwrap(),
        "--out",
        "unused",
        "--max-steps",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unreachable_destination_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "w.toml", &walled_in());
    let o = pts(&["validate", "--scenario", scenario.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = pts(&["plan", "--scenario", scenario.to_str().unwrap(), "--formation", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("formation 0: no path found"), "{}", stderr(&o));

    let out = dir.path().join("run");
    let o = pts(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn other_failures_exit_with_1() {
    let o = pts(&["validate", "--scenario", "/definitely/not/here.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/definitely/not/here.toml"));
}

#[test]
fn plan_prints_spaced_waypoints_between_the_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.toml", SHORT);
    let o = pts(&["plan", "--scenario", scenario.to_str().unwrap(), "--formation", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,x,y"));
    let points: Vec<(f64, f64)> = lines
        .enumerate()
        .map(|(k, l)| {
            let c: Vec<&str> = l.split(',').collect();
            assert_eq!(c[0].parse::<usize>().unwrap(), k);
            (c[1].parse().unwrap(), c[2].parse().unwrap())
        })
        .collect();
    assert_eq!(points.first(), Some(&(0.0, 0.0)));
    assert_eq!(points.last(), Some(&(4.0, 0.0)));
    assert!(points.len() >= 5);
    for w in points.windows(2) {
        assert!((w[1].0 - w[0].0).hypot(w[1].1 - w[0].1) <= 1.0 + 1e-9);
    }

    let again = pts(&["plan", "--scenario", scenario.to_str().unwrap(), "--formation", "0"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    assert_eq!(
        pts(&["plan", "--scenario", scenario.to_str().unwrap(), "--formation", "4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn validate_summarizes_the_scenario() {
    let o = pts(&["validate", "--scenario", shipped("obstacles").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "ok: 4 formations, 5 obstacles\n");
}

#[test]
fn presets_print_loadable_scenarios() {
    for (name, want) in [
        ("baseline", presets::baseline::<f64>()),
        ("four-swap", presets::four_swap()),
        ("obstacles", presets::obstacle_field(5)),
        ("thirty", presets::thirty()),
    ] {
        let o = pts(&["preset", name]);
        assert!(o.status.success());
        let got: ScenarioConfig64 = load_scenario(&String::from_utf8(o.stdout).unwrap()).unwrap();
        assert_eq!(got, want, "{name}");
    }
    let o = pts(&["preset", "obstacles", "--seed", "8"]);
    let got: ScenarioConfig64 = load_scenario(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(got, presets::obstacle_field(8));
    assert_ne!(got.obstacles, presets::obstacle_field::<f64>(5).obstacles);
}

#[test]
fn shipped_scenarios_match_the_presets() {
    for (name, want) in [
        ("baseline", presets::baseline::<f64>()),
        ("four-swap", presets::four_swap()),
        ("obstacles", presets::obstacle_field(5)),
        ("thirty", presets::thirty()),
    ] {
        let got: ScenarioConfig64 = load_scenario_file(&shipped(name)).unwrap();
        assert_eq!(got, want, "{name}");
    }
}
