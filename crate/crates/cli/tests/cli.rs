use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use actionrd_cli::config::RunConfig;

fn actionrd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actionrd"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

/// Data rows (comments and the column line dropped) split into fields.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn columns(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_owned()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

const SMALL_GRID: [&str; 4] = ["--s-grid", "geom:0.25:16:5", "--m-grid", "geom:0.25:8:4"];

#[test]
fn zero_slopes_give_zero_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = actionrd(dir.path(), &["point", "--s", "0", "--m", "0"]);
    assert!(out.status.success());
    let r = rows(&dir.path().join("points.csv"));
    assert_eq!(r.len(), 1);
    assert!(num(&r[0][2]).abs() < 1e-9);
}

#[test]
fn steep_slope_point_has_no_distortion() {
    let dir = tempfile::tempdir().unwrap();
    let out = actionrd(dir.path(), &["point", "--s=-50", "--m", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split(',').collect();
    assert!(num(row[3]) <= 1e-3);
    // a second point is appended under the same header
    actionrd(dir.path(), &["point", "--s=-1", "--m=-1"]);
    let text = fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert_eq!(text.matches("# actionrd").count(), 1);
    assert_eq!(rows(&dir.path().join("points.csv")).len(), 2);
}

#[test]
fn point_and_sweep_share_a_schema() {
    let dir = tempfile::tempdir().unwrap();
    assert!(actionrd(dir.path(), &["point", "--s=-2", "--m=-1"]).status.success());
    let mut args = vec!["sweep"];
    args.extend(SMALL_GRID);
    assert!(actionrd(dir.path(), &args).status.success());
    assert_eq!(columns(&dir.path().join("points.csv")), columns(&dir.path().join("sweep.csv")));
    assert_eq!(columns(&dir.path().join("sweep.csv")), "s,m,rate,distortion,cost,converged,iters");
}

#[test]
fn sweeps_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = vec!["sweep", "--nonadaptive", "--seed", "3"];
    args.extend(SMALL_GRID);
    assert!(actionrd(a.path(), &args).status.success());
    assert!(actionrd(b.path(), &args).status.success());
    for name in ["sweep.csv", "envelope.csv", "nonadaptive.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let text = fs::read_to_string(a.path().join("sweep.csv")).unwrap();
    assert!(text.contains("# seed: 3\n"));
    assert!(text.contains(&format!("# actionrd {}", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn swept_curve_is_monotone_and_ordered_by_erasure_probability() {
    let (clean, noisy) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = vec!["sweep", "--s-grid", "geom:0.1:32:25", "--m-grid", "geom:0.05:16:20"];
    assert!(actionrd(clean.path(), &args).status.success());
    args.extend(["--p", "0.1"]);
    assert!(actionrd(noisy.path(), &args).status.success());
    let env0 = rows(&clean.path().join("envelope.csv"));
    let env1 = rows(&noisy.path().join("envelope.csv"));
    for (r0, r1) in env0.iter().zip(&env1) {
        assert_eq!(r0[..2], r1[..2]);
        assert!(num(&r1[2]) >= num(&r0[2]) - 1e-9, "{r0:?} vs {r1:?}");
    }
    // rows are c-major with d ascending: rates never increase along a slice
    for w in env0.windows(2) {
        if w[0][1] == w[1][1] {
            assert!(num(&w[1][2]) <= num(&w[0][2]) + 1e-12);
        }
    }
}

#[test]
fn analytic_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = actionrd(dir.path(), &["analytic", "--d-grid", "0,0.1", "--c-list", "1,0.5"]);
    assert!(out.status.success());
    let r = rows(&dir.path().join("analytic.csv"));
    assert_eq!(r[0][..2], ["0".to_string(), "1".to_string()]);
    assert_eq!(num(&r[0][2]), 0.0);
    assert!(num(&r[3][2]) > 0.0);

    let out = actionrd(dir.path(), &["analytic", "--p", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p = 0"));
}

#[test]
fn dmax_table() {
    let dir = tempfile::tempdir().unwrap();
    assert!(actionrd(dir.path(), &["dmax", "--c-list", "0,1"]).status.success());
    let r = rows(&dir.path().join("dmax.csv"));
    assert!((num(&r[0][1]) - 0.375).abs() < 1e-9);
    assert!(num(&r[1][1]).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--max-outer", "1"];
    args.extend(SMALL_GRID);
    assert_eq!(actionrd(dir.path(), &args).status.code(), Some(3));
    args.push("--allow-unconverged");
    assert_eq!(actionrd(dir.path(), &args).status.code(), Some(0));

    let missing = ["dmax", "--scenario", "/nonexistent/scenario.toml"];
    assert_eq!(actionrd(dir.path(), &missing).status.code(), Some(2));
    assert_eq!(actionrd(dir.path(), &["point", "--s", "1", "--m", "0"]).status.code(), Some(2));
    assert_eq!(actionrd(dir.path(), &["sweep", "--s-grid", ""]).status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(&cfg_path, "seed = 5\n[grid]\nc_list = [0.0]\n").unwrap();
    let cfg = cfg_path.to_str().unwrap();
    assert!(actionrd(dir.path(), &["dmax", "--config", cfg]).status.success());
    let text = fs::read_to_string(dir.path().join("dmax.csv")).unwrap();
    assert!(text.contains("# seed: 5\n"));
    assert_eq!(rows(&dir.path().join("dmax.csv")).len(), 1);

    assert!(actionrd(dir.path(), &["dmax", "--config", cfg, "--seed", "7"]).status.success());
    let text = fs::read_to_string(dir.path().join("dmax.csv")).unwrap();
    assert!(text.contains("# seed: 7\n"));

    fs::write(&cfg_path, "sed = 5\n").unwrap();
    assert_eq!(actionrd(dir.path(), &["dmax", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn scenario_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.toml");
    fs::write(
        &path,
        r#"
name = "toy"
px = [0.5, 0.5]
cost = [0.0, 1.0]
distortion = [[0.0, 1.0], [1.0, 0.0]]
channel = [
  [[1.0], [1.0]],
  [[1.0], [1.0]],
]

[alphabets]
x = ["0", "1"]
y = ["-"]
a = ["off", "on"]
xhat = ["0", "1"]
"#,
    )
    .unwrap();
    let out = actionrd(dir.path(), &["point", "--scenario", path.to_str().unwrap(), "--s=-2", "--m", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // the analytic reference needs the built-in scenario
    let out = actionrd(dir.path(), &["analytic", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn example_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/example.toml");
    let cfg = RunConfig::load(&path).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.codes.n, 10_000);
}

#[test]
fn small_code_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "codes", "--n", "2000", "--trials", "2", "--target-d", "0.1", "--target-c", "0.25", "--d-grid", "0.1,0.2",
    ];
    let out = actionrd(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = rows(&dir.path().join("codes_summary.csv"));
    assert_eq!(summary.len(), 1);
    assert_eq!(summary[0].last().unwrap(), "true");
    let trials = rows(&dir.path().join("codes_trials_d0.1_c0.25.csv"));
    assert_eq!(trials.len(), 3);
    assert_eq!(trials[2][0], "aggregate");
    assert_eq!(rows(&dir.path().join("codes_bound.csv")).len(), 2);
}
