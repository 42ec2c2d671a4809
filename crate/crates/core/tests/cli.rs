use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hullshape"));
    c.env_remove("HULLSHAPE_THREADS");
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("spawn hullshape");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(&dir.join("manifest.json"))).unwrap()
}

#[test]
fn converge_reruns_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let (code, _, err) = run(&[
            "converge", "--model", "bm", "--dim", "2", "--n-schedule", "100,1000,10000", "--seed", "42",
            "--out", dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let csv = read(&a.join("convergence.csv"));
    assert_eq!(csv, read(&b.join("convergence.csv")));
    assert!(csv.starts_with("n,rep,metric,value\n"));
    assert_eq!(csv.lines().filter(|l| l.contains(",rho,")).count(), 3 * 32);
    let m = manifest(&a);
    assert_eq!(m["seed"], 42);
    assert_eq!(m["config"]["model"], "bm");
    assert_eq!(m["passed"], true);
    assert!(m["version"].as_str().unwrap().starts_with("v0.1.0"));
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let dir = tmp.path().join(threads);
        let (code, _, err) = run(&[
            "moments", "--functional", "perimeter", "--grid-points", "64", "--n-schedule", "50,500", "--reps", "7",
            "--dirs", "120", "--two-res", "--threads", threads, "--out", dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        outputs.push(read(&dir.join("moments_perimeter.csv")));
    }
    assert_eq!(outputs[0], outputs[1]);

    // The environment variable stands in for the flag.
    let dir = tmp.path().join("env");
    let out = bin()
        .env("HULLSHAPE_THREADS", "2")
        .args([
            "moments", "--functional", "perimeter", "--grid-points", "64", "--n-schedule", "50,500", "--reps", "7",
            "--dirs", "120", "--two-res", "--out", dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(&dir.join("moments_perimeter.csv")), outputs[0]);
    assert_eq!(manifest(&dir)["config"]["threads"], 2);
}

#[test]
fn limit_shape_of_the_bridge_is_a_half_ball() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("ls");
    let (code, _, err) = run(&["limit-shape", "--model", "fbb:H=0.5", "--dim", "2", "--dirs", "360", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = read(&dir.join("limit_shape.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,angle,theta_0,theta_1,support"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 360);
    assert!(rows.iter().all(|r| r.ends_with(",0.5")));
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.join("limit_shape.json"))).unwrap();
    assert_eq!(meta["provenance"], "closed-form");
    assert_eq!(meta["model"], "fbb:H=0.5");
}

#[test]
fn area_ratio_rises_with_n() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("m");
    let (code, stdout, err) = run(&[
        "moments", "--model", "bm", "--dim", "2", "--functional", "area", "--grid-points", "256", "--dirs", "360",
        "--n-schedule", "100,1000,10000", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("ratio"));
    let csv = read(&dir.join("moments_area.csv"));
    let ratios: Vec<f64> = csv
        .lines()
        .filter(|l| l.contains(",*,ratio,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 3);
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios.iter().all(|r| *r > 0.6 && *r < 1.0));
}

#[test]
fn config_file_is_overridden_by_flags_and_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    let dir = tmp.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "# small run\nmodel = fbm:H=0.7\ngrid-points = 32\nn-schedule = 20, 200\nreps = 3\ndirs = 64\nseed = 7\nout = {}\n",
            dir.display()
        ),
    )
    .unwrap();
    let (code, _, err) = run(&["converge", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code, 0, "{err}");
    let m = manifest(&dir);
    assert_eq!(m["seed"], 9);
    assert_eq!(m["config"]["model"], "fbm:H=0.7");
    assert_eq!(m["config"]["grid_points"], 32);
    assert_eq!(m["config"]["n_schedule"], serde_json::json!([20, 200]));

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let (code, _, err) = run(&["converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn manifest_invocation_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("x");
    let (code, _, _) = run(&[
        "extremes", "--model", "fbb:H=0.5", "--dim", "2", "--theta=-0.6,0.8", "--grid-points", "64",
        "--n-schedule", "30,300", "--reps", "5", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let first = read(&dir.join("extremes.csv"));
    let m = manifest(&dir);
    let args: Vec<String> = m["invocation"].as_array().unwrap()[1..]
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    std::fs::remove_dir_all(&dir).unwrap();
    let status = bin().args(&args).output().unwrap().status;
    assert!(status.success());
    assert_eq!(read(&dir.join("extremes.csv")), first);
}

#[test]
fn simulate_writes_hull_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    let (code, _, err) = run(&[
        "simulate", "--grid-points", "64", "--dirs", "90", "--n-schedule", "10,100", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    for f in ["simulate.csv", "hull_n10_profile.csv", "hull_n10_polygon.csv", "hull_n100_polygon.csv", "manifest.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    assert!(read(&dir.join("hull_n100_polygon.csv")).starts_with("index,x,y\n"));
}

#[test]
fn rate_negative_control_grows() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("r");
    let (code, _, err) = run(&[
        "rate", "--reference-ball", "2", "--grid-points", "64", "--dirs", "90", "--n-schedule", "100,1000,10000",
        "--reps", "4", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let rates: Vec<f64> = read(&dir.join("rate.csv"))
        .lines()
        .filter(|l| l.contains(",*,rate,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]), "{rates:?}");
}

#[test]
fn usage_and_runtime_errors_have_distinct_codes() {
    assert_eq!(run(&["converge", "--no-such-flag"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["converge", "--model", "fbm"]).0, 2);
    assert_eq!(run(&["converge", "--n-schedule", "1000,100"]).0, 2);
    assert_eq!(run(&["moments", "--dim", "3", "--functional", "area"]).0, 2);
    assert_eq!(run(&["extremes", "--dim", "2", "--theta", "1,1"]).0, 2);
    // An output path that is a regular file fails at run time.
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("taken");
    std::fs::write(&file, "x").unwrap();
    let (code, _, err) = run(&[
        "converge", "--grid-points", "8", "--dirs", "16", "--n-schedule", "10", "--reps", "1", "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn help_lists_every_flag() {
    let expect: &[(&str, &[&str])] = &[
        ("simulate", &["--config", "--model", "--dim", "--grid-points", "--n-schedule", "--reps", "--dirs", "--seed", "--two-res", "--threads", "--out"]),
        ("limit-shape", &["--config", "--model", "--dim", "--grid-points", "--dirs", "--out"]),
        ("converge", &["--config", "--model", "--n-schedule", "--two-res", "--threads", "--out"]),
        ("moments", &["--functional", "--power", "--n-schedule", "--reps"]),
        ("extremes", &["--theta", "--n-schedule"]),
        ("rate", &["--reference-ball", "--n-schedule"]),
        ("repro", &["--seed", "--threads", "--out"]),
    ];
    for (cmd, flags) in expect {
        let (code, stdout, _) = run(&[cmd, "--help"]);
        assert_eq!(code, 0);
        for f in *flags {
            assert!(stdout.contains(f), "{cmd} --help lacks {f}");
        }
    }
}
