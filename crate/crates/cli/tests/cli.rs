use std::path::Path;
use std::process::{Command, Output};

fn maxid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_rows_and_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mo.csv");
    let o = maxid(&[
        "simulate", "--family", "mo-stable(alpha=0.5)", "--d", "10", "--n", "1000", "--seed", "42", "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "x1,x2,x3,x4,x5,x6,x7,x8,x9,x10");
    for line in &lines[1..] {
        let values: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(values.len(), 10);
        assert!(values.iter().all(|&v| v > 0.0));
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mo.csv.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(sidecar["replicates"].as_array().unwrap().len(), 1000);
    assert_eq!(sidecar["step_kind"], "bands_per_location");
    assert!(sidecar.get("wall_time").is_none());
    assert!(stderr(&o).contains("simulated 1000 replicates"));
}

#[test]
fn frechet_mixture_values_are_positive() {
    let o = maxid(&["simulate", "--family", "scale-mixture(frechet)", "--d", "3", "--n", "100"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 101);
    for line in text.lines().skip(1) {
        assert!(line.split(',').all(|v| v.parse::<f64>().unwrap() > 0.0));
    }
}

#[test]
fn usage_errors_exit_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    for args in [
        vec!["simulate", "--family", "mo-stable(alpha=0.5", "--d", "3"],
        vec!["simulate", "--family", "nope(x=1)", "--d", "3"],
        vec!["simulate", "--family", "mo-stable(alpha=1.5)", "--d", "3"],
        vec!["simulate", "--family", "mo-stable", "--d", "0"],
        vec!["simulate", "--family", "mo-stable"],
        vec!["simulate", "--d", "3"],
        vec!["simulate", "--family", "mo-stable", "--d", "3", "--threads", "0"],
        vec!["bench", "--family", "mo-stable", "--dims", "50,10"],
        vec!["bench", "--family", "scale-mixture(frechet)", "--dims", "10"],
        vec!["validate", "--family", "mo-stable", "--d", "3", "--alpha", "2"],
        vec!["frobnicate"],
    ] {
        let mut full = args.clone();
        full.extend(["--out", path(&out)]);
        let o = maxid(if args == ["frobnicate"] { &args } else { &full });
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!out.exists(), "{args:?} wrote output");
    }
}

#[test]
fn undersized_envelope_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("broken.json");
    std::fs::write(
        &params,
        r#"{"schema_version": 1, "d": 4, "n": 1000, "family": {"family": "mo-table",
            "pieces": [{"lower": 0.0, "upper": 1.0, "coef": 0.5, "exponent": -1.5},
                       {"lower": 1.0, "upper": "inf", "coef": 0.5, "exponent": -1.5}],
            "envelope": [{"lower": 0.0, "upper": 1.0, "coef": 0.25, "exponent": -0.5},
                         {"lower": 1.0, "upper": "inf", "coef": 0.25, "exponent": -1.5}]}}"#,
    )
    .unwrap();
    let o = maxid(&["validate", "--params", path(&params)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("envelope"), "{}", stderr(&o));
}

#[test]
fn io_failures_exit_three() {
    let o = maxid(&["simulate", "--family", "mo-stable", "--d", "2", "--n", "5", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn params_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("run.json");
    std::fs::write(
        &params,
        r#"{"schema_version": 1, "family": {"family": "mo-gamma", "beta": 1.0, "eta": 1.0}, "d": 3, "n": 7, "seed": 5}"#,
    )
    .unwrap();
    let o = maxid(&["simulate", "--params", path(&params)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 8);
    let o = maxid(&["simulate", "--params", path(&params), "--n", "2", "--d", "5"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 5);

    std::fs::write(&params, r#"{"schema_version": 2, "family": {"family": "mo-stable"}}"#).unwrap();
    assert_eq!(maxid(&["simulate", "--params", path(&params), "--d", "2"]).status.code(), Some(2));
}

#[test]
fn validate_passes_for_builtin_families() {
    for args in [
        vec!["validate", "--family", "mo-stable(alpha=0.5)", "--d", "10", "--n", "1000"],
        vec!["validate", "--family", "mo-gamma(beta=2,eta=0.5)", "--dims", "2,5", "--n", "1000"],
        vec!["validate", "--family", "scale-mixture(frechet)", "--d", "3", "--n", "1000"],
    ] {
        let o = maxid(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}{}", stdout(&o), stderr(&o));
        let text = stdout(&o);
        assert!(text.starts_with("test,d,n,statistic,p_value,pass,seed\n"));
    }
}

#[test]
fn discrete_oracle_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("discrete.json");
    std::fs::write(
        &params,
        r#"{"schema_version": 1, "n": 10000, "family": {"family": "discrete", "atoms": [
            {"weight": 0.4, "values": [1.0, 1.0, 0.0]},
            {"weight": 0.3, "values": [0.5, 2.0, 1.0]},
            {"weight": 0.6, "values": [0.0, 0.0, 1.5]}]}}"#,
    )
    .unwrap();
    let o = maxid(&["validate", "--params", path(&params), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rows.as_array().unwrap().len() >= 5 * 5);
}

#[test]
fn failed_panel_exits_one() {
    // At alpha = 0.999 almost every run is rejected.
    let o = maxid(&["validate", "--family", "mo-stable(alpha=0.5)", "--d", "10", "--n", "1000", "--alpha", "0.999"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("false"));
}

#[test]
fn plot_data_matches_the_validate_statistic() {
    let n = 1000;
    let o = maxid(&["plot-data", "--family", "mo-stable(alpha=0.5)", "--d", "10", "--n", "1000", "--seed", "42"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,ecdf,exp_cdf"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(rows.len(), n);
    assert!(rows.windows(2).all(|w| w[0][0] <= w[1][0] && w[0][1] <= w[1][1]));
    assert_eq!(rows[n - 1][1], 1.0);
    let gap = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);

    let v = maxid(&["validate", "--family", "mo-stable(alpha=0.5)", "--d", "10", "--n", "1000", "--seed", "42"]);
    let report = stdout(&v);
    let first = report.lines().nth(1).unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields[6], "42");
    let statistic: f64 = fields[3].parse().unwrap();
    // The KS statistic also looks at the left limits of the ECDF, which lie
    // one step of 1/n below the listed values.
    assert!(statistic >= gap && statistic <= gap + 1.0 / n as f64, "{statistic} vs {gap}");
}

#[test]
fn bench_rows_and_monotone_flag() {
    let o = maxid(&["bench", "--family", "mo-stable", "--dims", "10,100", "--n", "100", "--check-monotone"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text.lines().next(), Some("d,n,seconds,atoms_simulated"));
    let o = maxid(&["bench", "--family", "mo-stable", "--dims", "10000", "--n", "0"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
}
