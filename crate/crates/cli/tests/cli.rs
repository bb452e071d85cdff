use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/james_alec.json")
}

fn disclosure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disclosure"))
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

fn scenario_arg() -> String {
    bundled().display().to_string()
}

fn write_variant(dir: &tempfile::TempDir, name: &str, edit: impl Fn(String) -> String) -> String {
    let text = std::fs::read_to_string(bundled()).unwrap();
    let path = dir.path().join(name);
    std::fs::write(&path, edit(text)).unwrap();
    path.display().to_string()
}

#[test]
fn decide_james_shares() {
    let o = disclosure(&["decide", &scenario_arg(), "--consumer", "James"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("SHARE"));
    assert!(out.contains("E[C] = 6000"));
    assert!(out.contains("E[R] = 19000"));
}

#[test]
fn decide_alec_withholds_with_exit_zero() {
    let o = disclosure(&["decide", &scenario_arg(), "--consumer", "Alec"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("WITHHOLD"));
    assert!(out.contains("E[C] = -28200"));
    assert!(out.contains("0.833333 > Pr(r_A) = 0.52"));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = disclosure(&["validate", "definitely/missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn trailing_garbage_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(&dir, "garbage.json", |t| t + "\n}}\n");
    let o = disclosure(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("parse error"), "{err}");
    assert!(err.contains(&format!("{path}:")), "{err}");
}

#[test]
fn column_sum_below_one_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(&dir, "bad.json", |t| t.replacen("[0.9, 0.9]", "[0.8, 0.9]", 1));
    let o = disclosure(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sums to 0.9"), "{}", stderr(&o));
}

#[test]
fn unknown_consumer_and_bad_operator_exit_2() {
    assert_eq!(disclosure(&["evaluate", &scenario_arg(), "--consumer", "Nobody"]).status.code(), Some(2));
    assert_eq!(disclosure(&["evaluate", &scenario_arg(), "--serial", "sum"]).status.code(), Some(2));
}

#[test]
fn every_report_carries_the_digest() {
    let s = scenario_arg();
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", &s],
        vec!["propagate", &s],
        vec!["evaluate", &s],
        vec!["decide", &s],
        vec!["balance", &s, "--consumer", "James", "--versus", "Alec"],
        vec!["sweep", &s, "--points", "3"],
        vec!["simulate", &s, "--trials", "1000"],
        vec![
            "continuous",
            &s,
            "--family",
            "James.inference=tilt(-1,2)",
            "--grid-n",
            "16",
        ],
    ];
    for args in runs {
        let o = disclosure(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let out = stdout(&o);
        assert!(out.contains("producer: BI"), "{args:?}");
        assert!(out.contains("consumer: "), "{args:?}");
        assert!(out.contains("effective δ: 0.6"), "{args:?}");
    }
    let o = disclosure(&["balance", "--q1", "0.1", "--w1", "0.9,0.9", "--w2", "0.6,0.4"]);
    assert!(stdout(&o).contains("effective δ: n/a"));
}

#[test]
fn evaluate_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eval.csv");
    let o = disclosure(&["evaluate", &scenario_arg(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(csv).unwrap(),
        "consumer,delta,EB,ER,EC,verdict\nJames,0.6,25000,19000,6000,share\nAlec,0.6,25000,53200,-28200,withhold\n"
    );
}

#[test]
fn balance_infeasible_is_an_answer() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("balance.csv");
    let o = disclosure(&[
        "balance",
        "--q1",
        "0.1",
        "--w1",
        "0.9,0.9",
        "--w2",
        "0.6,0.4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("infeasible"));
    let text = std::fs::read_to_string(csv).unwrap();
    let last = text.lines().nth(1).unwrap();
    assert!(last.ends_with(",false"));
    let q2: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
    assert!((q2 - 2.5).abs() < 1e-12);
}

#[test]
fn degenerate_balance_is_an_input_error() {
    let o = disclosure(&["balance", "--q1", "0.5", "--w1", "0.9,0.1", "--w2", "0.3,0.3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = disclosure(&[
        "sweep",
        &scenario_arg(),
        "--consumer",
        "Alec",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "consumer,delta,EB,ER,EC,verdict");
    assert_eq!(rows.len(), 12);
    let deltas: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(deltas.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(rows[6], "Alec,0.5,25000,53200,-28200,withhold");

    let o = disclosure(&["sweep", &scenario_arg(), "--grid", "0.5,1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let o = disclosure(&[
            "simulate",
            &scenario_arg(),
            "--trials",
            "50000",
            "--seed",
            "42",
            "--compare",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(csv).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("consumer,trials,seed,estEB,seEB,estER,seER,estEC,seEC\nJames,50000,42,25000,0,"));
}

#[test]
fn continuous_density_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("density.csv");
    let o = disclosure(&[
        "continuous",
        &scenario_arg(),
        "--family",
        "Alec.inference=beta(1,1,1,0)",
        "--family",
        "Alec.impact=tilt(-1,2)",
        "--x",
        "0.25",
        "--grid-n",
        "32",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "z,f_R");
    assert_eq!(rows.len(), 34);
    let values: Vec<(f64, f64)> = rows[1..]
        .iter()
        .map(|r| {
            let (z, f) = r.split_once(',').unwrap();
            (z.parse().unwrap(), f.parse().unwrap())
        })
        .collect();
    assert_eq!(values[0].0, 0.0);
    assert_eq!(values[32].0, 1.0);
    let h = 1.0 / 32.0;
    let mass: f64 = values.windows(2).map(|w| 0.5 * h * (w[0].1 + w[1].1)).sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn continuous_matching_symmetric_consumers() {
    let o = disclosure(&[
        "continuous",
        &scenario_arg(),
        "--family",
        "James.inference=tilt(-1,2)",
        "--family",
        "James.impact=beta(1,1,2,-1)",
        "--family",
        "Alec.inference=tilt(-1,2)",
        "--family",
        "Alec.impact=beta(1,1,2,-1)",
        "--consumer",
        "James",
        "--match-x1",
        "0.4",
        "--versus",
        "Alec",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("matching x2 = 0.4 "), "{}", stdout(&o));
}

#[test]
fn continuous_without_families_is_an_input_error() {
    let o = disclosure(&["continuous", &scenario_arg()]);
    assert_eq!(o.status.code(), Some(2));
    let o = disclosure(&["continuous", &scenario_arg(), "--family", "James.inference=gauss(1)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_csv_is_an_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("no/such/dir/out.csv");
    let o = disclosure(&["evaluate", &scenario_arg(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("E[C]"));
}

#[test]
fn operator_flags_change_propagation() {
    let dir = tempfile::tempdir().unwrap();
    // Route Alec through James as well: BI → James → Alec.
    let path = write_variant(&dir, "relay.json", |t| {
        t.replacen(
            "\"edges\": [",
            "\"edges\": [\n    {\"from\": \"James\", \"to\": \"Alec\", \"forward_prob\": 1, \"disclosure\": 0.5},",
            1,
        )
    });
    let o = disclosure(&["propagate", &path, "--consumer", "Alec"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("effective δ: 0.3"));
    let o = disclosure(&["propagate", &path, "--consumer", "Alec", "--parallel", "product"]);
    assert!(stdout(&o).contains("effective δ: 0.18"));
    let o = disclosure(&["propagate", &path, "--consumer", "Alec", "--serial", "min"]);
    assert!(stdout(&o).contains("effective δ: 0.5"));
}

#[test]
fn continuous_section_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(&dir, "continuous.json", |t| {
        let section = r#"  "continuous": {
    "grid_n": 64,
    "consumers": [
      {
        "id": "James",
        "inference": { "form": "tilt", "slope": [-1, 2] },
        "impact": { "form": "beta", "a": 2, "b": [3, -1] },
        "x": 0.6
      }
    ]
  },
  "producer""#;
        t.replacen("  \"producer\"", section, 1)
    });
    let o = disclosure(&["continuous", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("grid intervals = 64, x = 0.6"), "{out}");
    let o = disclosure(&["continuous", &path, "--x", "0.1", "--grid-n", "16"]);
    assert!(stdout(&o).contains("grid intervals = 16, x = 0.1"));
}
