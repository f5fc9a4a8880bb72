use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cdadt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdadt"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Flags of a small instance; a flag repeated in `extra` replaces the default.
fn small(extra: &[&str]) -> Vec<String> {
    let base = [
        "--n", "4", "--m", "3", "--q", "40", "--p", "2", "--d", "4", "--seed", "3", "--eta", "0.1",
    ];
    let mut out: Vec<String> = Vec::new();
    for pair in base.chunks(2) {
        if !extra.contains(&pair[0]) {
            out.extend(pair.iter().map(|s| s.to_string()));
        }
    }
    out.extend(extra.iter().map(|s| s.to_string()));
    out
}

fn run_in(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run".to_string()];
    args.extend(small(extra));
    args.extend(["--out".to_string(), dir.display().to_string()]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    cdadt(&refs)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn gen_data_is_deterministic_and_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let (d1, d2) = (tmp.path().join("one"), tmp.path().join("two"));
    for d in [&d1, &d2] {
        let out = cdadt(&[
            "gen-data",
            "--n",
            "5",
            "--m",
            "4",
            "--q",
            "30",
            "--seed",
            "7",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["A.csv", "B.csv", "manifest.json"] {
        assert_eq!(fs::read(d1.join(f)).unwrap(), fs::read(d2.join(f)).unwrap());
    }
    assert_eq!(csv_rows(&d1.join("A.csv")).len(), 5);
    assert_eq!(csv_rows(&d1.join("B.csv"))[0].len(), 30);

    let bad = cdadt(&[
        "gen-data",
        "--xi-a",
        "1.5",
        "--out",
        tmp.path().join("bad").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let unknown = cdadt(&["gen-data", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn run_writes_log_manifest_and_states() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--max-iters", "50", "--topology", "ring"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&tmp.path().join("log.csv"));
    assert_eq!(
        rows[0],
        ["iter", "stat_viol", "consensus_err", "feas_viol", "objective", "merit"]
    );
    assert_eq!(rows.len(), 52);
    assert_eq!(rows[1][0], "0");
    assert!(!rows[1][5].is_empty());

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["topology"]["kind"], "ring");
    assert_eq!(manifest["derived"]["n"], 7);
    assert_eq!(manifest["run"]["eta"], 0.1);
    assert_eq!(manifest["problem"]["partition"], serde_json::json!([10, 10, 10, 10]));
    assert!(manifest["problem"]["regularizer"].as_f64().unwrap() > 0.0);
    assert!(manifest["derived"]["lambda"].as_f64().unwrap() < 1.0);
    assert!(manifest["code_version"].as_str().unwrap().contains("cdadt-cli"));

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["iterations"], 50);
    assert_eq!(summary["rounds"], 150);
    assert_eq!(summary["status"], "max_iters");
    for i in 0..4 {
        assert_eq!(
            csv_rows(&tmp.path().join(format!("final_states/agent{i}_x.csv"))).len(),
            7
        );
    }
}

#[test]
fn zero_iterations_logs_only_the_start() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--max-iters", "0"]);
    assert!(out.status.success());
    let rows = csv_rows(&tmp.path().join("log.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "0");
}

#[test]
fn manifest_rerun_reproduces_the_log_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let out = run_in(&first, &["--max-iters", "200", "--topology", "er"]);
    assert!(out.status.success());
    let second = tmp.path().join("second");
    let manifest = first.join("manifest.json");
    let out = cdadt(&[
        "run",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(first.join("log.csv")).unwrap(),
        fs::read(second.join("log.csv")).unwrap()
    );
    assert_eq!(
        fs::read(&manifest).unwrap(),
        fs::read(second.join("manifest.json")).unwrap()
    );
}

#[test]
fn csv_data_matches_synthetic_run() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let gen = cdadt(&[
        "gen-data",
        "--n",
        "4",
        "--m",
        "3",
        "--q",
        "40",
        "--seed",
        "3",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let synth = tmp.path().join("synth");
    assert!(run_in(&synth, &["--max-iters", "30"]).status.success());
    let from_csv = tmp.path().join("csv");
    let a = data.join("A.csv");
    let b = data.join("B.csv");
    let out = run_in(
        &from_csv,
        &[
            "--max-iters",
            "30",
            "--data-a",
            a.to_str().unwrap(),
            "--data-b",
            b.to_str().unwrap(),
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(synth.join("log.csv")).unwrap(),
        fs::read(from_csv.join("log.csv")).unwrap()
    );

    let missing = run_in(
        &tmp.path().join("x"),
        &["--data-a", "/nonexistent/a.csv", "--data-b", b.to_str().unwrap()],
    );
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn divergence_exits_with_runtime_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--eta", "50", "--beta", "100", "--max-iters", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "diverged");
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteration"));
}

#[test]
fn sweep_records_divergence_and_summarizes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep-beta".to_string()];
    args.extend(small(&["--eta", "0.05", "--max-iters", "300", "--betas", "1,10000"]));
    args.extend(["--out".to_string(), tmp.path().display().to_string()]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = cdadt(&refs);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&tmp.path().join("summary.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "1.0");
    assert_eq!(rows[2][1], "diverged");
    assert!(tmp.path().join("beta_1/log.csv").is_file());
}

#[test]
fn single_beta_sweep_equals_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep-beta".to_string()];
    args.extend(small(&["--max-iters", "40", "--betas", "1"]));
    args.extend(["--out".to_string(), tmp.path().join("sweep").display().to_string()]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    assert!(cdadt(&refs).status.success());
    assert!(run_in(&tmp.path().join("run"), &["--max-iters", "40"]).status.success());
    assert_eq!(
        fs::read(tmp.path().join("sweep/beta_1/log.csv")).unwrap(),
        fs::read(tmp.path().join("run/log.csv")).unwrap()
    );
}

#[test]
fn report_sorts_by_lambda_and_rejects_empty_input() {
    let tmp = tempfile::tempdir().unwrap();
    for topo in ["ring", "er", "grid"] {
        let out = run_in(&tmp.path().join(topo), &["--max-iters", "20", "--topology", topo]);
        assert!(out.status.success());
    }
    let out = cdadt(&["report", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let lambdas: Vec<f64> = reader
        .deserialize::<std::collections::HashMap<String, String>>()
        .map(|r| r.unwrap()["lambda"].parse().unwrap())
        .collect();
    assert_eq!(lambdas.len(), 3);
    assert!(lambdas.windows(2).all(|w| w[0] <= w[1]));

    let empty = tempfile::tempdir().unwrap();
    assert_ne!(
        cdadt(&["report", empty.path().to_str().unwrap()]).status.code(),
        Some(0)
    );

    fs::write(tmp.path().join("ring/log.csv"), "garbage\n1,2\n").unwrap();
    let broken = cdadt(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(broken.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("ring"));
}

#[test]
fn single_agent_run_matches_centralized_iteration() {
    use cdadt::engine::{centralized_step, default_init};
    use cdadt::problem::{build_cca, synth_factor, CcaData};

    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--d", "1", "--max-iters", "100", "--eta", "0.05"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let a = synth_factor::<f64>(4, 40, 0.97, 3).unwrap();
    let b = synth_factor::<f64>(3, 40, 0.96, 4).unwrap();
    let prob = build_cca(&CcaData::uniform(a, b, 1).unwrap(), 2, None).unwrap();
    let mut x = default_init(&prob, 3).unwrap();
    for _ in 0..100 {
        x = centralized_step(&x, &prob, 0.05, 1.0);
    }
    let final_x = cdadt::problem::load_matrix_csv::<f64>(tmp.path().join("final_states/agent0_x.csv")).unwrap();
    assert!((&final_x - &x).fro_norm() <= 1e-12 * x.fro_norm());
}

#[test]
fn oracle_prints_optimum() {
    let out = cdadt(&["oracle", "--n", "4", "--m", "3", "--q", "40", "--p", "2", "--d", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["objective_star"].as_f64().unwrap() < 0.0);
    assert_eq!(v["top_eigvals"].as_array().unwrap().len(), 2);
}
