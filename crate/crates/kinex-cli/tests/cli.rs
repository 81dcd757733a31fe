//! End-to-end tests of the `kinex` binary: artifact schemas, stable error
//! codes, byte-level reproducibility, and agreement with direct library
//! calls on the same inputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kinex::comove;
use kinex::kem::{self, SimConfig};
use kinex::panel::{CleaningPolicy, IndicatorKind, TimeSeriesPanel};
use serde_json::Value;

fn kinex<I, S>(args: I, envs: &[(&str, &str)]) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_kinex"))
        .args(args)
        .env_remove("KINEX_THREADS")
        .envs(envs.iter().map(|(k, v)| (k.to_string(), v.to_string())))
        .output()
        .expect("spawn kinex")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Ten years of data for five countries: AAA and BBB trend together, CCC
/// runs opposite, DDD wobbles, EEE is too sparse to correlate and must be
/// dropped under the default overlap requirement.
const PANEL_CSV: &str = "country,2000,2001,2002,2003,2004,2005,2006,2007,2008,2009\n\
AAA,10,11,12,13,14,15,16,17,18,19\n\
BBB,20,21,23,22,25,26,26,28,29,31\n\
CCC,30,29,28,27,26,25,24,23,22,21\n\
DDD,15,18,14,19,13,20,12,21,11,22\n\
EEE,5,6,,,,,,,,\n";

#[test]
fn correlate_writes_matrices_and_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gini.csv");
    fs::write(&input, PANEL_CSV).unwrap();

    let out = kinex(
        [
            "correlate",
            "--input",
            input.to_str().unwrap(),
            "--indicator",
            "gini",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    // The sparse country is excluded with a warning, not a failure.
    assert!(
        stderr_of(&out).contains("EEE"),
        "stderr: {}",
        stderr_of(&out)
    );

    let corr = read_json(&dir.path().join("correlation.json"));
    let labels: Vec<&str> = corr["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(labels, ["AAA", "BBB", "CCC", "DDD"]);
    let rows = corr["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        let row: Vec<f64> = row
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(row.len(), 4);
        assert_eq!(row[i], 1.0);
        for (j, v) in row.iter().enumerate() {
            assert!((-1.0..=1.0).contains(v));
            assert_eq!(*v, rows[j].as_array().unwrap()[i].as_f64().unwrap());
        }
    }
    // AAA moves with BBB and against CCC.
    assert!(rows[0].as_array().unwrap()[1].as_f64().unwrap() > 0.9);
    assert!(rows[0].as_array().unwrap()[2].as_f64().unwrap() < -0.9);

    let dropped = read_json(&dir.path().join("dropped.json"));
    assert_eq!(dropped.as_array().unwrap().len(), 1);
    assert_eq!(dropped[0]["code"], "EEE");

    // The emitted bytes equal a direct library computation on the same
    // input under the same policy.
    let policy = CleaningPolicy::new(false, CleaningPolicy::DEFAULT_MIN_OVERLAP).unwrap();
    let panel = TimeSeriesPanel::parse_csv(PANEL_CSV, IndicatorKind::Gini)
        .unwrap()
        .cleaned(&policy);
    let result = comove::correlation_matrix(&panel, &policy).unwrap();
    let mut want = serde_json::to_string_pretty(&result.matrix).unwrap();
    want.push('\n');
    assert_eq!(
        fs::read_to_string(dir.path().join("correlation.json")).unwrap(),
        want
    );

    let dist = comove::distance_matrix(&result.matrix);
    let mut want = serde_json::to_string_pretty(&dist).unwrap();
    want.push('\n');
    assert_eq!(
        fs::read_to_string(dir.path().join("distance.json")).unwrap(),
        want
    );

    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "correlate");
    assert!(manifest["input_digests"]["input"]
        .as_str()
        .unwrap()
        .starts_with("sha256:"));
    assert_eq!(manifest["diagnostics"]["dropped_countries"], "EEE");
}

#[test]
fn correlate_reports_insufficient_overlap_with_stable_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gini.csv");
    fs::write(&input, PANEL_CSV).unwrap();

    let out = kinex(
        [
            "correlate",
            "--input",
            input.to_str().unwrap(),
            "--indicator",
            "gini",
            "--min-overlap",
            "999",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("kinex: error[E-DATA]"), "stderr: {err}");
    assert!(!dir.path().join("correlation.json").exists());
}

#[test]
fn map_emits_embedding_and_tree() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gini.csv");
    fs::write(&input, PANEL_CSV).unwrap();

    let out = kinex(
        [
            "map",
            "--input",
            input.to_str().unwrap(),
            "--indicator",
            "gini",
            "--mds-dims",
            "2",
            "--mst",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let emb = read_json(&dir.path().join("embedding.json"));
    let n = emb["labels"].as_array().unwrap().len();
    assert_eq!(n, 4);
    assert_eq!(emb["coords"].as_array().unwrap().len(), n);
    for row in emb["coords"].as_array().unwrap() {
        assert_eq!(row.as_array().unwrap().len(), 2);
    }
    assert_eq!(emb["eigenvalues"].as_array().unwrap().len(), 2);

    let tree = read_json(&dir.path().join("tree.json"));
    let edges = tree["edges"].as_array().unwrap();
    assert_eq!(edges.len(), n - 1);
    for e in edges {
        let (a, b) = (e["a"].as_u64().unwrap(), e["b"].as_u64().unwrap());
        assert!(a < b && (b as usize) < n);
        assert!(e["w"].as_f64().unwrap() >= 0.0);
    }

    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["parameters"]["mds_dims"], "2");
    assert_eq!(manifest["parameters"]["mst"], "true");
    assert!(manifest["diagnostics"]["mst_total_weight"].is_string());
}

#[test]
fn regress_exact_line_collapses_inference() {
    let dir = tempfile::tempdir().unwrap();
    let gds = dir.path().join("gds.csv");
    let gini = dir.path().join("gini.csv");
    fs::write(&gds, "country,2008\nAAA,10\nBBB,20\nCCC,30\n").unwrap();
    // Exactly gini = 2 * gds + 1.
    fs::write(&gini, "country,2008\nAAA,21\nBBB,41\nCCC,61\n").unwrap();

    let out = kinex(
        [
            "regress",
            "--gini",
            gini.to_str().unwrap(),
            "--gds",
            gds.to_str().unwrap(),
            "--year",
            "2008",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let report = read_json(&dir.path().join("regression.json"));
    assert_eq!(report["year"], 2008);
    assert_eq!(report["fit"]["slope"], 2.0);
    assert_eq!(report["fit"]["intercept"], 1.0);
    assert_eq!(report["fit"]["se_slope"], 0.0);
    assert_eq!(report["fit"]["p_slope"], 0.0);
    assert_eq!(report["fit"]["r_squared"], 1.0);
    assert_eq!(report["fit"]["n_obs"], 3);
    // JSON has no infinity literal; the exact-fit t statistic maps to null.
    assert!(report["fit"]["t_slope"].is_null());

    let scatter = fs::read_to_string(dir.path().join("scatter.csv")).unwrap();
    let mut lines = scatter.lines();
    assert_eq!(lines.next(), Some("country,gds,gini,fitted"));
    assert_eq!(lines.next(), Some("AAA,10,21,21"));
    assert_eq!(lines.next(), Some("BBB,20,41,41"));
    assert_eq!(lines.next(), Some("CCC,30,61,61"));
}

#[test]
fn regress_missing_year_lists_available_years() {
    let dir = tempfile::tempdir().unwrap();
    let gds = dir.path().join("gds.csv");
    let gini = dir.path().join("gini.csv");
    fs::write(&gds, "country,2008\nAAA,10\nBBB,20\nCCC,30\n").unwrap();
    fs::write(&gini, "country,2008\nAAA,21\nBBB,41\nCCC,61\n").unwrap();

    let out = kinex(
        [
            "regress",
            "--gini",
            gini.to_str().unwrap(),
            "--gds",
            gds.to_str().unwrap(),
            "--year",
            "1999",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("error[E-DATA]"), "stderr: {err}");
    assert!(
        err.contains("1999") && err.contains("2008"),
        "stderr: {err}"
    );
}

#[test]
fn simulate_reruns_byte_identically_and_matches_library() {
    let run = |dir: &Path| {
        let out = kinex(
            [
                "simulate",
                "--lambda",
                "0.4",
                "--agents",
                "50",
                "--sweeps",
                "40",
                "--thermalization",
                "10",
                "--seed",
                "9",
                "--snapshot-every",
                "10",
                "--histogram-bins",
                "8",
                "--out-dir",
                dir.to_str().unwrap(),
            ],
            &[],
        );
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run(dir_a.path());
    run(dir_b.path());

    for name in ["snapshots.csv", "histogram.csv", "manifest.json"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // The emitted snapshot Ginis are exactly the library's on the same
    // configuration.
    let cfg = SimConfig {
        n_agents: 50,
        lambda: 0.4,
        sweeps: 40,
        thermalization: 10,
        seed: 9,
        initial_wealth: 1.0,
        snapshot_every: 10,
    };
    let run = kem::simulate(&cfg).unwrap();
    let ginis = run.snapshot_ginis().unwrap();
    let mut want = String::from("sweep,gini\n");
    for (snap, g) in run.snapshots.iter().zip(&ginis) {
        want.push_str(&format!("{},{g}\n", snap.sweep));
    }
    assert_eq!(
        fs::read_to_string(dir_a.path().join("snapshots.csv")).unwrap(),
        want
    );

    // Histogram counts cover every pooled observation: 4 snapshots x 50.
    let hist = fs::read_to_string(dir_a.path().join("histogram.csv")).unwrap();
    let mut lines = hist.lines();
    assert_eq!(
        lines.next(),
        Some("left,right,count,empirical_density,model_density")
    );
    let total: u64 = lines
        .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 200);

    let manifest = read_json(&dir_a.path().join("manifest.json"));
    assert_eq!(manifest["parameters"]["rng_algorithm"], "ChaCha8");
    assert_eq!(manifest["parameters"]["seed"], "9");
    let drift: f64 = manifest["diagnostics"]["conservation_relative_drift"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!(drift < 1e-9);
}

#[test]
fn gini_curve_is_thread_invariant_and_hits_the_exact_endpoint() {
    let run = |dir: &Path, envs: &[(&str, &str)]| {
        let out = kinex(
            [
                "gini-curve",
                "--lambda-grid",
                "0:0.2:0.4",
                "--agents",
                "40",
                "--sweeps",
                "30",
                "--thermalization",
                "10",
                "--seed",
                "5",
                "--snapshot-every",
                "10",
                "--out-dir",
                dir.to_str().unwrap(),
            ],
            envs,
        );
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    };
    let dir_seq = tempfile::tempdir().unwrap();
    let dir_par = tempfile::tempdir().unwrap();
    run(dir_seq.path(), &[("KINEX_THREADS", "1")]);
    run(dir_par.path(), &[("KINEX_THREADS", "2")]);

    for name in ["gini_curve.csv", "manifest.json"] {
        let a = fs::read(dir_seq.path().join(name)).unwrap();
        let b = fs::read(dir_par.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} depends on the thread count");
    }

    let csv = fs::read_to_string(dir_seq.path().join("gini_curve.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lambda,gini_analytic,gini_mc,gini_mc_se");
    assert_eq!(lines.len(), 4);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "0");
    // No saving is the exponential law: Gini exactly 1/2.
    assert_eq!(first[1], "0.5");

    let manifest = read_json(&dir_seq.path().join("manifest.json"));
    assert_eq!(manifest["parameters"]["lambda_grid"], "0,0.2,0.4");
    assert_eq!(manifest["parameters"]["rng_streams"], "0..3");
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = kinex(
        [
            "gini-curve",
            "--lambda-grid",
            "0,0.5",
            "--agents",
            "10",
            "--sweeps",
            "20",
            "--thermalization",
            "0",
            "--snapshot-every",
            "10",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[("KINEX_THREADS", "lots")],
    );
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("kinex: error[E-INVALID]"), "stderr: {err}");
    assert!(err.contains("KINEX_THREADS"), "stderr: {err}");
}
