use std::path::Path;
use std::process::Command;

use harmonic_detect::harness::cli::run_cli_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut o = Vec::new();
    let mut e = Vec::new();
    let code = run_cli_with(std::iter::once("hdetect").chain(args.iter().copied()), &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn quantile_output_is_byte_identical() {
    let args = ["quantile", "--N", "512", "--alpha", "0.01", "--method", "mc", "--trials", "20000", "--seed", "7"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn formula_bound_dominates_monte_carlo() {
    let (code, text, err) = run(&["quantile", "--N", "128", "--method", "all", "--trials", "20000", "--seed", "1"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let formula = v["formula_bound"].as_f64().unwrap();
    let mc = v["monte_carlo"].as_f64().unwrap();
    let chi2 = v["chi2"].as_f64().unwrap();
    assert!(mc < formula, "{mc} vs {formula}");
    assert!(chi2 > 128.0);
}

#[test]
fn table2_csv_contract() {
    let (code, text, err) =
        run(&["table2", "--N", "64", "--trials", "100", "--seed", "1", "--grid-step", "0.25", "--grid-max", "2"]);
    assert_eq!(code, 0, "{err}");
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,p_basic,p_energy"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 3);
        for f in &fields {
            // Shortest round-trip formatting.
            let v: f64 = f.parse().unwrap();
            assert_eq!(&format!("{v}"), f);
            assert!((0.0..=2.0).contains(&v));
        }
        assert_eq!(fields[0].parse::<f64>().unwrap(), i as f64 * 0.25);
    }
}

#[test]
fn table2_out_and_json_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t2.csv");
    let json = dir.path().join("t2.json");
    let args = [
        "table2", "--N", "32", "--trials", "50", "--seed", "4", "--grid-step", "0.5", "--grid-max", "1",
        "--out", path(&csv), "--json", path(&json),
    ];
    let (code, text, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert!(text.is_empty());
    let written = std::fs::read_to_string(&csv).unwrap();
    assert!(written.starts_with("rho,p_basic,p_energy\n"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["record"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["config"]["N"], 32);
}

#[test]
fn pure_nuisance_is_rarely_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.json");
    let mut rejections = 0;
    for seed in 0..100u64 {
        let obs = dir.path().join(format!("obs{seed}.json"));
        let nz = dir.path().join(format!("z{seed}.json"));
        let eps = if seed % 2 == 0 { "0" } else { "0.01" };
        let s = seed.to_string();
        let (code, _, err) = run(&[
            "gen", "--N", "128", "--seed", &s, "--nuisance-d", "4", "--eps", eps,
            "--out", path(&obs), "--nuisance-out", path(&nz),
        ]);
        assert_eq!(code, 0, "{err}");
        let (code, text, err) = run(&[
            "detect", "--input", path(&obs), "--nuisance", path(&nz), "--alpha", "0.01",
            "--seed", "11", "--cache", path(&cache),
        ]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        if v["decision"] == "RejectH0" {
            rejections += 1;
        }
    }
    // Binomial(100, 0.01) exceeds 4 with probability below 0.4%.
    assert!(rejections <= 4, "{rejections} rejections");
    let cached: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cache).unwrap()).unwrap();
    assert_eq!(cached.as_object().unwrap().len(), 1);
}

#[test]
fn strong_signal_is_detected_by_both_tests() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.json");
    let (code, _, err) = run(&["gen", "--N", "256", "--seed", "2", "--signal-d", "2", "--rho", "3", "--out", path(&obs)]);
    assert_eq!(code, 0, "{err}");
    for test in ["basic", "energy"] {
        let (code, text, err) = run(&["detect", "--input", path(&obs), "--test", test, "--seed", "1", "--mc-trials", "5000"]);
        assert_eq!(code, 0, "{err}");
        assert!(text.contains("RejectH0"), "{test}: {text}");
    }
}

#[test]
fn small_resolution_search() {
    let (code, text, err) = run(&["table1", "--N", "32", "--experiments", "2", "--seed", "3", "--mc-trials", "2000"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,resolution,snr");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,") && lines[2].starts_with("1,"));
}

#[test]
fn verify_reports_success() {
    let (code, text, err) = run(&["verify", "--seed", "5"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 4);
}

#[test]
fn malformed_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("bad.json");
    std::fs::write(&obs, r#"{"N": 4, "y": [1, 2, 3]}"#).unwrap();
    let (code, _, err) = run(&["detect", "--input", path(&obs), "--threshold-method", "user", "--threshold", "3"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hdetect");
    let ok = Command::new(bin).args(["quantile", "--N", "64", "--method", "formula"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("formula_bound"));
    let bad = Command::new(bin).args(["table2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
