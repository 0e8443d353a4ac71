use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::Command;

fn pseudodyn(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pseudodyn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_roots_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = pseudodyn(&["spectrum", "--n", "40", "--t", "3", "--b", "0.5", "--delta", "0.01"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = json(&dir.path().join("spectrum.json"));
    assert_eq!(summary["config"]["n"], 40);
    assert_eq!(summary["multiplicities"]["p1"], 9);
    let roots = summary["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 10);
    let mut reader = csv::Reader::from_path(dir.path().join("roots.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["re", "im"]);
    let rows: Vec<(f64, f64)> = reader.deserialize().map(Result::unwrap).collect();
    for (row, root) in rows.iter().zip(roots) {
        assert_eq!(row.0, root["re"].as_f64().unwrap());
        assert_eq!(row.1, root["im"].as_f64().unwrap());
    }
    assert!(summary["trace_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn json_format_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "n = 12\nt = 2\nb = 1  # real b\nformat = json\n").unwrap();
    let out = dir.path().join("out");
    let run = pseudodyn(&["spectrum", "--config", conf.to_str().unwrap(), "--n", "10"], &out);
    assert!(run.status.success());
    let roots = json(&out.join("roots.json"));
    assert_eq!(roots.as_array().unwrap().len(), 4);
    assert!(roots[0]["z"]["re"].is_f64());
    assert_eq!(json(&out.join("spectrum.json"))["config"]["n"], 10);
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["ensemble", "--n", "30", "--t", "2", "--b", "1", "--samples", "4", "--seed", "7", "--sweep", "1:20,3:24"];
    assert!(pseudodyn(&args, a.path()).status.success());
    assert!(pseudodyn(&args, b.path()).status.success());
    for name in ["cloud.csv", "mean_radius.csv", "ensemble.json", "fit.json", "symbol_curve.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    other[10] = "8";
    assert!(pseudodyn(&other, c.path()).status.success());
    assert_ne!(fs::read(a.path().join("cloud.csv")).unwrap(), fs::read(c.path().join("cloud.csv")).unwrap());
}

#[test]
fn fit_reads_an_ensemble_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("radii.csv");
    let c1 = -20.0_f64;
    let c2 = 0.1_f64;
    let mut text = String::from("t,n,mean_radius\n");
    for (t, n) in [(1, 40), (2, 60), (3, 80), (4, 50)] {
        let x = (t + 1) as f64 / (n + t + 1) as f64;
        text.push_str(&format!("{t},{n},{}\n", (c1 * x + c2).exp()));
    }
    fs::write(&table, text).unwrap();
    let run = pseudodyn(&["fit", "--input", table.to_str().unwrap()], dir.path());
    assert!(run.status.success());
    let fit = json(&dir.path().join("fit.json"));
    assert!((fit["c1"].as_f64().unwrap() - c1).abs() < 1e-9);
    assert!((fit["c2"].as_f64().unwrap() - c2).abs() < 1e-9);
}

#[test]
fn pseudospec_writes_grid_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let run = pseudodyn(
        &["pseudospec", "--n", "12", "--t", "2", "--resolution", "9,7", "--eps", "1e-3", "--region", "-1,1,-1,1"],
        dir.path(),
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let matrix = fs::read_to_string(dir.path().join("sigma_matrix.csv")).unwrap();
    let rows: Vec<&str> = matrix.lines().collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.split(',').count() == 9));
    let grid = fs::read_to_string(dir.path().join("sigma_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 63);
    let summary = json(&dir.path().join("pseudospec.json"));
    assert_eq!(summary["enclosure"][0]["epsilon"], 1e-3);
}

#[test]
fn jordan_and_symbol_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pseudodyn(&["jordan", "--n", "11", "--t", "3"], dir.path()).status.success());
    let summary = json(&dir.path().join("jordan.json"));
    assert_eq!(summary["multiplicities"]["block_sizes"], serde_json::json!([3, 3, 2]));
    assert!(dir.path().join("right_chain_3.csv").exists());
    assert!(dir.path().join("left_chain_1.csv").exists());

    let dir = tempfile::tempdir().unwrap();
    let run = pseudodyn(&["symbol", "--n", "30", "--t", "2", "--b", "0.5", "--resolution", "20", "--eps", "1e-6"], dir.path());
    assert!(run.status.success());
    let summary = json(&dir.path().join("symbol.json"));
    assert_eq!(summary["varpi"], 30);
    assert_eq!(summary["winding_at_origin"], 3);
}

#[test]
fn oracle_check_passes_on_small_cases() {
    for args in [["--n", "9", "--t", "2", "--b", "1"], ["--n", "12", "--t", "3", "--b", "0"]] {
        let dir = tempfile::tempdir().unwrap();
        let mut full = vec!["oracle-check", "--delta", "0.1"];
        full.extend(args);
        let run = pseudodyn(&full, dir.path());
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        assert_eq!(json(&dir.path().join("oracle.json"))["passed"], true);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let usage = pseudodyn(&["spectrum", "--n", "1"], dir.path());
    assert_eq!(usage.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("error"));
    assert_eq!(pseudodyn(&["spectrum", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(pseudodyn(&["oracle-check", "--n", "13"], dir.path()).status.code(), Some(1));
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "colour = blue\n").unwrap();
    assert_eq!(pseudodyn(&["spectrum", "--config", conf.to_str().unwrap()], dir.path()).status.code(), Some(1));
    let help = Command::new(env!("CARGO_BIN_EXE_pseudodyn")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
