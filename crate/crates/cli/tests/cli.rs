use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn quadclass(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadclass"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QUADCLASS_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = quadclass(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text.trim()).unwrap()
}

/// Shared small dataset with classes 1, 2, 3.
fn fixture() -> TempDir {
    let dir = TempDir::new().unwrap();
    ok(&["generate", "--max-D", "20000", "--classes", "1,2,3", "--out", "ds"], dir.path());
    dir
}

#[test]
fn generate_writes_dataset_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = ok(&["generate", "--max-D", "40", "--classes", "1,2", "--out", "d"], dir.path());
    assert_eq!(json(&out)["records"], 12);
    for f in ["fields.csv", "coefficients.qcf", "dataset.json", "run.json"] {
        assert!(dir.path().join("d").join(f).exists(), "{f}");
    }
    let manifest = json(&fs::read_to_string(dir.path().join("d/run.json")).unwrap());
    assert_eq!(manifest["subcommand"], "generate");
    assert_eq!(manifest["params"]["max_d"], 40);
    assert_eq!(manifest["dataset_checksum"].as_str().unwrap().len(), 64);

    let empty = ok(&["generate", "--max-D", "200", "--classes", "9", "--out", "e"], dir.path());
    assert_eq!(json(&empty)["records"], 0);

    let bad = quadclass(&["generate", "--max-D", "3", "--classes", "1", "--out", "f"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(quadclass(&["generate", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(quadclass(&["nope"], dir.path()).status.code(), Some(1));
    assert_eq!(quadclass(&[], dir.path()).status.code(), Some(1));
    let missing = quadclass(&["stats", "--dataset", "absent", "--out", "o"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    for sub in ["generate", "bubble", "verify-genus", "classify", "ablation", "pca", "stats", "import"] {
        let help = quadclass(&[sub, "--help"], dir.path());
        assert!(help.status.success(), "{sub}");
        assert!(String::from_utf8_lossy(&help.stdout).contains("--"), "{sub}");
    }
}

#[test]
fn bubble_chart_search_and_frontier() {
    let dir = fixture();
    let p = dir.path();
    let out = ok(&["bubble", "--dataset", "ds", "--classes", "1,2", "--chart", "3,5,7", "--out", "c"], p);
    assert_eq!(json(&out)["bubbles"], 27);
    let chart = fs::read_to_string(p.join("c/chart.csv")).unwrap();
    assert_eq!(chart.lines().count(), 28);
    assert!(chart.starts_with("v1,v2,v3,f_i,f_j,total,purity"));

    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let dest = format!("s{threads}");
        ok(
            &["--threads", threads, "bubble", "--dataset", "ds", "--classes", "1,2", "--indices", "1..20", "--top-k", "5", "--out", &dest],
            p,
        );
        outputs.push(fs::read(p.join(dest).join("results.jsonl")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 5);

    let frontier = ok(
        &["bubble", "--dataset", "ds", "--classes", "1,2", "--indices", "1..12", "--frontier", "1", "--out", "f"],
        p,
    );
    assert_eq!(json(&frontier).as_array().unwrap().len(), 4);

    let too_big = quadclass(&["bubble", "--dataset", "ds", "--classes", "1,2", "--indices", "1..1001", "--out", "x"], p);
    assert_eq!(too_big.status.code(), Some(1));
    let no_seed = quadclass(
        &["bubble", "--dataset", "ds", "--classes", "1,2", "--mode", "sampled", "--budget", "10", "--out", "x"],
        p,
    );
    assert_eq!(no_seed.status.code(), Some(1));
    let mut sampled = Vec::new();
    for dest in ["a", "b"] {
        ok(
            &["bubble", "--dataset", "ds", "--classes", "1,3", "--mode", "sampled", "--budget", "50", "--seed", "9", "--out", dest],
            p,
        );
        sampled.push(fs::read(p.join(dest).join("results.jsonl")).unwrap());
    }
    assert_eq!(sampled[0], sampled[1]);
}

#[test]
fn verify_genus_reports_zero_violations() {
    let dir = fixture();
    let out = ok(&["verify-genus", "--dataset", "ds", "--out", "g"], dir.path());
    assert!(out.lines().any(|l| l == "violations: 0"));
    let report = json(&fs::read_to_string(dir.path().join("g/genus.json")).unwrap());
    assert_eq!(report["violation_count"], 0);
}

#[test]
fn classify_formulas_and_gbdt() {
    let dir = fixture();
    let p = dir.path();
    let f13a = json(&ok(&["classify", "--dataset", "ds", "--formula", "f13a", "--out", "a"], p));
    assert!(f13a["accuracy"].as_f64().unwrap() >= 0.995);
    let metrics = json(&fs::read_to_string(p.join("a/metrics.json")).unwrap());
    assert_eq!(metrics["positive_class"], 1);
    assert!(p.join("a/calibration.csv").exists() && p.join("a/confusion.csv").exists());

    let f12 = json(&ok(&["classify", "--dataset", "ds", "--formula", "f12", "--out", "b"], p));
    assert_eq!(f12["fn_count"], 0);

    let neither = quadclass(&["classify", "--dataset", "ds", "--out", "x"], p);
    assert_eq!(neither.status.code(), Some(1));
    let no_seed = quadclass(&["classify", "--dataset", "ds", "--gbdt", "--classes", "1,2", "--out", "x"], p);
    assert_eq!(no_seed.status.code(), Some(1));

    let mut models = Vec::new();
    for dest in ["g1", "g2"] {
        let out = ok(
            &[
                "classify", "--dataset", "ds", "--gbdt", "--classes", "1,3", "--features", "ap:5,D,R", "--trees", "30",
                "--importance-repeats", "2", "--seed", "4", "--out", dest,
            ],
            p,
        );
        assert!(json(&out)["test_accuracy"].as_f64().unwrap() > 0.9);
        models.push(fs::read(p.join(dest).join("model.json")).unwrap());
        assert!(p.join(dest).join("importance.csv").exists());
    }
    assert_eq!(models[0], models[1]);
}

#[test]
fn ablation_stats_pca() {
    let dir = fixture();
    let p = dir.path();
    let rows = json(&ok(
        &["ablation", "--dataset", "ds", "--balanced", "--trees", "5", "--seed", "1", "--out", "ab"],
        p,
    ));
    assert_eq!(rows.as_array().unwrap().len(), 14);
    assert_eq!(fs::read_to_string(p.join("ab/ablation.csv")).unwrap().lines().count(), 15);

    let stats = ok(&["stats", "--dataset", "ds", "--out", "st"], p);
    let ramified = fs::read_to_string(p.join("st/ramified.csv")).unwrap();
    assert!(stats.contains("h,n_d=1,n_d=2,n_d=3"));
    let row = |h: &str| ramified.lines().find(|l| l.starts_with(&format!("{h},"))).unwrap().to_string();
    assert!(row("1").ends_with(",0"));
    assert!(row("2").starts_with("2,0,"));
    let coefficients = fs::read_to_string(p.join("st/coefficients.csv")).unwrap();
    let h1: Vec<&str> = coefficients.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(h1[6], "1");

    let out = ok(&["pca", "--dataset", "ds", "--classes", "1,2", "--indices", "primes", "--out", "pc"], p);
    assert_eq!(json(&out)["features"], 168);
    let proj = fs::read_to_string(p.join("pc/projection.csv")).unwrap();
    assert!(proj.starts_with("d,h,pc1,pc2,pc3\n"));
}

#[test]
fn import_round_trip_and_validation() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    ok(&["generate", "--max-D", "3000", "--classes", "1,2", "--out", "ds"], p);
    let fields = fs::read_to_string(p.join("ds/fields.csv")).unwrap();
    fs::write(p.join("good.csv"), &fields).unwrap();
    let out = json(&ok(&["import", "--csv", "good.csv", "--out", "imp"], p));
    assert_eq!(out["records"].as_u64().unwrap() as usize, fields.lines().count() - 1);
    assert_eq!(
        fs::read(p.join("imp/fields.csv")).unwrap(),
        fs::read(p.join("ds/fields.csv")).unwrap()
    );

    // h_plus = 7 is neither h nor 2h.
    let mut lines: Vec<String> = fields.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[3].split(',').map(String::from).collect();
    cells[3] = "7".into();
    lines[3] = cells.join(",");
    fs::write(p.join("bad.csv"), lines.join("\n") + "\n").unwrap();
    let bad = quadclass(&["import", "--csv", "bad.csv", "--out", "imp2"], p);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 4"));
}

#[test]
fn corrupted_dataset_is_a_validation_failure() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    ok(&["generate", "--max-D", "500", "--classes", "1", "--out", "ds"], p);
    let path = p.join("ds/fields.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push('\n');
    fs::write(&path, text).unwrap();
    let out = quadclass(&["verify-genus", "--dataset", "ds"], p);
    assert_eq!(out.status.code(), Some(2));
}
