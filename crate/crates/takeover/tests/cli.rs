use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use takeover::model::load_model;
use takeover::table::{parse_table, write_table, TARGET_COLUMN};
use takeover_core::schema::study_schema;
use takeover_core::synth::{synthesize, GeneratorSpec};
use takeover_core::Provenance;

fn takeover(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_takeover")).current_dir(dir).env_remove("TAKEOVER_OUT_DIR").args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = takeover(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

/// A small synthetic table and a model trained on it.
fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--rows", "120", "--seed", "7", "--out", "d.csv"]);
    ok(dir.path(), &["train", "--data", "d.csv", "--n-estimators", "20", "--out", "model.json"]);
    let p = dir.path().to_path_buf();
    (dir, p)
}

#[test]
fn synth_train_predict_round_trip() {
    let (_guard, dir) = setup();
    assert!(dir.join("model.json.manifest.json").exists());
    let model = load_model(&read(dir.join("model.json"))).unwrap();
    let text = read(dir.join("d.csv"));
    let d = parse_table(&text, &takeover_core::schema::merged_schema(), TARGET_COLUMN, Provenance::User).unwrap();
    assert_eq!(d.n_rows(), 120);

    ok(&dir, &["predict", "--model", "model.json", "--data", "d.csv", "--out", "p.csv"]);
    let preds = read(dir.join("p.csv"));
    let mut lines = preds.lines();
    assert_eq!(lines.next(), Some("row,prediction"));
    for (line, row) in lines.zip(d.rows()) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(p.to_bits(), model.predict(&row.values).unwrap().to_bits());
    }
}

#[test]
fn predict_handles_all_missing_and_named_values() {
    let (_guard, dir) = setup();
    let all_missing: f64 = ok(&dir, &["predict", "--model", "model.json", "--instance", ""]).trim().parse().unwrap();
    assert!(all_missing.is_finite());
    let model = load_model(&read(dir.join("model.json"))).unwrap();
    let named: f64 = ok(&dir, &["predict", "--model", "model.json", "--instance", "URG=2,TBTC&TBTB=3.48,AGE=41"]).trim().parse().unwrap();
    let mut x = vec![None; model.n_features()];
    let names = model.feature_names();
    for (n, v) in [("URG", 2.0), ("TBTC&TBTB", 3.48), ("AGE", 41.0)] {
        x[names.iter().position(|m| m == n).unwrap()] = Some(v);
    }
    assert_eq!(named, model.predict(&x).unwrap());
    ok(&dir, &["predict", "--model", "model.json", "--instance", "URG=1", "--out", "one.json"]);
    assert!(json(dir.join("one.json"))["prediction"].is_number());
}

#[test]
fn explain_global_ranks_by_absolute_phi() {
    let (_guard, dir) = setup();
    ok(&dir, &["explain", "--model", "model.json", "--data", "d.csv", "--global", "--out", "imp.json"]);
    let g = json(dir.join("imp.json"));
    let ranking = g["ranking"].as_array().unwrap();
    let per = g["per_instance"].as_array().unwrap();
    assert_eq!(per.len(), 120);
    let model = load_model(&read(dir.join("model.json"))).unwrap();
    for r in ranking {
        let j = model.feature_names().iter().position(|n| n == r["variable"].as_str().unwrap()).unwrap();
        let total: f64 = per.iter().map(|row| row[j].as_f64().unwrap().abs()).sum();
        assert!((total - r["score"].as_f64().unwrap()).abs() < 1e-9);
    }
    let scores: Vec<f64> = ranking.iter().map(|r| r["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    ok(&dir, &["explain", "--model", "model.json", "--data", "d.csv", "--global", "--out", "imp.csv"]);
    assert!(read(dir.join("imp.csv")).starts_with("rank,variable,score\n1,"));
}

#[test]
fn explain_per_instance_outputs() {
    let (_guard, dir) = setup();
    ok(&dir, &["explain", "--model", "model.json", "--data", "d.csv", "--dependence", "URG", "--out", "dep.csv"]);
    let dep = read(dir.join("dep.csv"));
    assert!(dep.starts_with("feature_value,main_effect,phi_total,color_feature,color_value\n"));
    assert_eq!(dep.lines().count(), 121);

    ok(&dir, &["explain", "--model", "model.json", "--data", "d.csv", "--interactions", "--row", "3", "--out", "int.json"]);
    let im = &json(dir.join("int.json"))[0];
    let phi: Vec<f64> = im["phi"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (i, row) in im["values"].as_array().unwrap().iter().enumerate() {
        let sum: f64 = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
        assert!((sum - phi[i]).abs() < 1e-9);
    }

    ok(&dir, &["explain", "--model", "model.json", "--force", "--instance", "URG=0,TOR_V=0", "--out", "force.json"]);
    let f = &json(dir.join("force.json"))[0];
    let sum: f64 = f["contributions"].as_array().unwrap().iter().map(|c| c["phi"].as_f64().unwrap()).sum();
    assert!((f["base_value"].as_f64().unwrap() + sum - f["output"].as_f64().unwrap()).abs() < 1e-9);

    let out = takeover(&dir, &["explain", "--model", "model.json", "--data", "d.csv", "--row", "500", "--shap", "--out", "s.json"]);
    assert!(!out.status.success());
}

#[test]
fn pipeline_commands_write_table_layouts() {
    let (_guard, dir) = setup();
    let quick = ["--k", "3", "--seeds", "0..1", "--n-estimators", "15"];
    let with = |args: &[&'static str]| -> Vec<&'static str> { [args, &quick[..]].concat() };

    ok(&dir, &with(&["select", "--data", "d.csv", "--out", "sel.csv"]));
    let sel = read(dir.join("sel.csv"));
    assert!(sel.starts_with("feature_set,rmse,mae,adj_r2,corr\n"), "{sel}");
    assert!(sel.lines().count() >= 3);

    ok(&dir, &with(&["bins", "--data", "d.csv", "--bounds", "0.001,3,100", "--out", "bins.csv"]));
    let bins = read(dir.join("bins.csv"));
    let lines: Vec<&str> = bins.lines().collect();
    assert_eq!(lines[0], "upper_bound,samples,rmse,adj_r2,mae,min_mae,max_mae,corr");
    assert_eq!(lines[1], "0.001,0,,,,,,");
    assert!(lines[3].starts_with("100,120,"));

    ok(&dir, &with(&["cv", "--data", "d.csv", "--features", "URG,AGE", "--out", "cv.json"]));
    let cv = json(dir.join("cv.json"));
    assert_eq!(cv["per_seed"].as_array().unwrap().len(), 2);
    assert_eq!(cv["feature_set"], serde_json::json!(["URG", "AGE"]));

    ok(&dir, &["baseline", "--data", "d.csv", "--k", "3", "--seeds", "0", "--compare", "--n-estimators", "15", "--out", "base.json"]);
    let base = json(dir.join("base.json"));
    assert!(base["linear"]["model"]["coefficients"].is_array());
    assert!(base["boosted"]["mean"]["rmse"].is_number());

    std::fs::write(dir.join("grid.spec.json"), r#"{"n_estimators":[5,10],"max_depth":[1,2],"learning_rate":[0.3],"subsample":[1.0],"colsample_bytree":[1.0]}"#)
        .unwrap();
    ok(&dir, &["grid", "--data", "d.csv", "--grid", "grid.spec.json", "--k", "3", "--seeds", "0", "--out", "grid.json"]);
    assert_eq!(json(dir.join("grid.json"))["evaluated"].as_array().unwrap().len(), 4);
    ok(&dir, &["cv", "--data", "d.csv", "--params", "grid.json", "--k", "3", "--seeds", "0", "--out", "cv2.json"]);
    assert_eq!(json(dir.join("cv2.json"))["params"], json(dir.join("grid.json"))["best"]);
}

#[test]
fn output_is_independent_of_thread_count() {
    let (_guard, dir) = setup();
    for t in ["1", "3"] {
        let out = format!("cv{t}.json");
        ok(&dir, &["--threads", t, "cv", "--data", "d.csv", "--k", "3", "--seeds", "0..3", "--subsample", "0.8", "--n-estimators", "10", "--out", &out]);
    }
    assert_eq!(read(dir.join("cv1.json")), read(dir.join("cv3.json")));
}

#[test]
fn ingest_merges_and_filters() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GeneratorSpec::new(3.0, 50).noise(2.0).missing(0.1);
    let d = synthesize(&study_schema(), &spec, 1).unwrap().dataset;
    std::fs::write(dir.path().join("raw.csv"), write_table(&d, TARGET_COLUMN)).unwrap();
    ok(dir.path(), &["ingest", "--data", "raw.csv", "--outlier-threshold", "4", "--out", "clean.csv"]);
    let clean = read(dir.path().join("clean.csv"));
    assert!(clean.lines().next().unwrap().contains("TBTC&TBTB"));
    let kept = d.rows().iter().filter(|r| r.target <= 4.0).count();
    assert_eq!(clean.lines().count(), kept + 1);
    let summary = json(dir.path().join("clean.summary.json"));
    for key in ["row_count", "missing_fraction", "target_min", "target_max", "target_mean", "histogram"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert_eq!(summary["row_count"], kept);
    let manifest = json(dir.path().join("clean.csv.manifest.json"));
    assert_eq!(manifest["command"], "ingest");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_seconds"].is_number());
}

#[test]
fn out_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_takeover"))
        .current_dir(dir.path())
        .env("TAKEOVER_OUT_DIR", "results")
        .args(["synth", "--rows", "10"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("results/synthetic.csv").exists());
}

#[test]
fn errors_are_one_line_and_name_the_module() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("AGE,LAD,SIM,TOR_V,TOR_A,TOR_VT,TOR_P,NDT_V,NDT_A,NDT_M,NDT_C,HAND,NDT_P,TBTC&TBTB,URG,DRE,IRU,takeover_time\n");
    text.push_str("41,0,1,1,0,0,0,1,0,0,0,1,0,3,5,2,0,2.5\n");
    std::fs::write(dir.path().join("bad.csv"), text).unwrap();
    let out = takeover(dir.path(), &["train", "--data", "bad.csv"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: dataset: row 1, column `URG`"), "{err}");

    let out = takeover(dir.path(), &["train", "--data", "missing.csv"]);
    assert!(!out.status.success());

    ok(dir.path(), &["synth", "--rows", "20", "--out", "d.csv"]);
    let out = takeover(dir.path(), &["cv", "--data", "d.csv", "--k", "50", "--seeds", "0"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: pipeline: 50 folds"), "{err}");
    let out = takeover(dir.path(), &["train", "--data", "d.csv", "--learning-rate", "2"]);
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: booster: "));
    let out = takeover(dir.path(), &["train", "--data", "d.csv", "--out", "model.csv"]);
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: output: "));

    ok(dir.path(), &["train", "--data", "d.csv", "--n-estimators", "5"]);
    let out = takeover(dir.path(), &["predict", "--model", "model.json", "--instance", "URG=7"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: dataset: row 1, column `URG`: 7 is not an admissible code"), "{err}");
}
