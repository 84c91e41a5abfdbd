use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pseudoclust::synth::{topical_documents, TopicalSpec};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pseudoclust"))
}

/// Runs in `dir`; budgets default to one small size so the fixture's train
/// split is large enough.
fn run(dir: &Path, args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args).args(["--out", dir.to_str().unwrap()]);
    if !args.contains(&"--budgets") {
        cmd.args(["--budgets", "32"]);
    }
    cmd.output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Returns the corpus path and gold labels by id.
fn write_corpus(dir: &Path) -> (PathBuf, BTreeMap<u64, String>) {
    let spec = TopicalSpec { topics: 4, docs_per_topic: 100, words_per_doc: 20, noise_words: 5, seed: 1, ..TopicalSpec::default() };
    let docs = topical_documents(&spec);
    let path = dir.join("corpus.jsonl");
    let lines: String = docs
        .iter()
        .map(|d| json!({"id": d.id, "text": d.text, "label": d.gold_label}).to_string() + "\n")
        .collect();
    std::fs::write(&path, lines).unwrap();
    let gold = docs.into_iter().map(|d| (d.id, d.gold_label.unwrap())).collect();
    (path, gold)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn test_ids(out: &Path) -> Vec<u64> {
    std::fs::read_to_string(out.join("split.jsonl"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v["split"] == "test")
        .map(|v| v["doc_id"].as_u64().unwrap())
        .collect()
}

fn write_predictions(path: &Path, setting: &str, budget: usize, reps: usize, label: impl Fn(u64) -> String, ids: &[u64]) {
    let mut text = json!({"schema": "predictions", "version": 1}).to_string() + "\n";
    for rep in 0..reps {
        for &id in ids {
            let record = json!({"doc_id": id, "predicted_label": label(id), "setting": setting, "budget": budget, "repetition": rep});
            text += &(record.to_string() + "\n");
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn prepare_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, _) = write_corpus(tmp.path());
    let c = corpus.to_str().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&a, &["prepare", "--corpus", c, "--seed", "3"]);
    ok(&b, &["prepare", "--corpus", c, "--seed", "3"]);
    let stage = |d: &Path| read_json(&d.join("manifest.json"))["stages"]["prepare"]["artifacts"].clone();
    assert_eq!(stage(&a), stage(&b));
    assert!(stage(&a).get("split.jsonl").is_some());
}

#[test]
fn missing_corpus_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere.jsonl");
    let out = run(&tmp.path().join("out"), &["prepare", "--corpus", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nowhere.jsonl"), "{}", stderr(&out));
}

#[test]
fn invalid_values_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, _) = write_corpus(tmp.path());
    let out = run(tmp.path(), &["prepare", "--corpus", corpus.to_str().unwrap(), "--filter-fraction", "1.5"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("filter_fraction"), "{}", stderr(&out));
    let out = run(tmp.path(), &["cluster", "--algorithm", "spectral"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(tmp.path(), &["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn default_cluster_count_is_fifty() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, _) = write_corpus(tmp.path());
    let out = tmp.path().join("run");
    ok(&out, &["prepare", "--corpus", corpus.to_str().unwrap()]);
    ok(&out, &["cluster", "--restarts", "2"]);
    let text = std::fs::read_to_string(out.join("partition.jsonl")).unwrap();
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["n_clusters"], 50);
    assert_eq!(header["algorithm"], "sib");
}

#[test]
fn cluster_majority_reveals_one_label_per_cluster_at_budget_fifty() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, _) = write_corpus(tmp.path());
    let out = tmp.path().join("run");
    let flags = ["--restarts", "2", "--budgets", "50", "--reps", "2"];
    ok(&out, &[&["prepare", "--corpus", corpus.to_str().unwrap()][..], &flags].concat());
    ok(&out, &[&["cluster"][..], &flags].concat());
    ok(&out, &[&["baseline", "--model", "cluster-majority"][..], &flags].concat());
    let models = read_json(&out.join("models/cluster_majority.json"));
    let entries = models["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for entry in entries {
        let revealed = entry["model"]["revealed_ids"].as_array().unwrap();
        assert_eq!(revealed.len(), 50);
        assert!(revealed.iter().all(|ids| ids.as_array().unwrap().len() == 1));
    }
}

#[test]
fn stale_artifacts_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, _) = write_corpus(tmp.path());
    let out = tmp.path().join("run");
    ok(&out, &["prepare", "--corpus", corpus.to_str().unwrap()]);
    ok(&out, &["cluster", "--clusters", "6", "--restarts", "2"]);
    // a different cluster configuration invalidates the partition
    let refused = run(&out, &["export-pseudolabels", "--clusters", "7", "--restarts", "2"]);
    assert_eq!(refused.status.code(), Some(1));
    assert!(stderr(&refused).contains("cluster"), "{}", stderr(&refused));
    // a different seed invalidates the prepared corpus
    let refused = run(&out, &["cluster", "--seed", "99"]);
    assert_eq!(refused.status.code(), Some(1));
    assert!(stderr(&refused).contains("prepare"), "{}", stderr(&refused));
    // tampering with a recorded artifact is detected
    let partition = out.join("partition.jsonl");
    let mut text = std::fs::read_to_string(&partition).unwrap();
    text.push('\n');
    std::fs::write(&partition, text).unwrap();
    let refused = run(&out, &["export-pseudolabels", "--clusters", "6", "--restarts", "2"]);
    assert_eq!(refused.status.code(), Some(1), "{}", stderr(&refused));
}

#[test]
fn config_paths_resolve_against_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let project = tmp.path().join("project");
    std::fs::create_dir(&project).unwrap();
    write_corpus(&project);
    std::fs::write(
        project.join("experiment.toml"),
        "corpus = \"corpus.jsonl\"\nout = \"results\"\nseed = 4\nbudgets = [8]\n\n[cluster]\nn_clusters = 4\nrestarts = 2\n",
    )
    .unwrap();
    let elsewhere = tmp.path().join("elsewhere");
    std::fs::create_dir(&elsewhere).unwrap();
    let config = project.join("experiment.toml");
    for step in [&["prepare"][..], &["cluster"]] {
        let out = bin().current_dir(&elsewhere).arg("--config").arg(&config).args(step).output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let results = project.join("results");
    let saved = std::fs::read_to_string(results.join("config.toml")).unwrap();
    assert!(saved.contains("seed = 4"));
    let text = std::fs::read_to_string(results.join("partition.jsonl")).unwrap();
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["n_clusters"], 4);
    // later stages pick up the saved configuration without --config
    let out = bin().current_dir(&elsewhere).args(["--out", results.to_str().unwrap(), "export-pseudolabels"]).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(results.join("pseudolabels.jsonl").exists());
}

#[test]
fn eval_scores_and_merges_external_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, gold) = write_corpus(tmp.path());
    let out = tmp.path().join("run");
    let flags = ["--budgets", "16", "--reps", "3"];
    ok(&out, &[&["prepare", "--corpus", corpus.to_str().unwrap()][..], &flags].concat());
    ok(&out, &[&["baseline", "--model", "nb"][..], &flags].concat());
    let ids = test_ids(&out);
    let wrong = tmp.path().join("wrong.jsonl");
    write_predictions(&wrong, "wrong", 16, 3, |id| if gold[&id] == "topic0" { "topic1".into() } else { "topic0".into() }, &ids);
    let plain = tmp.path().join("plain.jsonl");
    write_predictions(&plain, "plain", 16, 3, |id| gold[&id].clone(), &ids);
    ok(&out, &[&["eval", wrong.to_str().unwrap(), plain.to_str().unwrap()][..], &flags].concat());

    let summary = read_json(&out.join("report/summary.json"));
    let mean = |setting: &str| {
        summary["groups"].as_array().unwrap().iter().find(|g| g["setting"] == setting).unwrap()["mean"].as_f64().unwrap()
    };
    assert_eq!(mean("wrong"), 0.0);
    assert_eq!(mean("plain"), 1.0);
    assert!(mean("nb_bow") > 0.0);
    let comparisons = summary["comparisons"].as_array().unwrap();
    assert_eq!(comparisons.len(), 2);
    assert!(comparisons.iter().all(|c| c["base_setting"] == "plain"));
    let csv = std::fs::read_to_string(out.join("report/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    assert!(out.join("report/plotdata.csv").exists());
}

#[test]
fn predictions_outside_the_test_split_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, gold) = write_corpus(tmp.path());
    let out = tmp.path().join("run");
    ok(&out, &["prepare", "--corpus", corpus.to_str().unwrap()]);
    let mut ids = test_ids(&out);
    let train = gold.keys().copied().find(|id| !ids.contains(id)).unwrap();
    ids.push(train);
    let bad = tmp.path().join("bad.jsonl");
    write_predictions(&bad, "bad", 16, 1, |id| gold[&id].clone(), &ids);
    let refused = run(&out, &["eval", bad.to_str().unwrap()]);
    assert_eq!(refused.status.code(), Some(1), "{}", stderr(&refused));
    assert!(stderr(&refused).contains(&train.to_string()), "{}", stderr(&refused));
}
