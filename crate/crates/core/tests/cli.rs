mod common;

use std::fs;
use std::process::Command;

use common::{checksums, esco_fixture, p, run, run_ok};
use taxoprompt::datagen::PromptExample;
use taxoprompt::jsonl::read_jsonl;
use taxoprompt::score::{PredictionRecord, ScoreReport};
use tempfile::tempdir;

fn ingest_fixture(dir: &std::path::Path) -> std::path::PathBuf {
    let tax = dir.join("tax");
    run_ok(&["ingest", "--esco-dir", p(&esco_fixture()), "--out", p(&tax)]);
    tax
}

#[test]
fn ingest_writes_canonical_files() {
    let d = tempdir().unwrap();
    let tax = ingest_fixture(d.path());
    let entities = fs::read_to_string(tax.join("entities.jsonl")).unwrap();
    let relations = fs::read_to_string(tax.join("relations.jsonl")).unwrap();
    assert_eq!(entities.lines().count(), 10);
    assert_eq!(relations.lines().count(), 12);
    assert!(tax.join("validation_report.json").is_file());
    assert!(!entities.contains('\r'));
}

#[test]
fn ingest_stats_only_prints_table() {
    let d = tempdir().unwrap();
    let out = d.path().join("nothing");
    let o = run_ok(&["ingest", "--esco-dir", p(&esco_fixture()), "--stats-only", "--out", p(&out)]);
    let text = String::from_utf8(o.stdout).unwrap();
    for (row, n) in [
        ("# skills", 6),
        ("# occupations", 4),
        ("# essential", 6),
        ("# optional", 6),
        ("# altlabels", 16),
        ("# descriptions", 10),
    ] {
        let line = text.lines().find(|l| l.starts_with(row)).unwrap();
        assert!(line.trim_end().ends_with(&n.to_string()), "{line}");
    }
    assert!(!out.exists());
}

#[test]
fn ingest_missing_directory_is_usage_error() {
    let d = tempdir().unwrap();
    let o = run(&["ingest", "--esco-dir", "/definitely/not/here", "--out", p(d.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MissingFile"));
}

#[test]
fn ingest_validation_failure_exits_nonzero() {
    let d = tempdir().unwrap();
    let ents = d.path().join("e.jsonl");
    let rels = d.path().join("r.jsonl");
    fs::write(&ents, "{\"id\":\"s1\",\"kind\":\"Skill\",\"preferred_label\":\"x\"}\n").unwrap();
    fs::write(&rels, "{\"subject\":\"s1\",\"predicate\":\"isEssentialFor\",\"object\":\"o9\"}\n").unwrap();
    let o = run(&["ingest", "--entities", p(&ents), "--relations", p(&rels), "--out", p(d.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ValidationFailed"));
    let o = run(&[
        "ingest",
        "--entities",
        p(&ents),
        "--relations",
        p(&rels),
        "--permissive",
        "--out",
        p(&d.path().join("ok")),
    ]);
    assert!(o.status.success());
}

#[test]
fn column_map_override() {
    let d = tempdir().unwrap();
    let esco = d.path().join("esco");
    fs::create_dir(&esco).unwrap();
    for f in ["occupations_en.csv", "skills_en.csv", "occupationSkillRelations_en.csv"] {
        let text = fs::read_to_string(esco_fixture().join(f)).unwrap();
        fs::write(esco.join(f), text.replace("preferredLabel", "prefLabel")).unwrap();
    }
    let o = run(&["ingest", "--esco-dir", p(&esco), "--stats-only"]);
    assert_eq!(o.status.code(), Some(2));
    let map = d.path().join("map.json");
    fs::write(&map, r#"{"preferred_label": "prefLabel"}"#).unwrap();
    run_ok(&["ingest", "--esco-dir", p(&esco), "--column-map", p(&map), "--stats-only"]);
    fs::write(&map, r#"{"preferred_labl": "prefLabel"}"#).unwrap();
    let o = run(&["ingest", "--esco-dir", p(&esco), "--column-map", p(&map), "--stats-only"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generate_all_is_reproducible() {
    let d = tempdir().unwrap();
    let tax = ingest_fixture(d.path());
    let a = d.path().join("a");
    let b = d.path().join("b");
    for out in [&a, &b] {
        run_ok(&["generate", "--taxonomy", p(&tax), "--task", "all", "--seed", "7", "--out", p(out)]);
    }
    let ca = checksums(&a);
    assert_eq!(
        ca.keys().cloned().collect::<Vec<_>>(),
        vec!["ecrc.jsonl", "el.jsonl", "qa.jsonl", "stats.json"]
    );
    assert_eq!(ca, checksums(&b));

    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("stats.json")).unwrap()).unwrap();
    let ecrc = &stats["tasks"]["ecrc"]["by_class"];
    assert_eq!(ecrc["isEssentialFor"], 6);
    assert_eq!(ecrc["isOptionalFor"], 6);
    assert_eq!(stats["tasks"]["ecrc"]["total"], 12);

    let c = d.path().join("c");
    run_ok(&["generate", "--taxonomy", p(&tax), "--task", "all", "--seed", "8", "--out", p(&c)]);
    assert_ne!(checksums(&c)["el.jsonl"], ca["el.jsonl"]);
}

#[test]
fn generate_single_task_and_options() {
    let d = tempdir().unwrap();
    let tax = ingest_fixture(d.path());
    let out = d.path().join("g");
    run_ok(&[
        "generate",
        "--taxonomy",
        p(&tax),
        "--task",
        "qa",
        "--seed",
        "1",
        "--qa-positive-count",
        "4",
        "--out",
        p(&out),
    ]);
    assert!(!out.join("ecrc.jsonl").exists());
    let qa: Vec<PromptExample> = read_jsonl(&out.join("qa.jsonl")).unwrap();
    assert_eq!(qa.len(), 8);

    let o = run(&["generate", "--taxonomy", p(&tax), "--task", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let d = tempdir().unwrap();
    let tax = ingest_fixture(d.path());
    let out = d.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_taxoprompt"))
        .args(["generate", "--taxonomy", p(&tax), "--task", "ecrc"])
        .env(taxoprompt::cli::OUT_ENV, &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("ecrc.jsonl").is_file());
}

fn generated(d: &std::path::Path) -> std::path::PathBuf {
    let tax = ingest_fixture(d);
    let data = d.join("data");
    run_ok(&["generate", "--taxonomy", p(&tax), "--seed", "7", "--out", p(&data)]);
    data
}

#[test]
fn split_rejects_zero_k() {
    let d = tempdir().unwrap();
    let data = generated(d.path());
    let o = run(&["split", "--task", "ecrc", "--k", "0", "--data-dir", p(&data)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["split", "--task", "ecrc", "--data-dir", p(&data)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn split_writes_bundle_and_report() {
    let d = tempdir().unwrap();
    let data = generated(d.path());
    let out = d.path().join("split");
    run_ok(&[
        "split", "--task", "ecrc", "--k", "1", "--seed", "3", "--data-dir", p(&data), "--out", p(&out),
    ]);
    let train: Vec<PromptExample> = read_jsonl(&out.join("train_k.jsonl")).unwrap();
    let dev: Vec<PromptExample> = read_jsonl(&out.join("dev_k.jsonl")).unwrap();
    assert_eq!((train.len(), dev.len()), (2, 2));
    for i in 1..=9 {
        assert!(out.join(format!("eval_set_{i}.jsonl")).is_file());
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("split_report.json")).unwrap()).unwrap();
    let before = report["pool_before_decontamination"].as_u64().unwrap();
    let removed = report["removed_by_decontamination"].as_u64().unwrap();
    let pool = report["eval_pool_size"].as_u64().unwrap();
    assert_eq!(before, 12 - 4);
    assert_eq!(before - removed, pool);

    // the removal count equals a brute-force entity-overlap count
    let all: Vec<PromptExample> = read_jsonl(&data.join("ecrc.jsonl")).unwrap();
    let seen: std::collections::BTreeSet<String> = train
        .iter()
        .chain(&dev)
        .flat_map(|e| [e.provenance.subject.clone(), e.provenance.object.clone()])
        .collect();
    let chosen: std::collections::BTreeSet<&str> =
        train.iter().chain(&dev).map(|e| e.example_id.as_str()).collect();
    let expect_removed = all
        .iter()
        .filter(|e| !chosen.contains(e.example_id.as_str()))
        .filter(|e| seen.contains(&e.provenance.subject) || seen.contains(&e.provenance.object))
        .count();
    assert_eq!(removed as usize, expect_removed);
}

#[test]
fn zero_shot_split_exports_eval_sets_only() {
    let d = tempdir().unwrap();
    let data = generated(d.path());
    let out = d.path().join("zs");
    run_ok(&[
        "split", "--task", "qa", "--zero-shot", "--eval-size", "5", "--data-dir", p(&data), "--out", p(&out),
    ]);
    assert!(!out.join("train_k.jsonl").exists());
    let set: Vec<PromptExample> = read_jsonl(&out.join("eval_set_9.jsonl")).unwrap();
    assert_eq!(set.len(), 5);
}

fn qa_split(d: &std::path::Path) -> std::path::PathBuf {
    let data = generated(d);
    let out = d.join("qsplit");
    run_ok(&[
        "split", "--task", "qa", "--k", "2", "--seed", "3", "--eval-size", "12", "--data-dir", p(&data), "--out",
        p(&out),
    ]);
    out
}

#[test]
fn mock_policies_and_scores() {
    let d = tempdir().unwrap();
    let split = qa_split(d.path());

    let gold = d.path().join("gold");
    run_ok(&["mock-predict", "--input", p(&split), "--policy", "gold_oracle", "--out", p(&gold)]);
    let o = run_ok(&["score", "--eval-dir", p(&split), "--pred-dir", p(&gold)]);
    let report: ScoreReport =
        serde_json::from_str(&fs::read_to_string(gold.join("score_report.json")).unwrap()).unwrap();
    assert_eq!(report.aggregate.combined.mean, 1.0);
    assert_eq!(report.aggregate.combined.std, 0.0);
    assert_eq!(report.runs.len(), 9);
    assert_eq!(report.metadata["k"], 2);
    assert!(String::from_utf8(o.stdout).unwrap().contains("combined"));

    // eval sets hold the 6 + 6 remaining QA examples: balanced binary
    let maj = d.path().join("maj");
    run_ok(&["mock-predict", "--input", p(&split), "--policy", "majority_class", "--out", p(&maj)]);
    run_ok(&["score", "--eval-dir", p(&split), "--pred-dir", p(&maj)]);
    let report: ScoreReport =
        serde_json::from_str(&fs::read_to_string(maj.join("score_report.json")).unwrap()).unwrap();
    assert!((report.aggregate.combined.mean - 1.0 / 3.0).abs() < 1e-9);

    let r1 = d.path().join("r1");
    let r2 = d.path().join("r2");
    for r in [&r1, &r2] {
        run_ok(&["mock-predict", "--input", p(&split), "--policy", "uniform_random", "--seed", "4", "--out", p(r)]);
    }
    assert_eq!(checksums(&r1), checksums(&r2));
    let preds: Vec<PredictionRecord> = read_jsonl(&r1.join("predictions_1.jsonl")).unwrap();
    assert_eq!(preds.len(), 12);

    let o = run(&["mock-predict", "--input", p(&split), "--policy", "psychic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mock_predict_single_file() {
    let d = tempdir().unwrap();
    let split = qa_split(d.path());
    let out = d.path().join("one");
    run_ok(&[
        "mock-predict",
        "--input",
        p(&split.join("eval_set_3.jsonl")),
        "--out",
        p(&out),
    ]);
    assert!(out.join("predictions_3.jsonl").is_file());
}

#[test]
fn score_missing_prediction_file() {
    let d = tempdir().unwrap();
    let split = qa_split(d.path());
    let pred = d.path().join("pred");
    run_ok(&["mock-predict", "--input", p(&split), "--out", p(&pred)]);
    fs::remove_file(pred.join("predictions_4.jsonl")).unwrap();
    let o = run(&["score", "--eval-dir", p(&split), "--pred-dir", p(&pred)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MissingPrediction"));
}

#[test]
fn score_rejects_bad_prediction_content() {
    let d = tempdir().unwrap();
    let split = qa_split(d.path());
    let pred = d.path().join("pred");
    run_ok(&["mock-predict", "--input", p(&split), "--out", p(&pred)]);
    let f = pred.join("predictions_2.jsonl");
    let text = fs::read_to_string(&f).unwrap();
    fs::write(&f, text.replacen("\"yes\"", "\"perhaps\"", 1).replacen("\"no\"", "\"perhaps\"", 1)).unwrap();
    let o = run(&["score", "--eval-dir", p(&split), "--pred-dir", p(&pred)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("InvalidClass"));
}

fn experiment_config(d: &std::path::Path, mode: &str, extra: &str) -> std::path::PathBuf {
    let cfg = d.join(format!("{mode}.json"));
    let text = format!(
        r#"{{"schema_version": 1, "mode": "{mode}",
            "taxonomy": {{"format": "esco", "dir": "{}"}},
            "tasks": ["ecrc", "el", "qa"],
            "generation": {{"seed": 7}},
            "split": {{"seed": 3, "k": 1, "eval_size": 4}},
            "output_dir": "out_{mode}",
            "mock_policy": {{"policy": "gold_oracle"}}{extra}}}"#,
        p(&esco_fixture())
    );
    fs::write(&cfg, text).unwrap();
    cfg
}

#[test]
fn run_experiment_modes() {
    let d = tempdir().unwrap();
    for mode in ["zero_shot", "k_shot", "multitask"] {
        let cfg = experiment_config(d.path(), mode, "");
        run_ok(&["run-experiment", "--config", p(&cfg)]);
        let out = d.path().join(format!("out_{mode}"));
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("experiment.json")).unwrap()).unwrap();
        assert_eq!(manifest["evaluations"].as_array().unwrap().len(), 3);
        for e in manifest["evaluations"].as_array().unwrap() {
            assert_eq!(e["score"]["mean"], 1.0);
        }
        let n_train = manifest["training_sets"].as_array().unwrap().len();
        match mode {
            "zero_shot" => {
                assert_eq!(n_train, 0);
                assert!(!out.join("qa/zero_shot/train_k.jsonl").exists());
            }
            "k_shot" => assert_eq!(n_train, 3),
            _ => {
                assert_eq!(n_train, 7);
                let all = &manifest["training_sets"][6];
                assert_eq!(all["name"], "ecrc+el+qa");
                // 2 classes × k = 1 per task
                assert_eq!(all["train_size"], 6);
            }
        }
    }
}

#[test]
fn run_experiment_config_checks() {
    let d = tempdir().unwrap();
    let cfg = experiment_config(d.path(), "k_shot", r#", "surprise": true"#);
    let o = run(&["run-experiment", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("surprise"));
    run_ok(&["run-experiment", "--config", p(&cfg), "--lenient"]);

    let cfg = d.path().join("nok.json");
    let text = fs::read_to_string(experiment_config(d.path(), "k_shot", ""))
        .unwrap()
        .replace(r#""k": 1, "#, "");
    fs::write(&cfg, text).unwrap();
    let o = run(&["run-experiment", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = d.path().join("v2.json");
    let text = fs::read_to_string(experiment_config(d.path(), "k_shot", ""))
        .unwrap()
        .replace(r#""schema_version": 1"#, r#""schema_version": 2"#);
    fs::write(&cfg, text).unwrap();
    assert_eq!(run(&["run-experiment", "--config", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn presets_export_round_trips() {
    let d = tempdir().unwrap();
    let dir = d.path().join("presets");
    run_ok(&["presets", "--out", p(&dir)]);
    assert!(dir.join("linking.json").is_file());
    let tax = ingest_fixture(d.path());
    let a = d.path().join("a");
    let b = d.path().join("b");
    run_ok(&["generate", "--taxonomy", p(&tax), "--out", p(&a)]);
    run_ok(&["generate", "--taxonomy", p(&tax), "--presets", p(&dir), "--out", p(&b)]);
    assert_eq!(checksums(&a), checksums(&b));
}
