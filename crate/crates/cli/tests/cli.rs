use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn storyalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_storyalign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_code(out: &Output) -> String {
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    err["error"]["code"].as_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TWO_CLIPS: &str = "{\"video_id\":\"v1\",\"idx\":0,\"start\":0,\"end\":2}\n\
                         {\"video_id\":\"v1\",\"idx\":1,\"start\":2,\"end\":6}\n";

const GOLD: &str = "{\"video_id\":\"v1\",\"lang\":\"en\",\"idx\":0,\"text\":\"a\",\"start\":0,\"end\":2}\n\
                    {\"video_id\":\"v1\",\"lang\":\"en\",\"idx\":1,\"text\":\"b\",\"start\":2,\"end\":6}\n";

#[test]
fn align_diagonal_example() {
    let dir = TempDir::new().unwrap();
    let sim = write(dir.path(), "v1.csv", "0.9,0.1\n0.1,0.9\n");
    let doc = json_stdout(&storyalign(&[
        "align",
        "--sim",
        s(&sim),
        "--drop-video",
        "0.4",
        "--drop-text",
        "0.4",
    ]));
    let video = &doc["videos"][0];
    assert_eq!(video["video_id"], "v1");
    assert!((video["total_cost"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let pairs: Vec<(u64, u64)> = video["assignments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["sentence"].as_u64().unwrap(), a["clip"].as_u64().unwrap()))
        .collect();
    assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    assert_eq!(doc["provenance"]["config"]["drop_video"], 0.4);
    assert_eq!(
        doc["provenance"]["inputs"][0]["sha256"]
            .as_str()
            .unwrap()
            .len(),
        64
    );
}

#[test]
fn no_drops_gives_plain_dtw() {
    let dir = TempDir::new().unwrap();
    let sim = write(dir.path(), "v1.csv", "0.9,-0.9,0.2\n-0.5,0.1,0.95\n");
    let doc = json_stdout(&storyalign(&["align", "--sim", s(&sim), "--no-drops"]));
    let video = &doc["videos"][0];
    assert_eq!(video["dropped_clips"], Value::Array(vec![]));
    assert_eq!(video["dropped_sentences"], Value::Array(vec![]));
    assert_eq!(video["drop_costs"]["clip"], Value::Null);
}

#[test]
fn feature_inputs_and_percentile_drops() {
    use storyalign::dataio::write_feature_matrix;
    use storyalign::{FeatureMatrix, Role};

    let dir = TempDir::new().unwrap();
    let clips = FeatureMatrix::from_rows(
        &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        Role::Clip,
    )
    .unwrap();
    let sents =
        FeatureMatrix::from_rows(&[vec![1.0, 0.1], vec![0.1, 1.0]], Role::Sentence).unwrap();
    let cp = dir.path().join("movie.clips.bin");
    let sp = dir.path().join("movie.sents.bin");
    write_feature_matrix(&cp, &clips).unwrap();
    write_feature_matrix(&sp, &sents).unwrap();
    let doc = json_stdout(&storyalign(&[
        "align",
        "--clip-feats",
        s(&cp),
        "--sent-feats",
        s(&sp),
        "--drop-percentile",
        "30",
    ]));
    assert_eq!(doc["videos"][0]["video_id"], "movie");
    assert_eq!(doc["videos"][0]["clip_count"], 3);
    assert_eq!(doc["provenance"]["config"]["drop_mode"], "percentile");
}

#[test]
fn missing_input_exits_two() {
    let out = storyalign(&["align", "--sim", "/definitely/not/here.csv", "--no-drops"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "input-not-found");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let sim = write(dir.path(), "v1.csv", "0.9,abc\n");
    let out = storyalign(&["align", "--sim", s(&sim), "--no-drops"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "parse-error");
}

#[test]
fn conflicting_drop_modes_are_rejected() {
    let dir = TempDir::new().unwrap();
    let sim = write(dir.path(), "v1.csv", "0.9\n");
    let out = storyalign(&[
        "align",
        "--sim",
        s(&sim),
        "--no-drops",
        "--drop-percentile",
        "50",
    ]);
    assert_eq!(error_code(&out), "invalid-config");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "b.csv", "0.3,0.7\n0.6,0.2\n0.1,0.8\n");
    let b = write(dir.path(), "a.csv", "0.9\n0.1\n");
    let args = [
        "align",
        "--sim",
        s(&a),
        "--sim",
        s(&b),
        "--drop-video",
        "0.5",
        "--drop-text",
        "inf",
    ];
    let first = storyalign(&args);
    let second = storyalign(&args);
    assert_eq!(first.stdout, second.stdout);
    let doc = json_stdout(&first);
    let ids: Vec<&str> = doc["videos"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["video_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["a", "b"]);
    assert_eq!(doc["provenance"]["config"]["drop_text"], Value::Null);
}

fn align_file(dir: &Path, sim: &str) -> PathBuf {
    let sim = write(dir, "v1.csv", sim);
    let out = dir.join("pred.json");
    let run = storyalign(&[
        "align",
        "--sim",
        s(&sim),
        "--drop-video",
        "1",
        "--drop-text",
        "1",
        "--out",
        s(&out),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    out
}

#[test]
fn eval_perfect_prediction() {
    let dir = TempDir::new().unwrap();
    let pred = align_file(dir.path(), "0.9,0.1\n0.1,0.9\n");
    let gold = write(dir.path(), "gold.jsonl", GOLD);
    let clips = write(dir.path(), "clips.jsonl", TWO_CLIPS);
    let doc = json_stdout(&storyalign(&[
        "eval",
        "--pred",
        s(&pred),
        "--gold",
        s(&gold),
        "--clips",
        s(&clips),
    ]));
    let v = &doc["videos"][0];
    assert_eq!(
        (
            v["clip_accuracy"].as_f64(),
            v["sentence_iou"].as_f64(),
            v["f1"].as_f64()
        ),
        (Some(1.0), Some(1.0), Some(1.0))
    );
    assert_eq!(doc["report"]["average"]["f1"], 1.0);
}

#[test]
fn eval_four_sixths_scenario() {
    let dir = TempDir::new().unwrap();
    // Both clips go to the second sentence; the first is dropped.
    let pred = align_file(dir.path(), "-1,0.95\n-1,0.95\n");
    let gold = write(dir.path(), "gold.jsonl", GOLD);
    let clips = write(dir.path(), "clips.jsonl", TWO_CLIPS);
    let out = storyalign(&[
        "eval",
        "--pred",
        s(&pred),
        "--gold",
        s(&gold),
        "--clips",
        s(&clips),
    ]);
    let doc = json_stdout(&out);
    let ca = doc["videos"][0]["clip_accuracy"].as_f64().unwrap();
    assert!((ca - 0.6667).abs() < 1e-4, "{ca}");

    let table = storyalign(&[
        "eval",
        "--pred",
        s(&pred),
        "--gold",
        s(&gold),
        "--clips",
        s(&clips),
        "--format",
        "table",
        "--metric",
        "clip-accuracy",
    ]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("66.7"), "{text}");
}

#[test]
fn eval_rejects_empty_gold_and_mismatched_videos() {
    let dir = TempDir::new().unwrap();
    let pred = align_file(dir.path(), "0.9,0.1\n0.1,0.9\n");
    let clips = write(dir.path(), "clips.jsonl", TWO_CLIPS);
    let empty = write(dir.path(), "empty.jsonl", "");
    let out = storyalign(&[
        "eval",
        "--pred",
        s(&pred),
        "--gold",
        s(&empty),
        "--clips",
        s(&clips),
    ]);
    assert_eq!(error_code(&out), "validation-error");
    assert_ne!(out.status.code(), Some(0));

    let other = write(dir.path(), "other.jsonl", &GOLD.replace("v1", "v2"));
    let out = storyalign(&[
        "eval",
        "--pred",
        s(&pred),
        "--gold",
        s(&other),
        "--clips",
        s(&clips),
    ]);
    assert_eq!(error_code(&out), "validation-error");
}

#[test]
fn weaklabel_pairs_and_contrastive_loss() {
    use storyalign::dataio::write_feature_matrix;
    use storyalign::{FeatureMatrix, Role};

    let dir = TempDir::new().unwrap();
    let clips = write(
        dir.path(),
        "clips.jsonl",
        "{\"video_id\":\"v\",\"idx\":0,\"start\":0,\"end\":2}\n\
         {\"video_id\":\"v\",\"idx\":1,\"start\":4,\"end\":7}\n\
         {\"video_id\":\"v\",\"idx\":2,\"start\":20,\"end\":22}\n",
    );
    let subs = write(
        dir.path(),
        "subs.jsonl",
        "{\"video_id\":\"v\",\"idx\":0,\"start\":0,\"end\":5,\"text\":\"one\"}\n\
         {\"video_id\":\"v\",\"idx\":1,\"start\":5,\"end\":10,\"text\":\"two\"}\n",
    );
    let doc = json_stdout(&storyalign(&[
        "weaklabel",
        "--clips",
        s(&clips),
        "--subtitles",
        s(&subs),
    ]));
    let pairs: Vec<(u64, u64)> = doc["videos"][0]["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p["clip_index"].as_u64().unwrap(),
                p["sentence_index"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    assert!(doc.get("contrastive").is_none());

    let cf = dir.path().join("c.bin");
    let sf = dir.path().join("s.bin");
    let c = FeatureMatrix::from_rows(
        &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]],
        Role::Clip,
    )
    .unwrap();
    let t = FeatureMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], Role::Sentence).unwrap();
    write_feature_matrix(&cf, &c).unwrap();
    write_feature_matrix(&sf, &t).unwrap();
    let doc = json_stdout(&storyalign(&[
        "weaklabel",
        "--clips",
        s(&clips),
        "--subtitles",
        s(&subs),
        "--clip-feats",
        s(&cf),
        "--sent-feats",
        s(&sf),
        "--negatives",
        "1",
        "--tau",
        "1",
    ]));
    let loss = doc["contrastive"]["loss"].as_f64().unwrap();
    assert!(loss.is_finite() && loss > 0.0);
}

#[test]
fn split_ten_per_language() {
    let dir = TempDir::new().unwrap();
    let mut manifest = String::new();
    for lang in ["en", "zh", "es", "fr", "pt", "hi", "ru"] {
        for i in 0..10 {
            manifest.push_str(&format!(
                "{{\"video_id\":\"{lang}{i}\",\"lang\":\"{lang}\",\"movie_name\":\"{lang} movie {i}\",\"duration\":300,\"annotated\":true}}\n"
            ));
        }
    }
    manifest.push_str("{\"video_id\":\"weak0\",\"lang\":\"en\",\"movie_name\":\"EN MOVIE 3 \",\"duration\":300}\n");
    manifest.push_str(
        "{\"video_id\":\"weak1\",\"lang\":\"en\",\"movie_name\":\"Unrelated\",\"duration\":300}\n",
    );
    let path = write(dir.path(), "manifest.jsonl", &manifest);
    let doc = json_stdout(&storyalign(&[
        "split",
        "--manifest",
        s(&path),
        "--seed",
        "7",
    ]));
    for lang in ["en", "zh", "es", "fr", "pt", "hi", "ru"] {
        let c = &doc["counts"][lang];
        assert_eq!(
            (
                c["sup_train"].as_u64(),
                c["validation"].as_u64(),
                c["test"].as_u64()
            ),
            (Some(2), Some(2), Some(6)),
            "{lang}"
        );
    }
    assert_eq!(doc["excluded"], serde_json::json!(["weak0"]));
    assert_eq!(doc["assignments"]["weak1"], "weak_train");
    assert_eq!(doc["provenance"]["seed"], 7);
}

#[test]
fn agreement_identical_files_is_full() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.jsonl", GOLD);
    let b = write(dir.path(), "b.jsonl", GOLD);
    let out = storyalign(&[
        "agreement",
        "--ann-a",
        s(&a),
        "--ann-b",
        s(&b),
        "--format",
        "table",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let average = text.lines().find(|l| l.starts_with("Average")).unwrap();
    assert!(average.trim_end().ends_with("100.0"), "{text}");
}

#[test]
fn report_average_of_two_stage_row() {
    let dir = TempDir::new().unwrap();
    let scores = [
        ("en", 26.9),
        ("zh", 37.7),
        ("es", 19.1),
        ("fr", 20.2),
        ("pt", 18.7),
        ("hi", 13.1),
        ("ru", 17.0),
    ]
    .iter()
    .map(|(lang, v)| format!("{{\"lang\":\"{lang}\",\"f1\":{}}}\n", v / 100.0))
    .collect::<String>();
    let path = write(dir.path(), "two_stage.jsonl", &scores);
    let entry = format!("CCLM-two-stage={}", s(&path));
    let out = storyalign(&["report", &entry, "--format", "table"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(
        header,
        [
            "English",
            "Chinese",
            "Spanish",
            "French",
            "Portuguese",
            "Hindi",
            "Russian",
            "Average"
        ]
    );
    let row: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(
        row,
        [
            "CCLM-two-stage",
            "26.9",
            "37.7",
            "19.1",
            "20.2",
            "18.7",
            "13.1",
            "17.0",
            "21.8"
        ]
    );
}

#[test]
fn report_reads_eval_output() {
    let dir = TempDir::new().unwrap();
    let pred = align_file(dir.path(), "0.9,0.1\n0.1,0.9\n");
    let gold = write(dir.path(), "gold.jsonl", GOLD);
    let clips = write(dir.path(), "clips.jsonl", TWO_CLIPS);
    let eval = dir.path().join("eval.json");
    let run = storyalign(&[
        "eval",
        "--pred",
        s(&pred),
        "--gold",
        s(&gold),
        "--clips",
        s(&clips),
        "--out",
        s(&eval),
    ]);
    assert!(run.status.success());
    let doc = json_stdout(&storyalign(&["report", &format!("ours={}", s(&eval))]));
    assert_eq!(doc["methods"][0]["method"], "ours");
    assert!(doc["table"].as_str().unwrap().contains("100.0"));
}
