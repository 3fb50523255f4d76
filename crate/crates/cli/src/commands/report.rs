use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use storyalign::metrics::{f1, render_table, LanguageSummary, MetricSummary};
use storyalign::{Language, LanguageReport};

use super::MetricArg;
use crate::failure::Failure;
use crate::provenance::{payload, Inputs, Rendered};
use crate::Globals;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `METHOD=PATH` rows, in display order. PATH is an `eval` output or a
    /// JSONL of per-language scores (`lang`, and any of `clip_accuracy`,
    /// `sentence_iou`, `f1` as fractions).
    #[arg(value_name = "METHOD=PATH", required = true)]
    pub entries: Vec<String>,

    #[arg(long, value_enum, default_value_t = MetricArg::F1)]
    pub metric: MetricArg,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreLine {
    lang: Language,
    #[serde(default)]
    videos: Option<usize>,
    clip_accuracy: Option<f64>,
    sentence_iou: Option<f64>,
    f1: Option<f64>,
}

#[derive(Deserialize)]
struct EvalFile {
    report: LanguageReport,
}

#[derive(Serialize)]
struct MethodReport<'a> {
    method: &'a str,
    report: &'a LanguageReport,
}

#[derive(Serialize)]
struct Output<'a> {
    metric: &'static str,
    methods: Vec<MethodReport<'a>>,
    table: &'a str,
}

fn parse_entry(entry: &str) -> Result<(String, PathBuf)> {
    match entry.split_once('=') {
        Some((method, path)) if !method.is_empty() && !path.is_empty() => {
            Ok((method.to_string(), PathBuf::from(path)))
        }
        _ => Err(Failure::config(format!("expected METHOD=PATH, got {entry:?}")).into()),
    }
}

/// Per-language scores; missing metrics are NaN and render as `-`.
fn parse_scores(text: &str) -> Result<LanguageReport> {
    let mut languages = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let s: ScoreLine = serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        let ca = s.clip_accuracy.unwrap_or(f64::NAN);
        let si = s.sentence_iou.unwrap_or(f64::NAN);
        let f = s.f1.unwrap_or_else(|| {
            if ca.is_nan() || si.is_nan() {
                f64::NAN
            } else {
                f1(ca, si)
            }
        });
        if ca.is_nan() && si.is_nan() && f.is_nan() {
            return Err(
                Failure::validation(format!("line {}: no scores for {}", i + 1, s.lang)).into(),
            );
        }
        languages.push(LanguageSummary {
            language: s.lang,
            videos: s.videos.unwrap_or(0),
            metrics: MetricSummary {
                clip_accuracy: ca,
                sentence_iou: si,
                f1: f,
            },
        });
    }
    languages.sort_by(|a, b| a.language.cmp(&b.language));
    Ok(LanguageReport::from_languages(languages)?)
}

fn load(bytes: &[u8]) -> Result<LanguageReport> {
    let text = std::str::from_utf8(bytes).context("input is not UTF-8")?;
    if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(text) {
        if map.contains_key("report") {
            let eval: EvalFile = serde_json::from_value(Value::Object(map))?;
            return Ok(eval.report);
        }
    }
    parse_scores(text)
}

pub fn run(args: &ReportArgs, globals: Globals) -> Result<Rendered> {
    let mut inputs = Inputs::default();
    let mut methods = Vec::new();
    for entry in &args.entries {
        let (method, path) = parse_entry(entry)?;
        let bytes = inputs.read(&method, &path)?;
        let report = load(&bytes).with_context(|| path.display().to_string())?;
        methods.push((method, report));
    }

    let table = render_table(&methods, args.metric.metric());
    let out = Output {
        metric: args.metric.name(),
        methods: methods
            .iter()
            .map(|(method, report)| MethodReport { method, report })
            .collect(),
        table: &table,
    };
    let payload = payload(out)?;
    Ok(Rendered {
        provenance: inputs.finish(
            "report",
            globals.seed,
            json!({ "metric": args.metric.name() }),
        ),
        payload,
        table,
    })
}
