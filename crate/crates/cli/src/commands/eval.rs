use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use storyalign::dataio::{group_by_video, parse_annotations, parse_clips};
use storyalign::metrics::{aggregate_report_with, evaluate_video, render_table, Aggregation};
use storyalign::{ground_alignment, EvalResult, Language, LanguageReport};

use super::align::AlignmentFile;
use super::MetricArg;
use crate::failure::Failure;
use crate::provenance::{payload, Inputs, Rendered};
use crate::Globals;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Alignment file written by `align`.
    #[arg(long, value_name = "JSON")]
    pub pred: PathBuf,

    /// Gold annotation JSONL.
    #[arg(long, value_name = "JSONL")]
    pub gold: PathBuf,

    /// Clip boundary JSONL.
    #[arg(long, value_name = "JSONL")]
    pub clips: PathBuf,

    /// Pool durations and sentences across a language's videos instead of
    /// averaging per-video scores.
    #[arg(long)]
    pub pooled: bool,

    /// Metric shown by `--format table`.
    #[arg(long, value_enum, default_value_t = MetricArg::F1)]
    pub metric: MetricArg,
}

#[derive(Serialize)]
struct VideoScore {
    video_id: String,
    language: Language,
    #[serde(flatten)]
    result: EvalResult,
}

#[derive(Serialize)]
struct Output<'a> {
    aggregation: &'static str,
    videos: &'a [VideoScore],
    report: &'a LanguageReport,
}

pub fn run(args: &EvalArgs, globals: Globals) -> Result<Rendered> {
    let mut inputs = Inputs::default();
    let pred: AlignmentFile = serde_json::from_slice(&inputs.read("pred", &args.pred)?)
        .with_context(|| args.pred.display().to_string())?;
    let gold = parse_annotations(inputs.read("gold", &args.gold)?.as_slice())
        .with_context(|| args.gold.display().to_string())?;
    let clips = parse_clips(inputs.read("clips", &args.clips)?.as_slice())
        .with_context(|| args.clips.display().to_string())?;

    if gold.is_empty() {
        return Err(Failure::validation(format!(
            "{} has no annotated sentences",
            args.gold.display()
        ))
        .into());
    }
    let gold = group_by_video(&gold, |s| s.video_id.as_str());
    let clips = group_by_video(&clips, |c| c.video_id.as_str());

    let mut pred_ids = BTreeSet::new();
    for v in &pred.videos {
        if !pred_ids.insert(v.video_id.as_str()) {
            return Err(
                Failure::validation(format!("video {} predicted twice", v.video_id)).into(),
            );
        }
    }
    let gold_ids: BTreeSet<&str> = gold.keys().map(String::as_str).collect();
    if let Some(id) = pred_ids.symmetric_difference(&gold_ids).next() {
        let side = if pred_ids.contains(id) {
            "gold annotations"
        } else {
            "predictions"
        };
        return Err(Failure::validation(format!("video {id} is missing from the {side}")).into());
    }

    let mut scores: Vec<VideoScore> = pred
        .videos
        .par_iter()
        .map(|v| -> Result<VideoScore> {
            let id = &v.video_id;
            let sentences = &gold[id];
            let clips = clips
                .get(id)
                .ok_or_else(|| Failure::validation(format!("video {id} has no clip records")))?;
            v.alignment
                .validate()
                .with_context(|| format!("video {id}"))?;
            if v.alignment.sentence_count != sentences.len()
                || v.alignment.clip_count != clips.len()
            {
                return Err(Failure::validation(format!(
                    "video {id}: prediction covers {} clips x {} sentences, inputs have {} x {}",
                    v.alignment.clip_count,
                    v.alignment.sentence_count,
                    clips.len(),
                    sentences.len()
                ))
                .into());
            }
            let grounded =
                ground_alignment(&v.alignment, clips).with_context(|| format!("video {id}"))?;
            let result = evaluate_video(&grounded, sentences, clips)
                .with_context(|| format!("video {id}"))?;
            Ok(VideoScore {
                video_id: id.clone(),
                language: sentences[0].language.clone(),
                result,
            })
        })
        .collect::<Result<_>>()?;
    scores.sort_by(|a, b| a.video_id.cmp(&b.video_id));

    let mode = if args.pooled {
        Aggregation::Pooled
    } else {
        Aggregation::PerVideo
    };
    let per_video: Vec<(Language, EvalResult)> = scores
        .iter()
        .map(|s| (s.language.clone(), s.result))
        .collect();
    let report = aggregate_report_with(&per_video, mode)?;
    let aggregation = if args.pooled { "pooled" } else { "per_video" };

    let method = args.pred.file_stem().map_or("prediction".to_string(), |s| {
        s.to_string_lossy().into_owned()
    });
    let table = render_table(&[(method, report.clone())], args.metric.metric());

    Ok(Rendered {
        provenance: inputs.finish(
            "eval",
            globals.seed,
            json!({ "aggregation": aggregation, "metric": args.metric.name() }),
        ),
        payload: payload(Output {
            aggregation,
            videos: &scores,
            report: &report,
        })?,
        table,
    })
}
