use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::json;
use storyalign::dataio::{group_by_video, parse_annotations};
use storyalign::metrics::{agreement_iou, percent};
use storyalign::Language;

use super::grid;
use crate::failure::Failure;
use crate::provenance::{payload, Inputs, Rendered};
use crate::Globals;

#[derive(Debug, Args)]
pub struct AgreementArgs {
    /// First annotation JSONL.
    #[arg(long, value_name = "JSONL")]
    pub ann_a: PathBuf,

    /// Second annotation JSONL over the same sentences.
    #[arg(long, value_name = "JSONL")]
    pub ann_b: PathBuf,
}

#[derive(Serialize)]
struct VideoAgreement {
    video_id: String,
    language: Language,
    iou: f64,
}

#[derive(Serialize)]
struct LanguageAgreement {
    language: Language,
    videos: usize,
    iou: f64,
}

#[derive(Serialize)]
struct Output<'a> {
    videos: &'a [VideoAgreement],
    languages: &'a [LanguageAgreement],
    /// Unweighted mean over languages.
    average: f64,
}

pub fn run(args: &AgreementArgs, globals: Globals) -> Result<Rendered> {
    let mut inputs = Inputs::default();
    let a = parse_annotations(inputs.read("ann-a", &args.ann_a)?.as_slice())
        .with_context(|| args.ann_a.display().to_string())?;
    let b = parse_annotations(inputs.read("ann-b", &args.ann_b)?.as_slice())
        .with_context(|| args.ann_b.display().to_string())?;
    if a.is_empty() {
        return Err(
            Failure::validation(format!("{} has no sentences", args.ann_a.display())).into(),
        );
    }

    let a = group_by_video(&a, |s| s.video_id.as_str());
    let b = group_by_video(&b, |s| s.video_id.as_str());
    let ids_a: BTreeSet<&String> = a.keys().collect();
    let ids_b: BTreeSet<&String> = b.keys().collect();
    if let Some(id) = ids_a.symmetric_difference(&ids_b).next() {
        return Err(
            Failure::validation(format!("video {id} is annotated in only one file")).into(),
        );
    }

    let mut videos = Vec::new();
    for (id, sa) in &a {
        let iou = agreement_iou(sa, &b[id]).with_context(|| format!("video {id}"))?;
        videos.push(VideoAgreement {
            video_id: id.clone(),
            language: sa[0].language.clone(),
            iou,
        });
    }

    let mut by_language: BTreeMap<&Language, Vec<f64>> = BTreeMap::new();
    for v in &videos {
        by_language.entry(&v.language).or_default().push(v.iou);
    }
    let languages: Vec<LanguageAgreement> = by_language
        .into_iter()
        .map(|(lang, ious)| LanguageAgreement {
            language: lang.clone(),
            videos: ious.len(),
            iou: ious.iter().sum::<f64>() / ious.len() as f64,
        })
        .collect();
    let average = languages.iter().map(|l| l.iou).sum::<f64>() / languages.len() as f64;

    let mut rows = vec![vec![
        "language".to_string(),
        "videos".into(),
        "IoU %".into(),
    ]];
    for l in &languages {
        rows.push(vec![
            l.language.name().to_string(),
            l.videos.to_string(),
            percent(l.iou),
        ]);
    }
    rows.push(vec![
        "Average".to_string(),
        videos.len().to_string(),
        percent(average),
    ]);

    Ok(Rendered {
        provenance: inputs.finish("agreement", globals.seed, json!({})),
        payload: payload(Output {
            videos: &videos,
            languages: &languages,
            average,
        })?,
        table: grid(&rows),
    })
}
