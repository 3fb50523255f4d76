use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use storyalign::dataio::{
    decode_features, group_by_video, parse_clips, parse_subtitles, weak_supervise, WeakPair,
};
use storyalign::sim::{
    infonce_loss, sample_negatives, SamplingScope, VideoMembership, DEFAULT_TEMPERATURE,
};
use storyalign::{ContrastiveBatch, Role};

use super::grid;
use crate::failure::Failure;
use crate::provenance::{payload, Inputs, Rendered};
use crate::Globals;

#[derive(Debug, Args)]
pub struct WeaklabelArgs {
    /// Clip boundary JSONL.
    #[arg(long, value_name = "JSONL")]
    pub clips: PathBuf,

    /// Timed subtitle segment JSONL.
    #[arg(long, value_name = "JSONL")]
    pub subtitles: PathBuf,

    /// Clip features, one row per line of --clips. With --sent-feats, also
    /// reports the contrastive loss of the weak pairs.
    #[arg(long, value_name = "BIN", requires = "sent_feats")]
    pub clip_feats: Option<PathBuf>,

    /// Sentence features, one row per line of --subtitles.
    #[arg(long, value_name = "BIN", requires = "clip_feats")]
    pub sent_feats: Option<PathBuf>,

    /// Softmax temperature for the contrastive loss.
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
    pub tau: f64,

    /// Negatives drawn per anchor from the same video.
    #[arg(long, default_value_t = 4)]
    pub negatives: usize,
}

#[derive(Serialize)]
struct VideoPairs {
    video_id: String,
    pairs: Vec<WeakPair>,
}

#[derive(Serialize)]
struct Contrastive {
    temperature: f64,
    negatives_per_anchor: usize,
    positives: usize,
    loss: f64,
}

#[derive(Serialize)]
struct Output<'a> {
    videos: &'a [VideoPairs],
    #[serde(skip_serializing_if = "Option::is_none")]
    contrastive: Option<Contrastive>,
}

pub fn run(args: &WeaklabelArgs, globals: Globals) -> Result<Rendered> {
    let mut inputs = Inputs::default();
    let clips = parse_clips(inputs.read("clips", &args.clips)?.as_slice())
        .with_context(|| args.clips.display().to_string())?;
    let segments = parse_subtitles(inputs.read("subtitles", &args.subtitles)?.as_slice())
        .with_context(|| args.subtitles.display().to_string())?;

    let clips_by_video = group_by_video(&clips, |c| c.video_id.as_str());
    let segments_by_video = group_by_video(&segments, |s| s.video_id.as_str());
    let ids: BTreeSet<&String> = clips_by_video
        .keys()
        .chain(segments_by_video.keys())
        .collect();

    let videos: Vec<VideoPairs> = ids
        .into_par_iter()
        .map(|id| -> Result<VideoPairs> {
            let c = clips_by_video.get(id).map_or(&[][..], Vec::as_slice);
            let s = segments_by_video.get(id).map_or(&[][..], Vec::as_slice);
            let pairs = weak_supervise(c, s).with_context(|| format!("video {id}"))?;
            Ok(VideoPairs {
                video_id: id.clone(),
                pairs,
            })
        })
        .collect::<Result<_>>()?;

    let contrastive = match (&args.clip_feats, &args.sent_feats) {
        (Some(clip_path), Some(sent_path)) => {
            let v = decode_features(&inputs.read("clip-feats", clip_path)?, Role::Clip)
                .with_context(|| clip_path.display().to_string())?;
            let t = decode_features(&inputs.read("sent-feats", sent_path)?, Role::Sentence)
                .with_context(|| sent_path.display().to_string())?;
            if v.count() != clips.len() || t.count() != segments.len() {
                return Err(Failure::validation(format!(
                    "features have {} clip and {} sentence rows, inputs have {} clips and {} segments",
                    v.count(),
                    t.count(),
                    clips.len(),
                    segments.len()
                ))
                .into());
            }

            // Feature rows follow file order, which may interleave videos.
            let clip_row: BTreeMap<(&str, usize), usize> = clips
                .iter()
                .enumerate()
                .map(|(row, c)| ((c.video_id.as_str(), c.clip_index), row))
                .collect();
            let sentence_row: BTreeMap<(&str, usize), usize> = segments
                .iter()
                .enumerate()
                .map(|(row, s)| ((s.video_id.as_str(), s.sentence_index), row))
                .collect();
            let positives: Vec<(usize, usize)> = videos
                .iter()
                .flat_map(|v| {
                    let id = v.video_id.as_str();
                    let (clip_row, sentence_row) = (&clip_row, &sentence_row);
                    v.pairs.iter().map(move |p| {
                        (
                            clip_row[&(id, p.clip_index)],
                            sentence_row[&(id, p.sentence_index)],
                        )
                    })
                })
                .collect();
            if positives.is_empty() {
                return Err(Failure::validation("no weak pairs to score").into());
            }

            let batch = ContrastiveBatch {
                positives,
                negatives_per_anchor: args.negatives,
                temperature: args.tau,
                rng_seed: globals.seed,
            };
            let membership = VideoMembership {
                clip_video: clips.iter().map(|c| c.video_id.clone()).collect(),
                sentence_video: segments.iter().map(|s| s.video_id.clone()).collect(),
            };
            let candidates = sample_negatives(&batch, &membership, SamplingScope::SameVideo)?;
            let loss = infonce_loss(&v, &t, &batch, &candidates)?;
            Some(Contrastive {
                temperature: args.tau,
                negatives_per_anchor: args.negatives,
                positives: batch.positives.len(),
                loss,
            })
        }
        _ => None,
    };

    let mut rows = vec![vec!["video".to_string(), "pairs".into()]];
    for v in &videos {
        rows.push(vec![v.video_id.clone(), v.pairs.len().to_string()]);
    }
    let mut table = grid(&rows);
    if let Some(c) = &contrastive {
        table.push_str(&format!(
            "contrastive loss {:.6} over {} pairs (tau {}, {} negatives)\n",
            c.loss, c.positives, c.temperature, c.negatives_per_anchor
        ));
    }

    let config = json!({
        "tau": args.tau,
        "negatives": args.negatives,
        "contrastive": contrastive.is_some(),
    });
    Ok(Rendered {
        provenance: inputs.finish("weaklabel", globals.seed, config),
        payload: payload(Output {
            videos: &videos,
            contrastive,
        })?,
        table,
    })
}
