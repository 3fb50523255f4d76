use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use storyalign::dataio::{decode_features, parse_similarity_csv};
use storyalign::sim::cosine_similarity;
use storyalign::{
    drop_dtw_align, dtw_align, percentile_drop_costs, to_cost, Alignment, DropCosts, Role,
    SimilarityMatrix,
};

use super::grid;
use crate::failure::Failure;
use crate::provenance::{finite_or_null, payload, video_id_from_path, Inputs, Rendered};
use crate::Globals;

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Similarity CSV for one video, rows = clips (repeatable). The video id
    /// is the file name up to its first dot.
    #[arg(long = "sim", value_name = "CSV")]
    pub sim: Vec<PathBuf>,

    /// Clip feature binary (repeatable, paired in order with --sent-feats).
    #[arg(long, value_name = "BIN")]
    pub clip_feats: Vec<PathBuf>,

    /// Sentence feature binary (repeatable).
    #[arg(long, value_name = "BIN")]
    pub sent_feats: Vec<PathBuf>,

    /// Cost of leaving a clip unmatched; `inf` forbids it.
    #[arg(long, value_name = "COST")]
    pub drop_video: Option<f64>,

    /// Cost of leaving a sentence unmatched; `inf` forbids it.
    #[arg(long, value_name = "COST")]
    pub drop_text: Option<f64>,

    /// Set both drop costs to this percentile of each video's match costs.
    #[arg(long, value_name = "P")]
    pub drop_percentile: Option<f64>,

    /// Plain DTW: every clip and sentence must be matched.
    #[arg(long)]
    pub no_drops: bool,
}

#[derive(Debug, Clone, Copy)]
enum DropMode {
    Fixed(DropCosts),
    Percentile(f64),
    Disabled,
}

impl DropMode {
    fn from_args(args: &AlignArgs) -> Result<Self> {
        let fixed = args.drop_video.is_some() || args.drop_text.is_some();
        let chosen = [fixed, args.drop_percentile.is_some(), args.no_drops]
            .iter()
            .filter(|&&b| b)
            .count();
        if chosen != 1 {
            return Err(Failure::config(
                "choose exactly one drop mode: --drop-video with --drop-text, --drop-percentile, or --no-drops",
            )
            .into());
        }
        if let Some(p) = args.drop_percentile {
            return Ok(DropMode::Percentile(p));
        }
        if args.no_drops {
            return Ok(DropMode::Disabled);
        }
        match (args.drop_video, args.drop_text) {
            (Some(clip), Some(sentence)) => DropCosts::new(clip, sentence)
                .map(DropMode::Fixed)
                .map_err(|e| Failure::config(e.to_string()).into()),
            _ => Err(Failure::config("--drop-video and --drop-text must be given together").into()),
        }
    }

    fn echo(&self) -> serde_json::Value {
        match self {
            DropMode::Fixed(d) => json!({
                "drop_mode": "fixed",
                "drop_video": finite_or_null(d.clip),
                "drop_text": finite_or_null(d.sentence),
            }),
            DropMode::Percentile(p) => json!({ "drop_mode": "percentile", "drop_percentile": p }),
            DropMode::Disabled => json!({ "drop_mode": "none" }),
        }
    }
}

/// Drop costs as written to alignment files; `null` means +inf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropCostsRecord {
    pub clip: Option<f64>,
    pub sentence: Option<f64>,
}

/// One video's alignment as stored in `align` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoAlignment {
    pub video_id: String,
    #[serde(default)]
    pub drop_costs: Option<DropCostsRecord>,
    #[serde(flatten)]
    pub alignment: Alignment,
}

/// The part of an `align` output that `eval` consumes.
#[derive(Debug, Deserialize)]
pub struct AlignmentFile {
    pub videos: Vec<VideoAlignment>,
}

#[derive(Serialize)]
struct Output<'a> {
    videos: &'a [VideoAlignment],
}

fn align_one(video_id: String, sim: &SimilarityMatrix, mode: DropMode) -> Result<VideoAlignment> {
    let (alignment, drops) = match mode {
        DropMode::Disabled => (dtw_align(sim), DropCosts::disabled()),
        DropMode::Fixed(d) => (drop_dtw_align(sim, d), d),
        DropMode::Percentile(p) => {
            let d = percentile_drop_costs(&to_cost(sim), p)
                .with_context(|| format!("video {video_id}"))?;
            (drop_dtw_align(sim, d), d)
        }
    };
    Ok(VideoAlignment {
        video_id,
        drop_costs: Some(DropCostsRecord {
            clip: finite_or_null(drops.clip),
            sentence: finite_or_null(drops.sentence),
        }),
        alignment,
    })
}

pub fn run(args: &AlignArgs, globals: Globals) -> Result<Rendered> {
    let mode = DropMode::from_args(args)?;
    if args.sim.is_empty() == args.clip_feats.is_empty() {
        return Err(
            Failure::config("give either --sim files or --clip-feats/--sent-feats pairs").into(),
        );
    }
    if args.clip_feats.len() != args.sent_feats.len() {
        return Err(Failure::config(format!(
            "{} --clip-feats but {} --sent-feats",
            args.clip_feats.len(),
            args.sent_feats.len()
        ))
        .into());
    }

    let mut inputs = Inputs::default();
    let mut matrices = Vec::new();
    for path in &args.sim {
        let bytes = inputs.read("sim", path)?;
        let sim =
            parse_similarity_csv(bytes.as_slice()).with_context(|| path.display().to_string())?;
        matrices.push((video_id_from_path(path)?, sim));
    }
    for (clip_path, sent_path) in args.clip_feats.iter().zip(&args.sent_feats) {
        let clips = decode_features(&inputs.read("clip-feats", clip_path)?, Role::Clip)
            .with_context(|| clip_path.display().to_string())?;
        let sentences = decode_features(&inputs.read("sent-feats", sent_path)?, Role::Sentence)
            .with_context(|| sent_path.display().to_string())?;
        let sim = cosine_similarity(&clips, &sentences)
            .with_context(|| format!("{} x {}", clip_path.display(), sent_path.display()))?;
        matrices.push((video_id_from_path(clip_path)?, sim));
    }

    let mut seen = BTreeSet::new();
    if let Some((dup, _)) = matrices.iter().find(|(id, _)| !seen.insert(id.clone())) {
        return Err(Failure::config(format!("video id {dup} appears twice")).into());
    }

    let mut videos: Vec<VideoAlignment> = matrices
        .into_par_iter()
        .map(|(id, sim)| align_one(id, &sim, mode))
        .collect::<Result<_>>()?;
    videos.sort_by(|a, b| a.video_id.cmp(&b.video_id));

    let mut rows = vec![vec![
        "video".to_string(),
        "clips".into(),
        "sentences".into(),
        "pairs".into(),
        "dropped clips".into(),
        "dropped sentences".into(),
        "cost".into(),
    ]];
    for v in &videos {
        let a = &v.alignment;
        rows.push(vec![
            v.video_id.clone(),
            a.clip_count.to_string(),
            a.sentence_count.to_string(),
            a.assignments.len().to_string(),
            a.dropped_clips.len().to_string(),
            a.dropped_sentences.len().to_string(),
            format!("{:.4}", a.total_cost),
        ]);
    }

    Ok(Rendered {
        provenance: inputs.finish("align", globals.seed, mode.echo()),
        payload: payload(Output { videos: &videos })?,
        table: grid(&rows),
    })
}
