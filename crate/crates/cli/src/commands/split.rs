use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::json;
use storyalign::dataio::{dedup_split, parse_manifests, Split, SplitAssignment, SplitRatios};

use super::grid;
use crate::provenance::{payload, Inputs, Rendered};
use crate::Globals;

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Video manifest JSONL; annotated videos carry `"annotated": true`.
    #[arg(long, value_name = "JSONL")]
    pub manifest: PathBuf,
}

const SPLITS: [Split; 4] = [
    Split::WeakTrain,
    Split::SupTrain,
    Split::Validation,
    Split::Test,
];

fn split_name(split: Split) -> &'static str {
    match split {
        Split::WeakTrain => "weak_train",
        Split::SupTrain => "sup_train",
        Split::Validation => "validation",
        Split::Test => "test",
    }
}

#[derive(Serialize)]
struct Output<'a> {
    counts: BTreeMap<String, BTreeMap<Split, usize>>,
    #[serde(flatten)]
    split: &'a SplitAssignment,
}

pub fn run(args: &SplitArgs, globals: Globals) -> Result<Rendered> {
    let mut inputs = Inputs::default();
    let (manifests, annotated) =
        parse_manifests(inputs.read("manifest", &args.manifest)?.as_slice())
            .with_context(|| args.manifest.display().to_string())?;
    let ratios = SplitRatios::default();
    let split = dedup_split(&manifests, &annotated, ratios, globals.seed)?;

    let mut counts: BTreeMap<String, BTreeMap<Split, usize>> = BTreeMap::new();
    for m in &manifests {
        if let Some(&s) = split.assignments.get(&m.video_id) {
            *counts
                .entry(m.language.tag().to_string())
                .or_default()
                .entry(s)
                .or_default() += 1;
        }
    }

    let mut rows = vec![std::iter::once("language".to_string())
        .chain(SPLITS.iter().map(|&s| split_name(s).to_string()))
        .collect::<Vec<_>>()];
    for (lang, by_split) in &counts {
        let mut row = vec![lang.clone()];
        row.extend(
            SPLITS
                .iter()
                .map(|s| by_split.get(s).copied().unwrap_or(0).to_string()),
        );
        rows.push(row);
    }
    let mut table = grid(&rows);
    table.push_str(&format!("excluded: {}\n", split.excluded.len()));

    let config = json!({
        "ratios": { "sup_train": ratios.sup_train, "validation": ratios.validation, "test": ratios.test },
    });
    Ok(Rendered {
        provenance: inputs.finish("split", globals.seed, config),
        payload: payload(Output {
            counts,
            split: &split,
        })?,
        table,
    })
}
