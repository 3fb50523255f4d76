//! File formats and dataset engineering.
//!
//! | format            | reader                   | writer                    |
//! |-------------------|--------------------------|---------------------------|
//! | annotation JSONL  | [`parse_annotations`]    | [`write_annotations`]     |
//! | clip JSONL        | [`parse_clips`]          | [`write_clips`]           |
//! | subtitle JSONL    | [`parse_subtitles`]      | [`write_subtitles`]       |
//! | manifest JSONL    | [`parse_manifests`]      |                           |
//! | feature binary    | [`read_feature_matrix`]  | [`write_feature_matrix`]  |
//! | similarity CSV    | [`parse_similarity_csv`] | [`write_similarity_csv`]  |

mod annotations;
mod features;
mod records;
mod simcsv;
mod split;
mod weak;

pub use annotations::{parse_annotations, write_annotations, ANNOTATION_SCHEMA_VERSION};
pub use features::{
    decode_features, encode_features, read_feature_matrix, write_feature_matrix, FEATURE_MAGIC,
};
pub use records::{
    group_by_video, parse_clips, parse_subtitles, write_clips, write_subtitles, SubtitleSegment,
};
pub use simcsv::{parse_similarity_csv, write_similarity_csv};
pub use split::{
    dedup_split, movie_key, parse_manifests, Split, SplitAssignment, SplitRatios, VideoManifest,
};
pub use weak::{weak_supervise, WeakPair};

use std::io::BufRead;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

/// Deserializes each non-blank line, tagging errors with 1-based line numbers.
pub(crate) fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

pub(crate) fn write_jsonl<T: serde::Serialize, W: std::io::Write>(
    mut writer: W,
    records: impl IntoIterator<Item = T>,
) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, &r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
