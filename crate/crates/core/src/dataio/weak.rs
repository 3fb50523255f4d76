use serde::{Deserialize, Serialize};

use super::SubtitleSegment;
use crate::error::{Error, Result};
use crate::types::ClipRecord;

/// A subtitle-derived (clip, sentence) correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakPair {
    pub clip_index: usize,
    pub sentence_index: usize,
}

/// Pairs each clip with the subtitle segment it overlaps most. Ties go to the
/// earlier segment; clips that overlap no segment are left out.
pub fn weak_supervise(clips: &[ClipRecord], segments: &[SubtitleSegment]) -> Result<Vec<WeakPair>> {
    check_sorted(
        clips.iter().map(|c| (c.interval.start(), c.interval.end())),
        "clips",
    )?;
    check_sorted(
        segments
            .iter()
            .map(|s| (s.interval.start(), s.interval.end())),
        "subtitle segments",
    )?;
    if let (Some(c), Some(s)) = (clips.first(), segments.first()) {
        let video = &c.video_id;
        if clips.iter().any(|x| &x.video_id != video)
            || segments.iter().any(|x| &x.video_id != video)
            || &s.video_id != video
        {
            return Err(Error::validation(
                "weak supervision inputs must come from a single video",
            ));
        }
    }

    let mut out = Vec::new();
    for clip in clips {
        // First segment that ends after the clip starts.
        let first = segments.partition_point(|s| s.interval.end() <= clip.interval.start());
        let mut best: Option<(f64, usize)> = None;
        for seg in segments[first..]
            .iter()
            .take_while(|s| s.interval.start() < clip.interval.end())
        {
            let overlap = clip.interval.intersection(&seg.interval);
            if overlap > 0.0 && best.is_none_or(|(o, _)| overlap > o) {
                best = Some((overlap, seg.sentence_index));
            }
        }
        if let Some((_, sentence_index)) = best {
            out.push(WeakPair {
                clip_index: clip.clip_index,
                sentence_index,
            });
        }
    }
    Ok(out)
}

fn check_sorted(spans: impl Iterator<Item = (f64, f64)>, what: &str) -> Result<()> {
    let mut prev_end = f64::NEG_INFINITY;
    for (start, end) in spans {
        if start < prev_end {
            return Err(Error::validation(format!(
                "{what} must be sorted and non-overlapping"
            )));
        }
        prev_end = end;
    }
    Ok(())
}
