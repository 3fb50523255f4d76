//! Clip-boundary and subtitle-segment JSONL.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{read_jsonl, write_jsonl};
use crate::error::{Error, Result};
use crate::types::{ClipRecord, TimeInterval};

/// A timed subtitle span holding one narration sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtitleSegment {
    pub video_id: String,
    pub sentence_index: usize,
    pub interval: TimeInterval,
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClipLine {
    video_id: String,
    idx: usize,
    start: f64,
    end: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubtitleLine {
    video_id: String,
    idx: usize,
    start: f64,
    end: f64,
    text: String,
}

/// Tracks per-video ordering: contiguous indices from 0, sorted by start,
/// no overlap.
#[derive(Default)]
struct OrderCheck {
    last: BTreeMap<String, (usize, TimeInterval)>,
}

impl OrderCheck {
    fn push(&mut self, line: usize, video: &str, idx: usize, iv: TimeInterval) -> Result<()> {
        let fail = |message: String| Error::Parse { line, message };
        match self.last.get(video) {
            None if idx != 0 => {
                return Err(fail(format!(
                    "video {video:?} starts at idx {idx}, expected 0"
                )))
            }
            Some(&(prev, _)) if idx != prev + 1 => {
                return Err(fail(format!("video {video:?}: idx {idx} follows {prev}")))
            }
            Some((_, prev)) if iv.start() < prev.end() => {
                return Err(fail(format!(
                    "video {video:?}: [{}, {}) overlaps or precedes previous [{}, {})",
                    iv.start(),
                    iv.end(),
                    prev.start(),
                    prev.end()
                )))
            }
            _ => {}
        }
        self.last.insert(video.to_string(), (idx, iv));
        Ok(())
    }
}

fn interval(line: usize, start: f64, end: f64) -> Result<TimeInterval> {
    TimeInterval::new(start, end).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })
}

pub fn parse_clips<R: BufRead>(reader: R) -> Result<Vec<ClipRecord>> {
    let mut check = OrderCheck::default();
    let mut out = Vec::new();
    for (line, rec) in read_jsonl::<ClipLine, _>(reader)? {
        let iv = interval(line, rec.start, rec.end)?;
        check.push(line, &rec.video_id, rec.idx, iv)?;
        out.push(ClipRecord {
            clip_index: rec.idx,
            interval: iv,
            video_id: rec.video_id,
        });
    }
    Ok(out)
}

pub fn write_clips<W: Write>(writer: W, clips: &[ClipRecord]) -> Result<()> {
    write_jsonl(
        writer,
        clips.iter().map(|c| ClipLine {
            video_id: c.video_id.clone(),
            idx: c.clip_index,
            start: c.interval.start(),
            end: c.interval.end(),
        }),
    )
}

pub fn parse_subtitles<R: BufRead>(reader: R) -> Result<Vec<SubtitleSegment>> {
    let mut check = OrderCheck::default();
    let mut out = Vec::new();
    for (line, rec) in read_jsonl::<SubtitleLine, _>(reader)? {
        let iv = interval(line, rec.start, rec.end)?;
        check.push(line, &rec.video_id, rec.idx, iv)?;
        out.push(SubtitleSegment {
            video_id: rec.video_id,
            sentence_index: rec.idx,
            interval: iv,
            text: rec.text,
        });
    }
    Ok(out)
}

pub fn write_subtitles<W: Write>(writer: W, segments: &[SubtitleSegment]) -> Result<()> {
    write_jsonl(
        writer,
        segments.iter().map(|s| SubtitleLine {
            video_id: s.video_id.clone(),
            idx: s.sentence_index,
            start: s.interval.start(),
            end: s.interval.end(),
            text: s.text.clone(),
        }),
    )
}

/// Buckets records by video id, preserving order within each video.
pub fn group_by_video<T: Clone>(
    items: &[T],
    video_of: impl Fn(&T) -> &str,
) -> BTreeMap<String, Vec<T>> {
    let mut map: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for item in items {
        map.entry(video_of(item).to_string())
            .or_default()
            .push(item.clone());
    }
    map
}
