//! Domain types shared across the crate: time intervals, clips, sentences,
//! index-level alignments and their time-level grounding.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Half-open time span `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeInterval {
    start: f64,
    end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::validation(format!(
                "interval bounds must be finite, got [{start}, {end})"
            )));
        }
        if start < 0.0 {
            return Err(Error::validation(format!(
                "interval start must be non-negative, got {start}"
            )));
        }
        if end < start {
            return Err(Error::validation(format!(
                "interval end {end} precedes start {start}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Length of the overlap with `other`; touching intervals overlap by 0.
    pub fn intersection(&self, other: &TimeInterval) -> f64 {
        interval_intersection(self, other)
    }

    /// Intersection over union. Two zero-length intervals score 0.
    pub fn iou(&self, other: &TimeInterval) -> f64 {
        let inter = self.intersection(other);
        let union = self.len() + other.len() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    /// Smallest interval covering both.
    pub fn span(&self, other: &TimeInterval) -> TimeInterval {
        TimeInterval {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }

    /// Translate by `dt` seconds. Fails if the result would start before 0.
    pub fn shifted(&self, dt: f64) -> Result<TimeInterval> {
        TimeInterval::new(self.start + dt, self.end + dt)
    }
}

impl<'de> Deserialize<'de> for TimeInterval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            start: f64,
            end: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        TimeInterval::new(raw.start, raw.end).map_err(serde::de::Error::custom)
    }
}

/// Overlap length of two half-open intervals, clamped at zero.
pub fn interval_intersection(a: &TimeInterval, b: &TimeInterval) -> f64 {
    (a.end.min(b.end) - a.start.max(b.start)).max(0.0)
}

/// Narration language. The seven corpus languages have dedicated variants;
/// anything else is carried verbatim.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    English,
    Chinese,
    Spanish,
    French,
    Portuguese,
    Hindi,
    Russian,
    Other(String),
}

impl Language {
    pub const CORPUS: [Language; 7] = [
        Language::English,
        Language::Chinese,
        Language::Spanish,
        Language::French,
        Language::Portuguese,
        Language::Hindi,
        Language::Russian,
    ];

    pub fn tag(&self) -> &str {
        match self {
            Language::English => "en",
            Language::Chinese => "zh",
            Language::Spanish => "es",
            Language::French => "fr",
            Language::Portuguese => "pt",
            Language::Hindi => "hi",
            Language::Russian => "ru",
            Language::Other(tag) => tag,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Language::English => "English",
            Language::Chinese => "Chinese",
            Language::Spanish => "Spanish",
            Language::French => "French",
            Language::Portuguese => "Portuguese",
            Language::Hindi => "Hindi",
            Language::Russian => "Russian",
            Language::Other(tag) => tag,
        }
    }
}

impl FromStr for Language {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "en" => Language::English,
            "zh" => Language::Chinese,
            "es" => Language::Spanish,
            "fr" => Language::French,
            "pt" => Language::Portuguese,
            "hi" => Language::Hindi,
            "ru" => Language::Russian,
            other => Language::Other(other.to_string()),
        })
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for Language {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Language {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let tag = String::deserialize(deserializer)?;
        Ok(tag.parse().unwrap_or_else(|never| match never {}))
    }
}

/// One shot-delimited video clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRecord {
    pub clip_index: usize,
    pub interval: TimeInterval,
    pub video_id: String,
}

/// Gold or predicted grounding of a sentence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grounding {
    Grounded(TimeInterval),
    Unmatched,
}

impl Grounding {
    pub fn interval(&self) -> Option<&TimeInterval> {
        match self {
            Grounding::Grounded(iv) => Some(iv),
            Grounding::Unmatched => None,
        }
    }

    /// IoU of two groundings: both unmatched scores 1, one-sided scores 0.
    pub fn iou(&self, other: &Grounding) -> f64 {
        match (self, other) {
            (Grounding::Unmatched, Grounding::Unmatched) => 1.0,
            (Grounding::Grounded(a), Grounding::Grounded(b)) => a.iou(b),
            _ => 0.0,
        }
    }
}

/// One narration sentence with its gold grounding.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRecord {
    pub sentence_index: usize,
    pub text: String,
    pub language: Language,
    pub gold: Grounding,
    pub video_id: String,
}

/// A matched (sentence, clip) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub sentence: usize,
    pub clip: usize,
}

impl Assignment {
    pub fn new(sentence: usize, clip: usize) -> Self {
        Self { sentence, clip }
    }
}

/// Index-level alignment between `clip_count` clips and `sentence_count`
/// sentences. Assignments are kept in path order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub clip_count: usize,
    pub sentence_count: usize,
    pub assignments: Vec<Assignment>,
    pub dropped_sentences: BTreeSet<usize>,
    pub dropped_clips: BTreeSet<usize>,
    pub total_cost: f64,
}

impl Alignment {
    /// Checks monotonicity and that every clip and sentence is either
    /// matched or dropped, never both.
    pub fn validate(&self) -> Result<()> {
        for w in self.assignments.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.sentence > b.sentence || a.clip > b.clip || a == b {
                return Err(Error::validation(format!(
                    "assignments not strictly monotone: ({}, {}) then ({}, {})",
                    a.sentence, a.clip, b.sentence, b.clip
                )));
            }
        }
        let mut matched_clips = BTreeSet::new();
        let mut matched_sentences = BTreeSet::new();
        for a in &self.assignments {
            if a.sentence >= self.sentence_count || a.clip >= self.clip_count {
                return Err(Error::validation(format!(
                    "assignment ({}, {}) outside {} sentences x {} clips",
                    a.sentence, a.clip, self.sentence_count, self.clip_count
                )));
            }
            matched_clips.insert(a.clip);
            matched_sentences.insert(a.sentence);
        }
        check_partition("clip", self.clip_count, &matched_clips, &self.dropped_clips)?;
        check_partition(
            "sentence",
            self.sentence_count,
            &matched_sentences,
            &self.dropped_sentences,
        )
    }

    /// Clips paired with `sentence`, ascending. Empty when it was dropped.
    pub fn clips_for(&self, sentence: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .filter(|a| a.sentence == sentence)
            .map(|a| a.clip)
            .collect()
    }

    /// The sentence -> clips map; `None` for dropped sentences.
    pub fn sentence_map(&self) -> Vec<Option<Vec<usize>>> {
        let mut map = vec![None; self.sentence_count];
        for a in &self.assignments {
            if let Some(slot) = map.get_mut(a.sentence) {
                slot.get_or_insert_with(Vec::new).push(a.clip);
            }
        }
        map
    }
}

fn check_partition(
    what: &str,
    count: usize,
    matched: &BTreeSet<usize>,
    dropped: &BTreeSet<usize>,
) -> Result<()> {
    if let Some(i) = matched.intersection(dropped).next() {
        return Err(Error::validation(format!(
            "{what} {i} is both matched and dropped"
        )));
    }
    if let Some(&i) = dropped.iter().find(|&&i| i >= count) {
        return Err(Error::validation(format!(
            "dropped {what} {i} out of range (count {count})"
        )));
    }
    if matched.len() + dropped.len() != count {
        let missing = (0..count)
            .find(|i| !matched.contains(i) && !dropped.contains(i))
            .unwrap_or(count);
        return Err(Error::validation(format!(
            "{what} {missing} is neither matched nor dropped"
        )));
    }
    Ok(())
}

/// Time-level view of an alignment: one grounding per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundedAlignment {
    pub video_id: String,
    pub sentences: Vec<Grounding>,
}

/// Spans each sentence's assigned clips into one interval.
///
/// A sentence matched to non-adjacent clips gets the convex span from the
/// earliest start to the latest end. Sentences without clips are `Unmatched`.
pub fn ground_alignment(alignment: &Alignment, clips: &[ClipRecord]) -> Result<GroundedAlignment> {
    let video_id = match clips.first() {
        Some(c) => c.video_id.clone(),
        None => return Err(Error::validation("no clips supplied for grounding")),
    };
    for (pos, clip) in clips.iter().enumerate() {
        if clip.clip_index != pos {
            return Err(Error::validation(format!(
                "clip at position {pos} has index {}",
                clip.clip_index
            )));
        }
        if clip.video_id != video_id {
            return Err(Error::validation(format!(
                "clips mix videos {:?} and {:?}",
                video_id, clip.video_id
            )));
        }
    }

    let mut spans: Vec<Option<TimeInterval>> = vec![None; alignment.sentence_count];
    for a in &alignment.assignments {
        let clip = clips.get(a.clip).ok_or(Error::UnknownClip {
            index: a.clip,
            count: clips.len(),
        })?;
        let slot = spans.get_mut(a.sentence).ok_or_else(|| {
            Error::validation(format!(
                "assignment names sentence {} of {}",
                a.sentence, alignment.sentence_count
            ))
        })?;
        *slot = Some(match slot {
            Some(span) => span.span(&clip.interval),
            None => clip.interval,
        });
    }

    let sentences = spans
        .into_iter()
        .enumerate()
        .map(|(i, span)| match span {
            Some(iv) if !alignment.dropped_sentences.contains(&i) => Grounding::Grounded(iv),
            _ => Grounding::Unmatched,
        })
        .collect();
    Ok(GroundedAlignment {
        video_id,
        sentences,
    })
}
