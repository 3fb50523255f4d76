//! Alignment quality: Clip Accuracy, Sentence IoU, their harmonic mean, and
//! annotator agreement. Internally everything is a fraction in `[0, 1]`;
//! rounding to percentages happens only when rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ClipRecord, GroundedAlignment, Language, SentenceRecord, TimeInterval};

/// Metrics for one video, or an average over videos.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub clip_accuracy: f64,
    pub sentence_iou: f64,
    pub f1: f64,
    /// Seconds of clip time owned by the right sentence (or correctly left
    /// unassigned).
    pub matched_duration: f64,
    /// Total clip time in seconds.
    pub total_duration: f64,
    pub sentence_count: usize,
}

impl EvalResult {
    /// Builds a result from the two base metrics; `f1` is derived.
    pub fn new(
        clip_accuracy: f64,
        sentence_iou: f64,
        matched_duration: f64,
        total_duration: f64,
        sentence_count: usize,
    ) -> Self {
        Self {
            clip_accuracy,
            sentence_iou,
            f1: f1(clip_accuracy, sentence_iou),
            matched_duration,
            total_duration,
            sentence_count,
        }
    }
}

/// Harmonic mean of Clip Accuracy and Sentence IoU; 0 when both are 0.
pub fn f1(clip_accuracy: f64, sentence_iou: f64) -> f64 {
    let sum = clip_accuracy + sentence_iou;
    if sum > 0.0 {
        2.0 * clip_accuracy * sentence_iou / sum
    } else {
        0.0
    }
}

fn check_video(pred: &GroundedAlignment, gold: &[SentenceRecord]) -> Result<()> {
    if gold.is_empty() {
        return Err(Error::validation(format!(
            "no gold sentences for video {:?}",
            pred.video_id
        )));
    }
    if let Some(s) = gold.iter().find(|s| s.video_id != pred.video_id) {
        return Err(Error::validation(format!(
            "gold sentence {} belongs to video {:?}, prediction to {:?}",
            s.sentence_index, s.video_id, pred.video_id
        )));
    }
    if gold.len() != pred.sentences.len() {
        return Err(Error::validation(format!(
            "video {:?}: {} gold sentences but {} predicted",
            pred.video_id,
            gold.len(),
            pred.sentences.len()
        )));
    }
    Ok(())
}

/// Seconds of clip time where the set of sentences owning that time under
/// the prediction equals the set owning it under gold, and the total clip
/// time. Time owned by no gold sentence is correct only when the prediction
/// also leaves it unowned.
pub fn clip_time_accounting(
    pred: &GroundedAlignment,
    gold: &[SentenceRecord],
    clips: &[ClipRecord],
) -> Result<(f64, f64)> {
    check_video(pred, gold)?;
    if let Some(c) = clips.iter().find(|c| c.video_id != pred.video_id) {
        return Err(Error::validation(format!(
            "clip {} belongs to video {:?}, prediction to {:?}",
            c.clip_index, c.video_id, pred.video_id
        )));
    }

    let gold_spans: Vec<_> = gold.iter().map(|s| s.gold.interval().copied()).collect();
    let pred_spans: Vec<_> = pred
        .sentences
        .iter()
        .map(|g| g.interval().copied())
        .collect();

    let mut cuts: Vec<f64> = Vec::new();
    for iv in clips
        .iter()
        .map(|c| c.interval)
        .chain(gold_spans.iter().flatten().copied())
        .chain(pred_spans.iter().flatten().copied())
    {
        cuts.push(iv.start());
        cuts.push(iv.end());
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let owners = |spans: &[Option<TimeInterval>], t: f64| -> Vec<usize> {
        spans
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.filter(|iv| iv.contains(t)).map(|_| i))
            .collect()
    };

    let mut matched = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = lo + (hi - lo) / 2.0;
        let in_clips = clips.iter().filter(|c| c.interval.contains(mid)).count();
        if in_clips == 0 {
            continue;
        }
        if owners(&gold_spans, mid) == owners(&pred_spans, mid) {
            matched += (hi - lo) * in_clips as f64;
        }
    }
    let total = clips.iter().map(|c| c.interval.len()).sum();
    Ok((matched, total))
}

/// Duration-weighted fraction of clip time assigned to the correct sentence.
pub fn clip_accuracy(
    pred: &GroundedAlignment,
    gold: &[SentenceRecord],
    clips: &[ClipRecord],
) -> Result<f64> {
    let (matched, total) = clip_time_accounting(pred, gold, clips)?;
    Ok(if total > 0.0 { matched / total } else { 0.0 })
}

/// Mean per-sentence IoU. Both unmatched scores 1, one-sided unmatched 0.
pub fn sentence_iou(pred: &GroundedAlignment, gold: &[SentenceRecord]) -> Result<f64> {
    check_video(pred, gold)?;
    let sum: f64 = pred
        .sentences
        .iter()
        .zip(gold)
        .map(|(p, g)| p.iou(&g.gold))
        .sum();
    Ok(sum / gold.len() as f64)
}

/// All three metrics for one video.
pub fn evaluate_video(
    pred: &GroundedAlignment,
    gold: &[SentenceRecord],
    clips: &[ClipRecord],
) -> Result<EvalResult> {
    let (matched, total) = clip_time_accounting(pred, gold, clips)?;
    let ca = if total > 0.0 { matched / total } else { 0.0 };
    let si = sentence_iou(pred, gold)?;
    Ok(EvalResult::new(ca, si, matched, total, gold.len()))
}

/// Mean per-sentence IoU between two annotations of the same sentences.
pub fn agreement_iou(a: &[SentenceRecord], b: &[SentenceRecord]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::validation("no sentences to compare"));
    }
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "annotations cover {} and {} sentences",
            a.len(),
            b.len()
        )));
    }
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        if x.video_id != y.video_id || x.sentence_index != y.sentence_index {
            return Err(Error::validation(format!(
                "sentence mismatch: {}#{} vs {}#{}",
                x.video_id, x.sentence_index, y.video_id, y.sentence_index
            )));
        }
        sum += x.gold.iou(&y.gold);
    }
    Ok(sum / a.len() as f64)
}

/// How per-video results are combined within a language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Unweighted mean of per-video metrics.
    #[default]
    PerVideo,
    /// Durations and sentence counts pooled across videos first.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub clip_accuracy: f64,
    pub sentence_iou: f64,
    pub f1: f64,
}

impl MetricSummary {
    fn mean<'a>(items: impl IntoIterator<Item = &'a MetricSummary>) -> MetricSummary {
        let mut n = 0.0;
        let mut acc = MetricSummary {
            clip_accuracy: 0.0,
            sentence_iou: 0.0,
            f1: 0.0,
        };
        for m in items {
            n += 1.0;
            acc.clip_accuracy += m.clip_accuracy;
            acc.sentence_iou += m.sentence_iou;
            acc.f1 += m.f1;
        }
        MetricSummary {
            clip_accuracy: acc.clip_accuracy / n,
            sentence_iou: acc.sentence_iou / n,
            f1: acc.f1 / n,
        }
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::ClipAccuracy => self.clip_accuracy,
            Metric::SentenceIou => self.sentence_iou,
            Metric::F1 => self.f1,
        }
    }
}

impl From<&EvalResult> for MetricSummary {
    fn from(r: &EvalResult) -> Self {
        MetricSummary {
            clip_accuracy: r.clip_accuracy,
            sentence_iou: r.sentence_iou,
            f1: r.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageSummary {
    pub language: Language,
    pub videos: usize,
    #[serde(flatten)]
    pub metrics: MetricSummary,
}

/// Per-language means and their unweighted cross-language average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageReport {
    pub languages: Vec<LanguageSummary>,
    pub average: MetricSummary,
}

impl LanguageReport {
    /// Report over precomputed per-language rows; the average is their
    /// unweighted mean.
    pub fn from_languages(languages: Vec<LanguageSummary>) -> Result<Self> {
        if languages.is_empty() {
            return Err(Error::validation("report has no languages"));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = languages.iter().find(|l| !seen.insert(&l.language)) {
            return Err(Error::validation(format!(
                "language {} listed twice",
                dup.language
            )));
        }
        let average = MetricSummary::mean(languages.iter().map(|l| &l.metrics));
        Ok(LanguageReport { languages, average })
    }
}

pub fn aggregate_report(per_video: &[(Language, EvalResult)]) -> Result<LanguageReport> {
    aggregate_report_with(per_video, Aggregation::PerVideo)
}

pub fn aggregate_report_with(
    per_video: &[(Language, EvalResult)],
    mode: Aggregation,
) -> Result<LanguageReport> {
    if per_video.is_empty() {
        return Err(Error::validation("no per-video results to aggregate"));
    }
    let mut by_lang: BTreeMap<&Language, Vec<&EvalResult>> = BTreeMap::new();
    for (lang, r) in per_video {
        by_lang.entry(lang).or_default().push(r);
    }

    let languages: Vec<LanguageSummary> = by_lang
        .into_iter()
        .map(|(lang, results)| {
            let metrics = match mode {
                Aggregation::PerVideo => {
                    let per: Vec<MetricSummary> = results.iter().map(|r| (*r).into()).collect();
                    MetricSummary::mean(&per)
                }
                Aggregation::Pooled => {
                    let matched: f64 = results.iter().map(|r| r.matched_duration).sum();
                    let total: f64 = results.iter().map(|r| r.total_duration).sum();
                    let sentences: usize = results.iter().map(|r| r.sentence_count).sum();
                    let iou_sum: f64 = results
                        .iter()
                        .map(|r| r.sentence_iou * r.sentence_count as f64)
                        .sum();
                    let ca = if total > 0.0 { matched / total } else { 0.0 };
                    let si = if sentences > 0 {
                        iou_sum / sentences as f64
                    } else {
                        0.0
                    };
                    MetricSummary {
                        clip_accuracy: ca,
                        sentence_iou: si,
                        f1: f1(ca, si),
                    }
                }
            };
            LanguageSummary {
                language: lang.clone(),
                videos: results.len(),
                metrics,
            }
        })
        .collect();

    LanguageReport::from_languages(languages)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ClipAccuracy,
    SentenceIou,
    F1,
}

/// Renders a method x language grid of percentages with one decimal, plus an
/// `Average` column.
pub fn render_table(methods: &[(String, LanguageReport)], metric: Metric) -> String {
    let languages: BTreeSet<&Language> = methods
        .iter()
        .flat_map(|(_, r)| r.languages.iter().map(|l| &l.language))
        .collect();

    let mut header = vec![String::new()];
    header.extend(languages.iter().map(|l| l.name().to_string()));
    header.push("Average".to_string());

    let mut rows = vec![header];
    for (name, report) in methods {
        let mut row = vec![name.clone()];
        for lang in &languages {
            row.push(
                report
                    .languages
                    .iter()
                    .find(|l| &&l.language == lang)
                    .map_or("-".to_string(), |l| percent(l.metrics.get(metric))),
            );
        }
        row.push(percent(report.average.get(metric)));
        rows.push(row);
    }

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Fraction as a percentage with one decimal; `-` when the value is missing
/// (NaN).
pub fn percent(fraction: f64) -> String {
    if fraction.is_finite() {
        format!("{:.1}", fraction * 100.0)
    } else {
        "-".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Grounding;
    use approx::assert_abs_diff_eq;

    fn iv(s: f64, e: f64) -> TimeInterval {
        TimeInterval::new(s, e).unwrap()
    }

    fn sentence(i: usize, gold: Grounding) -> SentenceRecord {
        SentenceRecord {
            sentence_index: i,
            text: String::new(),
            language: Language::English,
            gold,
            video_id: "v".into(),
        }
    }

    fn clip(i: usize, s: f64, e: f64) -> ClipRecord {
        ClipRecord {
            clip_index: i,
            interval: iv(s, e),
            video_id: "v".into(),
        }
    }

    fn pred(sentences: Vec<Grounding>) -> GroundedAlignment {
        GroundedAlignment {
            video_id: "v".into(),
            sentences,
        }
    }

    #[test]
    fn four_sixths_clip_accuracy() {
        let clips = [clip(0, 0.0, 2.0), clip(1, 2.0, 6.0)];
        let gold = [
            sentence(0, Grounding::Grounded(iv(0.0, 2.0))),
            sentence(1, Grounding::Grounded(iv(2.0, 6.0))),
        ];
        let p = pred(vec![
            Grounding::Unmatched,
            Grounding::Grounded(iv(0.0, 6.0)),
        ]);
        assert_abs_diff_eq!(
            clip_accuracy(&p, &gold, &clips).unwrap(),
            4.0 / 6.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn all_wrong_is_zero() {
        let clips = [clip(0, 0.0, 2.0), clip(1, 2.0, 6.0)];
        let gold = [
            sentence(0, Grounding::Grounded(iv(0.0, 2.0))),
            sentence(1, Grounding::Grounded(iv(2.0, 6.0))),
        ];
        let p = pred(vec![
            Grounding::Grounded(iv(2.0, 6.0)),
            Grounding::Grounded(iv(0.0, 2.0)),
        ]);
        assert_eq!(clip_accuracy(&p, &gold, &clips).unwrap(), 0.0);
    }

    #[test]
    fn unmatched_time_counts_when_left_alone() {
        let clips = [clip(0, 0.0, 2.0), clip(1, 2.0, 6.0)];
        let gold = [
            sentence(0, Grounding::Grounded(iv(0.0, 2.0))),
            sentence(1, Grounding::Unmatched),
        ];
        let p = pred(vec![
            Grounding::Grounded(iv(0.0, 2.0)),
            Grounding::Unmatched,
        ]);
        assert_eq!(clip_accuracy(&p, &gold, &clips).unwrap(), 1.0);
        assert_eq!(sentence_iou(&p, &gold).unwrap(), 1.0);
    }

    #[test]
    fn sentence_iou_examples() {
        let gold = [sentence(0, Grounding::Grounded(iv(0.0, 4.0)))];
        let p = pred(vec![Grounding::Grounded(iv(2.0, 6.0))]);
        assert_abs_diff_eq!(sentence_iou(&p, &gold).unwrap(), 2.0 / 6.0, epsilon = 1e-12);
        let gold = [sentence(0, Grounding::Grounded(iv(0.0, 2.0)))];
        let p = pred(vec![Grounding::Grounded(iv(4.0, 6.0))]);
        assert_eq!(sentence_iou(&p, &gold).unwrap(), 0.0);
        assert!(sentence_iou(&pred(vec![]), &gold).is_err());
    }

    #[test]
    fn video_mismatch_rejected() {
        let gold = [sentence(0, Grounding::Unmatched)];
        let p = GroundedAlignment {
            video_id: "other".into(),
            sentences: vec![Grounding::Unmatched],
        };
        assert!(clip_accuracy(&p, &gold, &[clip(0, 0.0, 1.0)]).is_err());
    }

    #[test]
    fn f1_examples() {
        assert_abs_diff_eq!(f1(0.437, 0.333), 0.378, epsilon = 0.005);
        assert_abs_diff_eq!(f1(0.4, 0.4), 0.4, epsilon = 1e-15);
        assert_eq!(f1(0.0, 0.5), 0.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    #[test]
    fn agreement_examples() {
        let a = [sentence(0, Grounding::Grounded(iv(0.0, 10.0)))];
        let b = [sentence(0, Grounding::Grounded(iv(0.0, 5.0)))];
        assert_eq!(agreement_iou(&a, &b).unwrap(), 0.5);
        assert_eq!(agreement_iou(&a, &a).unwrap(), 1.0);
        let u = [sentence(0, Grounding::Unmatched)];
        let c = [sentence(0, Grounding::Grounded(iv(0.0, 3.0)))];
        assert_eq!(agreement_iou(&u, &c).unwrap(), 0.0);
        let other = [sentence(1, Grounding::Unmatched)];
        assert!(agreement_iou(&u, &other).is_err());
    }

    fn flat(f: f64) -> EvalResult {
        EvalResult::new(f, f, 0.0, 0.0, 1)
    }

    #[test]
    fn aggregate_means() {
        let report = aggregate_report(&[
            (Language::English, flat(0.2)),
            (Language::English, flat(0.4)),
        ])
        .unwrap();
        assert_abs_diff_eq!(report.languages[0].metrics.f1, 0.3, epsilon = 1e-12);
        assert_eq!(report.languages[0].videos, 2);
        assert!(aggregate_report(&[]).is_err());

        let single = EvalResult::new(0.5, 0.25, 3.0, 6.0, 4);
        let report = aggregate_report(&[(Language::Hindi, single)]).unwrap();
        assert_eq!(report.average, MetricSummary::from(&single));
    }

    #[test]
    fn pooled_weights_by_duration() {
        let a = EvalResult::new(1.0, 1.0, 2.0, 2.0, 1);
        let b = EvalResult::new(0.0, 0.0, 0.0, 6.0, 3);
        let r = aggregate_report_with(
            &[(Language::French, a), (Language::French, b)],
            Aggregation::Pooled,
        )
        .unwrap();
        assert_abs_diff_eq!(r.average.clip_accuracy, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(r.average.sentence_iou, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn table_has_average_column() {
        let report = aggregate_report(&[
            (Language::English, flat(0.269)),
            (Language::Chinese, flat(0.377)),
        ])
        .unwrap();
        let table = render_table(&[("m".into(), report)], Metric::F1);
        let lines: Vec<_> = table.lines().collect();
        assert!(lines[0].ends_with("Average"));
        assert!(lines[0].contains("English") && lines[0].contains("Chinese"));
        assert!(lines[1].starts_with('m'));
        assert!(lines[1].ends_with("32.3"), "{table}");
    }
}
