use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{read_jsonl, write_jsonl};
use crate::error::{Error, Result};
use crate::types::{Grounding, Language, SentenceRecord, TimeInterval};

pub const ANNOTATION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationLine {
    #[serde(default)]
    schema_version: Option<u32>,
    video_id: String,
    lang: Language,
    idx: usize,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    unmatched: bool,
}

/// Reads sentence annotations, one JSON object per line.
///
/// Within each video, `idx` must run 0, 1, 2, ... in file order. Videos may
/// be interleaved.
pub fn parse_annotations<R: BufRead>(reader: R) -> Result<Vec<SentenceRecord>> {
    let mut next_idx: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (line, rec) in read_jsonl::<AnnotationLine, _>(reader)? {
        let fail = |message: String| Error::Parse { line, message };
        if let Some(v) = rec.schema_version {
            if v != ANNOTATION_SCHEMA_VERSION {
                return Err(fail(format!("unsupported schema_version {v}")));
            }
        }
        let gold = match (rec.unmatched, rec.start, rec.end) {
            (true, None, None) => Grounding::Unmatched,
            (false, Some(start), Some(end)) => {
                Grounding::Grounded(TimeInterval::new(start, end).map_err(|e| fail(e.to_string()))?)
            }
            (true, _, _) => return Err(fail("unmatched record carries start/end".into())),
            (false, _, _) => {
                return Err(fail("record needs both start and end, or unmatched".into()))
            }
        };
        let expected = next_idx.entry(rec.video_id.clone()).or_insert(0);
        if rec.idx != *expected {
            return Err(fail(format!(
                "video {:?}: sentence idx {} out of sequence, expected {}",
                rec.video_id, rec.idx, expected
            )));
        }
        *expected += 1;
        out.push(SentenceRecord {
            sentence_index: rec.idx,
            text: rec.text,
            language: rec.lang,
            gold,
            video_id: rec.video_id,
        });
    }
    Ok(out)
}

pub fn write_annotations<W: Write>(writer: W, sentences: &[SentenceRecord]) -> Result<()> {
    write_jsonl(
        writer,
        sentences.iter().map(|s| {
            let (start, end, unmatched) = match s.gold {
                Grounding::Grounded(iv) => (Some(iv.start()), Some(iv.end()), false),
                Grounding::Unmatched => (None, None, true),
            };
            AnnotationLine {
                schema_version: Some(ANNOTATION_SCHEMA_VERSION),
                video_id: s.video_id.clone(),
                lang: s.language.clone(),
                idx: s.sentence_index,
                text: s.text.clone(),
                start,
                end,
                unmatched,
            }
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<SentenceRecord>> {
        parse_annotations(text.as_bytes())
    }

    #[test]
    fn grounded_and_unmatched() {
        let recs = parse(concat!(
            r#"{"video_id":"v1","lang":"en","idx":0,"text":"He runs.","start":3.0,"end":7.5}"#,
            "\n",
            r#"{"video_id":"v1","lang":"en","idx":1,"text":"Narrator aside.","unmatched":true}"#,
            "\n"
        ))
        .unwrap();
        assert_eq!(
            recs[0].gold,
            Grounding::Grounded(TimeInterval::new(3.0, 7.5).unwrap())
        );
        assert_eq!(recs[1].gold, Grounding::Unmatched);
        assert_eq!(recs[1].language, Language::English);
    }

    #[test]
    fn reversed_interval_rejected() {
        let err = parse(r#"{"video_id":"v","lang":"en","idx":0,"text":"","start":5.0,"end":4.0}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse("\n{\"video_id\":\"v\"\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn gap_in_indices_rejected() {
        let text = concat!(
            r#"{"video_id":"v","lang":"en","idx":0,"text":"","unmatched":true}"#,
            "\n",
            r#"{"video_id":"v","lang":"en","idx":2,"text":"","unmatched":true}"#
        );
        assert!(parse(text).is_err());
    }

    #[test]
    fn ambiguous_records_rejected() {
        assert!(parse(r#"{"video_id":"v","lang":"en","idx":0,"text":"","start":1.0}"#).is_err());
        assert!(parse(
            r#"{"video_id":"v","lang":"en","idx":0,"text":"","start":1.0,"end":2.0,"unmatched":true}"#
        )
        .is_err());
        assert!(parse(
            r#"{"schema_version":9,"video_id":"v","lang":"en","idx":0,"text":"","unmatched":true}"#
        )
        .is_err());
    }

    #[test]
    fn round_trip() {
        let text = concat!(
            r#"{"video_id":"a","lang":"zh","idx":0,"text":"他跑了。","start":0.1,"end":2.7000000000000002}"#,
            "\n",
            r#"{"video_id":"b","lang":"xx","idx":0,"text":"q\"uote","unmatched":true}"#
        );
        let recs = parse(text).unwrap();
        let mut buf = Vec::new();
        write_annotations(&mut buf, &recs).unwrap();
        assert_eq!(parse_annotations(buf.as_slice()).unwrap(), recs);
    }
}
