pub mod agreement;
pub mod align;
pub mod eval;
pub mod report;
pub mod split;
pub mod weaklabel;

use clap::ValueEnum;
use storyalign::metrics::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    ClipAccuracy,
    SentenceIou,
    F1,
}

impl MetricArg {
    pub fn metric(self) -> Metric {
        match self {
            MetricArg::ClipAccuracy => Metric::ClipAccuracy,
            MetricArg::SentenceIou => Metric::SentenceIou,
            MetricArg::F1 => Metric::F1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricArg::ClipAccuracy => "clip_accuracy",
            MetricArg::SentenceIou => "sentence_iou",
            MetricArg::F1 => "f1",
        }
    }
}

/// Aligned plain-text grid: first column left-aligned, the rest right-aligned.
pub fn grid(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                line.push_str(&format!("{cell:<w$}", w = widths[c]));
            } else {
                line.push_str(&format!("  {cell:>w$}", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
