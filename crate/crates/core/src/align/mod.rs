//! Monotone clip/sentence alignment: classic DTW, DTW with drops, and an
//! exhaustive search used to check both.
//!
//! Matrices are indexed `[clip][sentence]`. Alignments report pairs as
//! `(sentence, clip)` to match the sentence -> clips mapping they encode.

mod brute;
mod drop_dtw;
mod dtw;

pub use brute::{brute_force_align, BRUTE_FORCE_LIMIT};
pub use drop_dtw::drop_dtw_align;
pub use dtw::dtw_align;

use crate::error::{Error, Result};
use crate::types::Alignment;

/// Dense clip-by-sentence similarity scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a `rows x cols` matrix from row-major values. Every value must
    /// be finite and both dimensions at least 1.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols, &values)?;
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (r, c, values) = flatten(rows)?;
        Self::new(r, c, values)
    }

    /// Number of clips.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of sentences.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, clip: usize, sentence: usize) -> f64 {
        self.values[clip * self.cols + sentence]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, clip: usize) -> &[f64] {
        &self.values[clip * self.cols..(clip + 1) * self.cols]
    }

    /// Adds `k` to every entry.
    pub fn shifted(&self, k: f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v + k).collect(),
        )
    }
}

/// Pairwise distances `d = 1 - s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols, &values)?;
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, clip: usize, sentence: usize) -> f64 {
        self.values[clip * self.cols + sentence]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_shape(rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::validation(format!(
            "matrix must be at least 1x1, got {rows}x{cols}"
        )));
    }
    if values.len() != rows * cols {
        return Err(Error::validation(format!(
            "{rows}x{cols} matrix needs {} values, got {}",
            rows * cols,
            values.len()
        )));
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / cols,
            col: pos % cols,
        });
    }
    Ok(())
}

fn flatten(rows: &[Vec<f64>]) -> Result<(usize, usize, Vec<f64>)> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::validation(format!(
            "row {r} has {} values, expected {cols}",
            rows[r].len()
        )));
    }
    Ok((rows.len(), cols, rows.concat()))
}

/// Elementwise `1 - s`. Finiteness is guaranteed by [`SimilarityMatrix`].
pub fn to_cost(sim: &SimilarityMatrix) -> CostMatrix {
    CostMatrix {
        rows: sim.rows,
        cols: sim.cols,
        values: sim.values.iter().map(|s| 1.0 - s).collect(),
    }
}

/// Penalties for leaving a clip or a sentence unaligned. `f64::INFINITY`
/// forbids that kind of drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropCosts {
    pub clip: f64,
    pub sentence: f64,
}

impl DropCosts {
    pub fn new(clip: f64, sentence: f64) -> Result<Self> {
        for (name, v) in [("clip", clip), ("sentence", sentence)] {
            if v.is_nan() || v < 0.0 || v == f64::NEG_INFINITY {
                return Err(Error::validation(format!(
                    "{name} drop cost must be >= 0 or +inf, got {v}"
                )));
            }
        }
        Ok(Self { clip, sentence })
    }

    /// Both drops forbidden; Drop-DTW then reduces to plain DTW.
    pub fn disabled() -> Self {
        Self {
            clip: f64::INFINITY,
            sentence: f64::INFINITY,
        }
    }
}

/// Picks `d_v = d_t` as the `p`-th percentile (linear interpolation between
/// closest ranks) of all pairwise costs.
pub fn percentile_drop_costs(cost: &CostMatrix, p: f64) -> Result<DropCosts> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::validation(format!(
            "percentile must lie in [0, 100], got {p}"
        )));
    }
    let mut sorted = cost.values.clone();
    if sorted.is_empty() {
        return Err(Error::validation("empty cost matrix"));
    }
    sorted.sort_by(f64::total_cmp);
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let v = sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64);
    DropCosts::new(v, v)
}

/// `count` drops at `cost` each; zero drops cost nothing even when `cost` is
/// infinite.
pub(crate) fn drop_charge(count: usize, cost: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * cost
    }
}

/// Recomputes an alignment's cost from scratch: matched distances plus one
/// drop charge per dropped item.
pub fn alignment_cost(alignment: &Alignment, cost: &CostMatrix, drops: DropCosts) -> f64 {
    let matched: f64 = alignment
        .assignments
        .iter()
        .map(|a| cost.get(a.clip, a.sentence))
        .sum();
    matched
        + drop_charge(alignment.dropped_clips.len(), drops.clip)
        + drop_charge(alignment.dropped_sentences.len(), drops.sentence)
}
