//! Feature matrices, cosine similarity, same-video negative sampling and a
//! reference InfoNCE loss with its analytic gradient.

mod infonce;
mod negatives;

pub use infonce::{infonce_grad_check, infonce_gradient, infonce_loss, InfoNceGradient};
pub use negatives::{sample_negatives, AnchorCandidates, SamplingScope, VideoMembership};

use crate::align::SimilarityMatrix;
use crate::error::{Error, Result};

/// Default softmax temperature.
pub const DEFAULT_TEMPERATURE: f64 = 0.07;

/// Which modality a feature matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Clip,
    Sentence,
}

/// Row-per-item embeddings stored as `f32`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    count: usize,
    dim: usize,
    values: Vec<f32>,
    role: Role,
}

impl FeatureMatrix {
    pub fn new(count: usize, dim: usize, values: Vec<f32>, role: Role) -> Result<Self> {
        if count == 0 || dim == 0 {
            return Err(Error::validation(format!(
                "feature matrix must be at least 1x1, got {count}x{dim}"
            )));
        }
        if values.len() != count * dim {
            return Err(Error::validation(format!(
                "{count}x{dim} feature matrix needs {} values, got {}",
                count * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self {
            count,
            dim,
            values,
            role,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>], role: Role) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::validation(format!(
                "row {r} has dimension {}, expected {dim}",
                rows[r].len()
            )));
        }
        Self::new(rows.len(), dim, rows.concat(), role)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Rows scaled to unit L2 norm. Fails on the first zero-norm row.
    pub fn l2_normalized(&self) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.count {
            let row = self.row(i);
            let norm = row_norm(row);
            if norm == 0.0 {
                return Err(zero_norm(self.role, i));
            }
            values.extend(row.iter().map(|&v| (v as f64 / norm) as f32));
        }
        Self::new(self.count, self.dim, values, self.role)
    }

    pub(crate) fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

fn row_norm(row: &[f32]) -> f64 {
    row.iter()
        .map(|&v| (v as f64) * (v as f64))
        .sum::<f64>()
        .sqrt()
}

fn zero_norm(role: Role, row: usize) -> Error {
    let side = match role {
        Role::Clip => "clip",
        Role::Sentence => "sentence",
    };
    Error::validation(format!("{side} feature row {row} has zero norm"))
}

/// Cosine similarity of every clip row against every sentence row.
pub fn cosine_similarity(
    clips: &FeatureMatrix,
    sentences: &FeatureMatrix,
) -> Result<SimilarityMatrix> {
    if clips.dim != sentences.dim {
        return Err(Error::validation(format!(
            "dimension mismatch: clips have {}, sentences have {}",
            clips.dim, sentences.dim
        )));
    }
    let norms = |m: &FeatureMatrix| -> Result<Vec<f64>> {
        (0..m.count)
            .map(|i| {
                let n = row_norm(m.row(i));
                if n == 0.0 {
                    Err(zero_norm(m.role, i))
                } else {
                    Ok(n)
                }
            })
            .collect()
    };
    let clip_norms = norms(clips)?;
    let sentence_norms = norms(sentences)?;

    let mut values = Vec::with_capacity(clips.count * sentences.count);
    for (i, cn) in clip_norms.iter().enumerate() {
        let v = clips.row(i);
        for (j, sn) in sentence_norms.iter().enumerate() {
            let t = sentences.row(j);
            let dot: f64 = v.iter().zip(t).map(|(&a, &b)| a as f64 * b as f64).sum();
            values.push((dot / (cn * sn)).clamp(-1.0, 1.0));
        }
    }
    SimilarityMatrix::new(clips.count, sentences.count, values)
}

/// Positive (clip row, sentence row) pairs and sampling/loss parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastiveBatch {
    pub positives: Vec<(usize, usize)>,
    pub negatives_per_anchor: usize,
    pub temperature: f64,
    pub rng_seed: u64,
}

impl ContrastiveBatch {
    pub fn validate(&self) -> Result<()> {
        if self.negatives_per_anchor == 0 {
            return Err(Error::validation("negatives per anchor must be >= 1"));
        }
        self.check_temperature()
    }

    pub(crate) fn check_temperature(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::validation(format!(
                "temperature must be positive and finite, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}
