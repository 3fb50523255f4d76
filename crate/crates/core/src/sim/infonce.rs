//! Two-direction InfoNCE over sampled candidates.
//!
//! For positive pair `i` with clip row `v` and sentence row `t`:
//!
//! ```text
//! loss_i = -log softmax_{j in S_i}(v . t_j / tau)[t] - log softmax_{j in C_i}(v_j . t / tau)[v]
//! ```
//!
//! where `S_i` and `C_i` hold the positive plus its sampled negatives. The
//! batch loss is the mean of `loss_i`. Dot products use the rows as stored.

use std::collections::BTreeSet;

use super::{AnchorCandidates, ContrastiveBatch, FeatureMatrix};
use crate::error::{Error, Result};

/// Loss value with gradients for every clip and sentence feature entry.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoNceGradient {
    pub loss: f64,
    pub clips: Vec<f64>,
    pub sentences: Vec<f64>,
}

pub fn infonce_loss(
    clips: &FeatureMatrix,
    sentences: &FeatureMatrix,
    batch: &ContrastiveBatch,
    candidates: &[AnchorCandidates],
) -> Result<f64> {
    let problem = Problem::new(clips, sentences, batch, candidates)?;
    Ok(problem.evaluate(&clips.to_f64(), &sentences.to_f64(), None))
}

pub fn infonce_gradient(
    clips: &FeatureMatrix,
    sentences: &FeatureMatrix,
    batch: &ContrastiveBatch,
    candidates: &[AnchorCandidates],
) -> Result<InfoNceGradient> {
    let problem = Problem::new(clips, sentences, batch, candidates)?;
    let v = clips.to_f64();
    let t = sentences.to_f64();
    let mut grad = (vec![0.0; v.len()], vec![0.0; t.len()]);
    let loss = problem.evaluate(&v, &t, Some(&mut grad));
    Ok(InfoNceGradient {
        loss,
        clips: grad.0,
        sentences: grad.1,
    })
}

/// Largest relative disagreement between the analytic gradient and central
/// finite differences with step `epsilon`, over every feature entry.
///
/// Relative error is `|a - n| / max(|a|, |n|, 1e-5)`. The floor keeps
/// components smaller than the finite-difference resolution from reporting
/// pure rounding noise.
pub fn infonce_grad_check(
    clips: &FeatureMatrix,
    sentences: &FeatureMatrix,
    batch: &ContrastiveBatch,
    candidates: &[AnchorCandidates],
    epsilon: f64,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(Error::validation(format!(
            "finite-difference step must lie in (0, 1e-2], got {epsilon}"
        )));
    }
    let problem = Problem::new(clips, sentences, batch, candidates)?;
    let mut v = clips.to_f64();
    let mut t = sentences.to_f64();
    let mut grad = (vec![0.0; v.len()], vec![0.0; t.len()]);
    problem.evaluate(&v, &t, Some(&mut grad));

    let mut worst = 0.0f64;
    for k in 0..v.len() {
        let x = v[k];
        v[k] = x + epsilon;
        let up = problem.evaluate(&v, &t, None);
        v[k] = x - epsilon;
        let down = problem.evaluate(&v, &t, None);
        v[k] = x;
        worst = worst.max(relative_error(grad.0[k], (up - down) / (2.0 * epsilon)));
    }
    for k in 0..t.len() {
        let x = t[k];
        t[k] = x + epsilon;
        let up = problem.evaluate(&v, &t, None);
        t[k] = x - epsilon;
        let down = problem.evaluate(&v, &t, None);
        t[k] = x;
        worst = worst.max(relative_error(grad.1[k], (up - down) / (2.0 * epsilon)));
    }
    Ok(worst)
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(1e-5);
    (analytic - numeric).abs() / scale
}

struct Problem<'a> {
    dim: usize,
    temperature: f64,
    positives: &'a [(usize, usize)],
    candidates: &'a [AnchorCandidates],
}

impl<'a> Problem<'a> {
    fn new(
        clips: &FeatureMatrix,
        sentences: &FeatureMatrix,
        batch: &'a ContrastiveBatch,
        candidates: &'a [AnchorCandidates],
    ) -> Result<Self> {
        batch.check_temperature()?;
        if clips.dim() != sentences.dim() {
            return Err(Error::validation(format!(
                "dimension mismatch: clips have {}, sentences have {}",
                clips.dim(),
                sentences.dim()
            )));
        }
        if batch.positives.is_empty() {
            return Err(Error::validation("batch has no positive pairs"));
        }
        if candidates.len() != batch.positives.len() {
            return Err(Error::validation(format!(
                "{} candidate lists for {} positive pairs",
                candidates.len(),
                batch.positives.len()
            )));
        }
        for (i, (&(clip, sentence), cands)) in batch.positives.iter().zip(candidates).enumerate() {
            if clip >= clips.count() || sentence >= sentences.count() {
                return Err(Error::validation(format!(
                    "positive pair {i} ({clip}, {sentence}) out of range"
                )));
            }
            check_list(i, "sentence", &cands.sentences, sentence, sentences.count())?;
            check_list(i, "clip", &cands.clips, clip, clips.count())?;
        }
        Ok(Self {
            dim: clips.dim(),
            temperature: batch.temperature,
            positives: &batch.positives,
            candidates,
        })
    }

    fn dot(&self, v: &[f64], vi: usize, t: &[f64], ti: usize) -> f64 {
        let d = self.dim;
        v[vi * d..(vi + 1) * d]
            .iter()
            .zip(&t[ti * d..(ti + 1) * d])
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Loss for the given flat feature buffers; accumulates gradients into
    /// `grad` (clips, sentences) when provided.
    fn evaluate(&self, v: &[f64], t: &[f64], mut grad: Option<&mut (Vec<f64>, Vec<f64>)>) -> f64 {
        let n = self.positives.len() as f64;
        let tau = self.temperature;
        let d = self.dim;
        let mut total = 0.0;
        let mut probs = Vec::new();

        for (&(clip, sentence), cands) in self.positives.iter().zip(self.candidates) {
            // Clip anchor scored against sentence candidates.
            let logits: Vec<f64> = cands
                .sentences
                .iter()
                .map(|&j| self.dot(v, clip, t, j) / tau)
                .collect();
            total += softmax_nll(&logits, &cands.sentences, sentence, &mut probs);
            if let Some((gv, gt)) = grad.as_deref_mut() {
                for (&j, &p) in cands.sentences.iter().zip(&probs) {
                    let w = (p - f64::from(u8::from(j == sentence))) / (tau * n);
                    for k in 0..d {
                        gv[clip * d + k] += w * t[j * d + k];
                        gt[j * d + k] += w * v[clip * d + k];
                    }
                }
            }

            // Sentence anchor scored against clip candidates.
            let logits: Vec<f64> = cands
                .clips
                .iter()
                .map(|&j| self.dot(v, j, t, sentence) / tau)
                .collect();
            total += softmax_nll(&logits, &cands.clips, clip, &mut probs);
            if let Some((gv, gt)) = grad.as_deref_mut() {
                for (&j, &p) in cands.clips.iter().zip(&probs) {
                    let w = (p - f64::from(u8::from(j == clip))) / (tau * n);
                    for k in 0..d {
                        gt[sentence * d + k] += w * v[j * d + k];
                        gv[j * d + k] += w * t[sentence * d + k];
                    }
                }
            }
        }
        total / n
    }
}

/// `-log softmax(logits)[positive]`, leaving the softmax in `probs`.
fn softmax_nll(logits: &[f64], ids: &[usize], positive: usize, probs: &mut Vec<f64>) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    probs.clear();
    probs.extend(logits.iter().map(|z| (z - lse).exp()));
    let pos = ids.iter().position(|&j| j == positive).expect("validated");
    lse - logits[pos]
}

fn check_list(
    pair: usize,
    side: &str,
    list: &[usize],
    positive: usize,
    count: usize,
) -> Result<()> {
    if !list.contains(&positive) {
        return Err(Error::validation(format!(
            "{side} candidates of pair {pair} omit the positive {positive}"
        )));
    }
    if let Some(&j) = list.iter().find(|&&j| j >= count) {
        return Err(Error::validation(format!(
            "{side} candidate {j} of pair {pair} out of range"
        )));
    }
    if list.iter().collect::<BTreeSet<_>>().len() != list.len() {
        return Err(Error::validation(format!(
            "{side} candidates of pair {pair} contain duplicates"
        )));
    }
    Ok(())
}
