use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ContrastiveBatch;
use crate::error::{Error, Result};

/// Video id of every clip row and every sentence row.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoMembership {
    pub clip_video: Vec<String>,
    pub sentence_video: Vec<String>,
}

/// Where negatives may come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingScope {
    /// Only items from the anchor's own video.
    #[default]
    SameVideo,
    /// Same video when it has enough items, otherwise the whole corpus.
    CorpusFallback,
}

/// Candidate rows for one positive pair. The positive comes first in each
/// list, followed by the sampled negatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorCandidates {
    /// Sentence rows scored against the clip anchor.
    pub sentences: Vec<usize>,
    /// Clip rows scored against the sentence anchor.
    pub clips: Vec<usize>,
}

impl AnchorCandidates {
    /// Candidate lists containing only the positive pair.
    pub fn positive_only(clip: usize, sentence: usize) -> Self {
        Self {
            sentences: vec![sentence],
            clips: vec![clip],
        }
    }
}

/// Draws `K` distinct negatives per direction for every positive pair,
/// uniformly without replacement from the pair's video, excluding the
/// positive itself. Deterministic in `batch.rng_seed`.
pub fn sample_negatives(
    batch: &ContrastiveBatch,
    membership: &VideoMembership,
    scope: SamplingScope,
) -> Result<Vec<AnchorCandidates>> {
    batch.validate()?;
    let k = batch.negatives_per_anchor;
    let clips_by_video = group(&membership.clip_video);
    let sentences_by_video = group(&membership.sentence_video);
    let all_clips: Vec<usize> = (0..membership.clip_video.len()).collect();
    let all_sentences: Vec<usize> = (0..membership.sentence_video.len()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(batch.rng_seed);
    let mut out = Vec::with_capacity(batch.positives.len());
    for &(clip, sentence) in &batch.positives {
        let video = membership
            .clip_video
            .get(clip)
            .ok_or_else(|| Error::validation(format!("positive clip row {clip} out of range")))?;
        let sentence_video = membership.sentence_video.get(sentence).ok_or_else(|| {
            Error::validation(format!("positive sentence row {sentence} out of range"))
        })?;
        if video != sentence_video {
            return Err(Error::validation(format!(
                "positive pair ({clip}, {sentence}) spans videos {video:?} and {sentence_video:?}"
            )));
        }

        let sentences = draw(
            &mut rng,
            sentence,
            k,
            video,
            &sentences_by_video[video.as_str()],
            &all_sentences,
            scope,
        )?;
        let clips = draw(
            &mut rng,
            clip,
            k,
            video,
            &clips_by_video[video.as_str()],
            &all_clips,
            scope,
        )?;
        out.push(AnchorCandidates { sentences, clips });
    }
    Ok(out)
}

fn group(videos: &[String]) -> BTreeMap<&str, Vec<usize>> {
    let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, v) in videos.iter().enumerate() {
        map.entry(v.as_str()).or_default().push(i);
    }
    map
}

fn draw(
    rng: &mut ChaCha8Rng,
    positive: usize,
    k: usize,
    video: &str,
    same_video: &[usize],
    corpus: &[usize],
    scope: SamplingScope,
) -> Result<Vec<usize>> {
    let mut pool: Vec<usize> = same_video
        .iter()
        .copied()
        .filter(|&i| i != positive)
        .collect();
    if pool.len() < k && scope == SamplingScope::CorpusFallback {
        pool = corpus.iter().copied().filter(|&i| i != positive).collect();
    }
    if pool.len() < k {
        return Err(Error::InsufficientNegatives {
            video: video.to_string(),
            needed: k,
            available: pool.len(),
        });
    }
    let mut picked = Vec::with_capacity(k + 1);
    picked.push(positive);
    picked.extend(
        index::sample(rng, pool.len(), k)
            .into_iter()
            .map(|i| pool[i]),
    );
    Ok(picked)
}
