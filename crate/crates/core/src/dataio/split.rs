//! Per-language sup_train/validation/test split of annotated videos, with
//! weakly supervised videos removed when they cover an annotated movie.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::read_jsonl;
use crate::error::{Error, Result};
use crate::types::Language;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoManifest {
    pub video_id: String,
    #[serde(rename = "lang")]
    pub language: Language,
    /// Canonical English movie title, used for deduplication.
    #[serde(default)]
    pub movie_name: Option<String>,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clips: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentences: Option<String>,
}

#[derive(Deserialize)]
struct ManifestLine {
    #[serde(flatten)]
    manifest: VideoManifest,
    #[serde(default)]
    annotated: bool,
}

/// Reads manifest JSONL; returns the manifests and the ids flagged
/// `"annotated": true`.
pub fn parse_manifests<R: BufRead>(reader: R) -> Result<(Vec<VideoManifest>, BTreeSet<String>)> {
    let mut manifests = Vec::new();
    let mut annotated = BTreeSet::new();
    for (line, rec) in read_jsonl::<ManifestLine, _>(reader)? {
        if !(rec.manifest.duration >= 0.0 && rec.manifest.duration.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("invalid duration {}", rec.manifest.duration),
            });
        }
        if rec.annotated {
            annotated.insert(rec.manifest.video_id.clone());
        }
        manifests.push(rec.manifest);
    }
    Ok((manifests, annotated))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    WeakTrain,
    SupTrain,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub sup_train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            sup_train: 0.2,
            validation: 0.2,
            test: 0.6,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<()> {
        let parts = [self.sup_train, self.validation, self.test];
        if parts.iter().any(|r| !(0.0..=1.0).contains(r))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::validation(format!(
                "split ratios must be in [0, 1] and sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }

    /// Largest-remainder apportionment of `n` items.
    fn counts(&self, n: usize) -> [usize; 3] {
        let quotas = [self.sup_train, self.validation, self.test].map(|r| r * n as f64);
        let mut counts = quotas.map(|q| (q + 1e-9).floor() as usize);
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| {
            let frac = |i: usize| (quotas[i] - counts[i] as f64).max(0.0);
            frac(b).total_cmp(&frac(a)).then(a.cmp(&b))
        });
        let assigned: usize = counts.iter().sum();
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub assignments: BTreeMap<String, Split>,
    /// Unannotated videos dropped because their movie is annotated.
    pub excluded: BTreeSet<String>,
}

impl SplitAssignment {
    pub fn count(&self, split: Split) -> usize {
        self.assignments.values().filter(|&&s| s == split).count()
    }

    /// Fails if any movie appears both in weak_train and an annotated split.
    pub fn check_no_movie_overlap(&self, manifests: &[VideoManifest]) -> Result<()> {
        let movie: BTreeMap<&str, Option<String>> = manifests
            .iter()
            .map(|m| {
                (
                    m.video_id.as_str(),
                    m.movie_name.as_deref().and_then(movie_key),
                )
            })
            .collect();
        let keys = |want_weak: bool| -> BTreeSet<String> {
            self.assignments
                .iter()
                .filter(|(_, &s)| (s == Split::WeakTrain) == want_weak)
                .filter_map(|(id, _)| movie.get(id.as_str()).cloned().flatten())
                .collect()
        };
        if let Some(shared) = keys(true).intersection(&keys(false)).next() {
            return Err(Error::validation(format!(
                "movie {shared:?} appears in weak_train and an annotated split"
            )));
        }
        Ok(())
    }
}

/// Normalized movie key: trimmed and case-folded. `None` when blank.
pub fn movie_key(name: &str) -> Option<String> {
    let key = name.trim().to_lowercase();
    (!key.is_empty()).then_some(key)
}

pub fn dedup_split(
    manifests: &[VideoManifest],
    annotated: &BTreeSet<String>,
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitAssignment> {
    ratios.validate()?;
    let mut seen = BTreeSet::new();
    for m in manifests {
        if !seen.insert(m.video_id.as_str()) {
            return Err(Error::validation(format!(
                "duplicate video id {:?}",
                m.video_id
            )));
        }
    }
    if let Some(id) = annotated.iter().find(|id| !seen.contains(id.as_str())) {
        return Err(Error::validation(format!(
            "annotated video {id:?} has no manifest"
        )));
    }

    let mut annotated_movies = BTreeSet::new();
    let mut by_language: BTreeMap<&Language, Vec<&str>> = BTreeMap::new();
    for m in manifests.iter().filter(|m| annotated.contains(&m.video_id)) {
        let key = m.movie_name.as_deref().and_then(movie_key).ok_or_else(|| {
            Error::validation(format!(
                "annotated video {:?} has no movie_name",
                m.video_id
            ))
        })?;
        annotated_movies.insert(key);
        by_language
            .entry(&m.language)
            .or_default()
            .push(&m.video_id);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    for ids in by_language.values_mut() {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        let [sup, val, _] = ratios.counts(ids.len());
        for (pos, id) in ids.iter().enumerate() {
            let split = if pos < sup {
                Split::SupTrain
            } else if pos < sup + val {
                Split::Validation
            } else {
                Split::Test
            };
            assignments.insert(id.to_string(), split);
        }
    }

    let mut excluded = BTreeSet::new();
    for m in manifests
        .iter()
        .filter(|m| !annotated.contains(&m.video_id))
    {
        let collides = m
            .movie_name
            .as_deref()
            .and_then(movie_key)
            .is_some_and(|k| annotated_movies.contains(&k));
        if collides {
            excluded.insert(m.video_id.clone());
        } else {
            assignments.insert(m.video_id.clone(), Split::WeakTrain);
        }
    }

    Ok(SplitAssignment {
        seed,
        assignments,
        excluded,
    })
}
