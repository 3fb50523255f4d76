use std::collections::BTreeSet;

use super::{drop_charge, to_cost, CostMatrix, DropCosts, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::types::{Alignment, Assignment};

/// Largest side length accepted by [`brute_force_align`].
pub const BRUTE_FORCE_LIMIT: usize = 6;

/// Exhaustive search over every monotone alignment with drops.
///
/// An alignment is any chain of grid cells `(clip, sentence)` that is
/// strictly increasing in the product order; items that no cell covers are
/// dropped. This enumerates all such chains directly and shares no code with
/// the dynamic programs, so it serves as their reference.
pub fn brute_force_align(sim: &SimilarityMatrix, drops: DropCosts) -> Result<Alignment> {
    let (rows, cols) = (sim.rows(), sim.cols());
    if rows > BRUTE_FORCE_LIMIT || cols > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            rows,
            cols,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let cost = to_cost(sim);
    let mut search = Search {
        cost: &cost,
        drops,
        chain: Vec::new(),
        best_cost: f64::INFINITY,
        best_chain: Vec::new(),
    };
    search.extend(None, 0.0);

    let chain = search.best_chain;
    let matched_clips: BTreeSet<usize> = chain.iter().map(|&(c, _)| c).collect();
    let matched_sentences: BTreeSet<usize> = chain.iter().map(|&(_, s)| s).collect();
    Ok(Alignment {
        clip_count: rows,
        sentence_count: cols,
        assignments: chain.iter().map(|&(c, s)| Assignment::new(s, c)).collect(),
        dropped_clips: (0..rows).filter(|c| !matched_clips.contains(c)).collect(),
        dropped_sentences: (0..cols)
            .filter(|s| !matched_sentences.contains(s))
            .collect(),
        total_cost: search.best_cost,
    })
}

struct Search<'a> {
    cost: &'a CostMatrix,
    drops: DropCosts,
    chain: Vec<(usize, usize)>,
    best_cost: f64,
    best_chain: Vec<(usize, usize)>,
}

impl Search<'_> {
    /// `acc` covers the chain so far plus every item skipped before its last
    /// cell.
    fn extend(&mut self, last: Option<(usize, usize)>, acc: f64) {
        let (rows, cols) = (self.cost.rows(), self.cost.cols());
        // Items strictly after `last` that are still unresolved.
        let (clip_from, sentence_from) = match last {
            Some((c, s)) => (c + 1, s + 1),
            None => (0, 0),
        };

        let finished = acc
            + drop_charge(rows - clip_from, self.drops.clip)
            + drop_charge(cols - sentence_from, self.drops.sentence);
        if finished < self.best_cost {
            self.best_cost = finished;
            self.best_chain = self.chain.clone();
        }

        let (clip_lo, sentence_lo) = match last {
            Some((c, s)) => (c, s),
            None => (0, 0),
        };
        for c in clip_lo..rows {
            for s in sentence_lo..cols {
                if last == Some((c, s)) {
                    continue;
                }
                let skipped_clips = c.saturating_sub(clip_from);
                let skipped_sentences = s.saturating_sub(sentence_from);
                let step = self.cost.get(c, s)
                    + drop_charge(skipped_clips, self.drops.clip)
                    + drop_charge(skipped_sentences, self.drops.sentence);
                self.chain.push((c, s));
                self.extend(Some((c, s)), acc + step);
                self.chain.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn refuses_large_instances() {
        let sim = SimilarityMatrix::new(7, 2, vec![0.0; 14]).unwrap();
        assert!(matches!(
            brute_force_align(&sim, DropCosts::disabled()),
            Err(Error::TooLarge { rows: 7, .. })
        ));
    }

    #[test]
    fn one_clip_two_sentences() {
        let sim = SimilarityMatrix::new(1, 2, vec![0.5, 0.5]).unwrap();
        let drops = DropCosts::new(f64::INFINITY, 0.1).unwrap();
        let a = brute_force_align(&sim, drops).unwrap();
        assert_abs_diff_eq!(a.total_cost, 0.6, epsilon = 1e-12);
        assert_eq!(a.assignments.len(), 1);
        assert_eq!(a.dropped_sentences.len(), 1);
        a.validate().unwrap();
    }

    #[test]
    fn single_cell_options() {
        let sim = SimilarityMatrix::new(1, 1, vec![-1.0]).unwrap();
        let a = brute_force_align(&sim, DropCosts::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(a.total_cost, 1.0);
        assert!(a.assignments.is_empty());
    }

    #[test]
    fn full_size_guard_instance_runs() {
        let values = (0..36)
            .map(|i| ((i * 7) % 11) as f64 / 10.0 - 0.5)
            .collect();
        let sim = SimilarityMatrix::new(6, 6, values).unwrap();
        let a = brute_force_align(&sim, DropCosts::new(0.8, 0.8).unwrap()).unwrap();
        a.validate().unwrap();
    }
}
