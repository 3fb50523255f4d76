use std::collections::BTreeSet;

use super::{to_cost, SimilarityMatrix};
use crate::types::{Alignment, Assignment};

#[derive(Clone, Copy)]
enum Step {
    Start,
    Diagonal,
    /// Previous cell is `(clip - 1, sentence)`.
    ClipAdvance,
    /// Previous cell is `(clip, sentence - 1)`.
    SentenceAdvance,
}

/// Full DTW: every clip and every sentence is matched.
///
/// The table is seeded with `c(0,0) = d(0,0)` so that `total_cost` is exactly
/// the sum of matched distances along the path. Ties prefer the diagonal,
/// then the clip-advancing step.
pub fn dtw_align(sim: &SimilarityMatrix) -> Alignment {
    let cost = to_cost(sim);
    let (rows, cols) = (cost.rows(), cost.cols());
    let mut acc = vec![f64::INFINITY; rows * cols];
    let mut steps = vec![Step::Start; rows * cols];
    let at = |i: usize, j: usize| i * cols + j;

    for i in 0..rows {
        for j in 0..cols {
            let d = cost.get(i, j);
            if i == 0 && j == 0 {
                acc[0] = d;
                continue;
            }
            let mut best = f64::INFINITY;
            let mut step = Step::Start;
            let candidates = [
                (
                    i > 0 && j > 0,
                    Step::Diagonal,
                    i.wrapping_sub(1),
                    j.wrapping_sub(1),
                ),
                (i > 0, Step::ClipAdvance, i.wrapping_sub(1), j),
                (j > 0, Step::SentenceAdvance, i, j.wrapping_sub(1)),
            ];
            for (ok, s, pi, pj) in candidates {
                if ok {
                    let v = acc[at(pi, pj)] + d;
                    if v < best {
                        best = v;
                        step = s;
                    }
                }
            }
            acc[at(i, j)] = best;
            steps[at(i, j)] = step;
        }
    }

    let mut path = Vec::with_capacity(rows + cols);
    let (mut i, mut j) = (rows - 1, cols - 1);
    loop {
        path.push(Assignment::new(j, i));
        match steps[at(i, j)] {
            Step::Start => break,
            Step::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Step::ClipAdvance => i -= 1,
            Step::SentenceAdvance => j -= 1,
        }
    }
    path.reverse();

    Alignment {
        clip_count: rows,
        sentence_count: cols,
        assignments: path,
        dropped_sentences: BTreeSet::new(),
        dropped_clips: BTreeSet::new(),
        total_cost: acc[at(rows - 1, cols - 1)],
    }
}
